"""
Bench report: one record per run, printed as text and optionally written
as CSV or JSON through pandas.
"""

import os
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import pandas as pd

logger = logging.getLogger(__name__)

# Leading columns, in print order; program-specific extras follow
REPORT_FIELDS = [
    'program', 'n', 'p', 'backend', 'result', 'oracle_delta',
    'rounds', 'messages', 'words', 'predicted_time', 'wall_time', 'verdict',
]


@dataclass
class BenchReport:
    record: Dict[str, Any]
    checks: List[Any] = field(default_factory=list)

    @property
    def frame(self) -> pd.DataFrame:
        columns = REPORT_FIELDS + [k for k in self.record if k not in REPORT_FIELDS]
        return pd.DataFrame([self.record], columns=columns)

    def check_frame(self) -> pd.DataFrame:
        rows = [r for check in self.checks for r in check.records()]
        return pd.DataFrame(rows)

    @property
    def matches_model(self):
        return all(check.matches for check in self.checks)

    def lines(self):
        out = []
        for key in REPORT_FIELDS:
            out.append(f"{key:>15}: {_fmt(self.record.get(key))}")
        for key, value in self.record.items():
            if key not in REPORT_FIELDS:
                out.append(f"{key:>15}: {_fmt(value)}")
        for check in self.checks:
            out.extend(f"{'cost':>15}: {line}" for line in check.lines())
        return out

    @property
    def text(self):
        return '\n'.join(self.lines())

    def write(self, path):
        """Append-free write; the extension picks the format (.csv or .json)."""
        ext = os.path.splitext(path)[1].lower()
        if ext == '.csv':
            self.frame.to_csv(path, index=False)
        elif ext == '.json':
            self.frame.to_json(path, orient='records', indent=2)
        else:
            raise ValueError(f"unsupported report format '{ext}' (use .csv or .json)")
        logger.info(f"report written to {path}")
        return path


def _fmt(value):
    if value is None:
        return '-'
    if isinstance(value, float):
        return f'{value:.6g}'
    return str(value)


def report_emit(program, outcome, config, fields=None, checks=()) -> BenchReport:
    """
    Merge run-level numbers (world size, backend, ledger totals, wall time)
    with the program's own fields into a single report record.
    """
    ledger = outcome.ledger
    checks = list(checks)
    predicted = None
    if checks and checks[0].findings:
        predicted = sum(f.predicted_seconds for f in checks[0].findings)
    record = {
        'program': program,
        'n': None,
        'p': config.np,
        'backend': config.backend,
        'result': None,
        'oracle_delta': None,
        'rounds': ledger.rounds,
        'messages': ledger.messages_sent,
        'words': ledger.words_sent,
        'predicted_time': predicted,
        'wall_time': outcome.wall_time,
        'verdict': None,
    }
    record.update(fields or {})
    if config.backend == 'tcp':
        record['rank'] = config.rank
    logger.info(f"{program} p={config.np} backend={config.backend}: {record['verdict']}")
    return BenchReport(record, checks)
