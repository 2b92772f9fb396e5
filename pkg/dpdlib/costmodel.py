"""
Alpha-beta cost accounting.

Each rank owns a CostLedger. Collectives open an operation record on the
ledger; the endpoint charges every send to the active record, and the
algorithm marks the rounds (synchronized steps) the caller took part in.
Per-rank ledgers merge into a run-level ledger after the run: messages and
words add up, round sets are united.
"""

import math
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from .config import COST_SETTINGS
from .errors import DpdError
from .utils import ceil_log2, words_of

logger = logging.getLogger(__name__)

PATTERNS = ('reduce', 'broadcast', 'all_reduce', 'scan', 'shift', 'linear_reduce')

# group operation name -> predicted_time pattern
OPERATION_PATTERNS = {
    'reduce': 'reduce',
    'broadcast': 'broadcast',
    'all_reduce': 'all_reduce',
    'scan': 'scan',
    'circular_shift': 'shift',
    'linear_reduce': 'linear_reduce',
}


@dataclass(frozen=True)
class CostParams:
    t_s: float = COST_SETTINGS['t_s']
    t_w: float = COST_SETTINGS['t_w']

    def __post_init__(self):
        if self.t_s < 0 or self.t_w < 0:
            raise DpdError(f"cost parameters must be non-negative (t_s={self.t_s}, t_w={self.t_w})")


@dataclass(frozen=True)
class OpRecord:
    """Counters for one collective instance, as seen by one rank or merged over ranks"""
    key: Tuple[int, int]
    operation: str
    group_size: int
    steps: FrozenSet[int] = frozenset()
    messages: int = 0
    words: int = 0
    root: int = 0

    @property
    def rounds(self):
        return len(self.steps)

    def merge(self, other):
        if other.key != self.key:
            raise DpdError(f"cannot merge records of different operations {self.key} and {other.key}")
        return OpRecord(self.key, self.operation, self.group_size, self.steps | other.steps,
                        self.messages + other.messages, self.words + other.words, self.root)


class _ActiveRecord:
    """Mutable accumulator for the collective currently running on a rank"""

    def __init__(self, key, operation, group_size, root):
        self.key = key
        self.operation = operation
        self.group_size = group_size
        self.root = root
        self.steps = set()
        self.messages = 0
        self.words = 0

    def mark_step(self, step):
        self.steps.add(step)

    def freeze(self):
        return OpRecord(self.key, self.operation, self.group_size, frozenset(self.steps),
                        self.messages, self.words, self.root)


class CostLedger:
    """Per-rank (or merged) message, word and round counters"""

    def __init__(self, records=None, messages_sent=0, words_sent=0):
        self._records: Dict[Tuple[int, int], OpRecord] = dict(records or {})
        self.messages_sent = messages_sent
        self.words_sent = words_sent
        self._active: Optional[_ActiveRecord] = None

    @contextmanager
    def collective(self, key, operation, group_size, root=0):
        """
        Scope a collective. Nested scopes (an all-reduce calling its reduce and
        broadcast phases) are charged to the outermost record.
        """
        if self._active is not None:
            yield self._active
            return
        record = _ActiveRecord(key, operation, group_size, root)
        self._active = record
        try:
            yield record
        finally:
            self._active = None
            frozen = record.freeze()
            if frozen.key in self._records:
                frozen = self._records[frozen.key].merge(frozen)
            self._records[frozen.key] = frozen

    def charge_send(self, nbytes):
        words = words_of(nbytes)
        self.messages_sent += 1
        self.words_sent += words
        if self._active is not None:
            self._active.messages += 1
            self._active.words += words

    @property
    def records(self) -> List[OpRecord]:
        return list(self._records.values())

    def operations(self, operation=None, group_size=None) -> List[OpRecord]:
        return [r for r in self._records.values()
                if (operation is None or r.operation == operation)
                and (group_size is None or r.group_size == group_size)]

    @property
    def rounds(self):
        return sum(r.rounds for r in self._records.values())

    def merge(self, other):
        merged = dict(self._records)
        for key, record in other._records.items():
            merged[key] = merged[key].merge(record) if key in merged else record
        return CostLedger(merged, self.messages_sent + other.messages_sent,
                          self.words_sent + other.words_sent)

    def snapshot(self):
        """Frozen copy safe to hand to another thread"""
        return CostLedger(self._records, self.messages_sent, self.words_sent)

    @classmethod
    def merge_all(cls, ledgers):
        merged = cls()
        for ledger in ledgers:
            merged = merged.merge(ledger)
        return merged

    def __eq__(self, other):
        if not isinstance(other, CostLedger):
            return NotImplemented
        return (self._records == other._records and self.messages_sent == other.messages_sent
                and self.words_sent == other.words_sent)

    def __repr__(self):
        return (f'CostLedger(operations={len(self._records)}, messages={self.messages_sent}, '
                f'words={self.words_sent}, rounds={self.rounds})')


def _step_cost(m, params, t_lambda):
    return params.t_s + params.t_w * m + t_lambda


def predicted_time(pattern, p, m, params, t_lambda=0.0):
    """Closed-form parallel time of a communication pattern under the alpha-beta model."""
    if pattern not in PATTERNS:
        raise DpdError(f"unknown communication pattern '{pattern}' (expected one of {', '.join(PATTERNS)})")
    if p < 1:
        raise DpdError(f"group size must be at least 1, got {p}")
    if p == 1:
        return 0.0

    log_p = ceil_log2(p)
    if pattern in ('reduce', 'broadcast', 'scan'):
        return log_p * _step_cost(m, params, t_lambda)
    if pattern == 'all_reduce':
        return 2 * log_p * _step_cost(m, params, t_lambda)
    if pattern == 'shift':
        return params.t_s + params.t_w * m
    return (p - 1) * _step_cost(m, params, t_lambda)


def scan_messages(p):
    """Messages of the hypercube prefix scan: both directions of every existing pair."""
    total = 0
    for d in range(ceil_log2(p)):
        bit = 1 << d
        total += sum(1 for r in range(p) if (r ^ bit) < p)
    return total


def expected_counts(pattern, p, root=0):
    """Exact (rounds, messages) the implemented algorithms produce for a group of p."""
    if pattern not in PATTERNS:
        raise DpdError(f"unknown communication pattern '{pattern}'")
    if p <= 1:
        return 0, 0
    log_p = ceil_log2(p)
    extra = 1 if root != 0 else 0
    if pattern == 'reduce':
        return log_p + extra, p - 1 + extra
    if pattern == 'broadcast':
        return log_p, p - 1
    if pattern == 'all_reduce':
        return 2 * log_p, 2 * (p - 1)
    if pattern == 'scan':
        return log_p, scan_messages(p)
    if pattern == 'shift':
        return 1, p
    return p - 1, p - 1


def ledger_of(run):
    """Merged ledger of a finished run (a runtime RunOutcome or simulator outcome)."""
    ledger = getattr(run, 'ledger', None)
    if ledger is None:
        raise DpdError('run carries no ledger; was it executed through dpdlib?')
    return ledger


@dataclass
class CheckFinding:
    operation: str
    p: int
    m: float
    rounds_measured: int
    rounds_predicted: int
    messages: int
    messages_predicted: int
    words: int
    predicted_seconds: float

    @property
    def matches(self):
        return (self.rounds_measured == self.rounds_predicted
                and self.messages == self.messages_predicted)

    def as_record(self):
        return {
            'operation': self.operation,
            'p': self.p,
            'm': self.m,
            'rounds_measured': self.rounds_measured,
            'rounds_predicted': self.rounds_predicted,
            'messages': self.messages,
            'messages_predicted': self.messages_predicted,
            'words': self.words,
            'predicted_seconds': self.predicted_seconds,
            'matches': self.matches,
        }


@dataclass
class CheckReport:
    pattern: str
    p: int
    findings: List[CheckFinding] = field(default_factory=list)

    @property
    def matches(self):
        return bool(self.findings) and all(f.matches for f in self.findings)

    def lines(self):
        if not self.findings:
            return [f"{self.pattern} p={self.p}: no matching operation recorded"]
        out = []
        for f in self.findings:
            verdict = 'OK' if f.matches else 'MISMATCH'
            out.append(f"{f.operation} p={f.p} m={f.m:g}: rounds {f.rounds_measured}/{f.rounds_predicted} "
                       f"messages {f.messages}/{f.messages_predicted} words {f.words} "
                       f"predicted {f.predicted_seconds:.3e}s [{verdict}]")
        return out

    def records(self):
        return [f.as_record() for f in self.findings]


def check_against(ledger, pattern, p, m=None, params=None, t_lambda=0.0):
    """
    Compare every recorded operation of the given pattern and group size with
    the exact counts of the group algorithms. Mismatches are findings, not errors.
    """
    params = params or CostParams()
    report = CheckReport(pattern, p)
    for operation, op_pattern in OPERATION_PATTERNS.items():
        if op_pattern != pattern:
            continue
        for record in ledger.operations(operation, p):
            rounds_predicted, messages_predicted = expected_counts(pattern, p, record.root)
            words_per_message = m if m is not None else (
                math.ceil(record.words / record.messages) if record.messages else 0)
            report.findings.append(CheckFinding(
                operation=operation,
                p=p,
                m=words_per_message,
                rounds_measured=record.rounds,
                rounds_predicted=rounds_predicted,
                messages=record.messages,
                messages_predicted=messages_predicted,
                words=record.words,
                predicted_seconds=predicted_time(pattern, p, words_per_message, params, t_lambda),
            ))
    if not report.matches:
        logger.debug(f"check_against {pattern} p={p}: {report.lines()}")
    return report


def pi_predicted_time(n, p, params, t_c):
    """Blocked pi program: ceil(n/p) local evaluations, then one reduction of a scalar."""
    return math.ceil(n / p) * t_c + predicted_time('reduce', p, 1, params)


def floyd_predicted_time(n, p, params, t_c):
    """
    2D-blocked Floyd-Warshall on a sqrt(p) x sqrt(p) grid: every one of the n
    iterations broadcasts n/sqrt(p) words along a row and a column of sqrt(p)
    PEs, then updates an (n/sqrt(p))^2 block.
    """
    q = math.isqrt(p)
    if q * q != p:
        raise DpdError(f"Floyd-Warshall model needs a square PE count, got {p}")
    segment = n / q
    per_iteration = 2 * predicted_time('broadcast', q, segment, params) + segment * segment * t_c
    return n * per_iteration
