"""
SPMD program harness.

run(config, program) executes program(world_group) once per rank: all ranks
inside this process on the simulated backend, or this process's single rank
of a TCP mesh. The outcome carries the results and the merged cost ledger.
"""

import time
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional

from .config import COST_SETTINGS, SIMULATOR_SETTINGS
from .costmodel import CostLedger, CostParams
from .errors import ConfigError, DeadlockError
from .groups import world
from .maybe import Maybe
from .simulator import launch_simulated
from .tcp_backend import connect_tcp
from .utils import parse_hosts_file

logger = logging.getLogger(__name__)

BACKENDS = ('sim', 'tcp')


@dataclass(frozen=True)
class RunConfig:
    backend: str = 'sim'
    np: int = 1
    rank: Optional[int] = None
    hosts_path: Optional[str] = None
    seed: int = SIMULATOR_SETTINGS['default_seed']
    t_s: float = COST_SETTINGS['t_s']
    t_w: float = COST_SETTINGS['t_w']

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend '{self.backend}' (expected sim or tcp)")
        if self.np < 1:
            raise ConfigError(f"--np must be at least 1, got {self.np}")
        if self.backend == 'tcp':
            if self.rank is None or self.hosts_path is None:
                raise ConfigError('tcp backend requires --rank and --hosts')
            if not 0 <= self.rank < self.np:
                raise ConfigError(f"--rank {self.rank} outside world of {self.np}")
        elif self.rank is not None or self.hosts_path is not None:
            raise ConfigError('--rank and --hosts are only valid with the tcp backend')
        if self.t_s < 0 or self.t_w < 0:
            raise ConfigError('--ts and --tw must be non-negative')

    @property
    def cost_params(self):
        return CostParams(self.t_s, self.t_w)

    @classmethod
    def from_args(cls, args):
        return cls(backend=args.backend, np=args.np, rank=args.rank, hosts_path=args.hosts,
                   seed=args.seed, t_s=args.ts, t_w=args.tw)


@dataclass
class RunOutcome:
    """
    results holds one Maybe per rank on the simulated backend and a single
    entry (this rank's) on the TCP backend.
    """
    config: RunConfig
    results: List[Maybe]
    ledger: CostLedger
    wall_time: float
    errors: dict = field(default_factory=dict)
    deadlock: Any = None

    @property
    def ok(self):
        return self.deadlock is None and not self.errors

    def values(self):
        return [r.get_or_else(None) for r in self.results]

    def raise_for_status(self):
        if self.errors:
            raise next(iter(self.errors.values()))
        if self.deadlock is not None:
            raise DeadlockError(self.deadlock)
        return self


def run(config: RunConfig, program: Callable) -> RunOutcome:
    """Execute program(world GroupView) on every rank described by config."""
    started = time.perf_counter()
    if config.backend == 'sim':
        logger.info(f"running on simulated backend np={config.np} seed={config.seed}")
        launched = launch_simulated(config.np, lambda ep: program(world(ep)), config.seed)
        return RunOutcome(config, launched.results, launched.ledger, time.perf_counter() - started,
                          launched.errors, launched.deadlock)

    hosts = parse_hosts_file(config.hosts_path)
    if len(hosts) != config.np:
        raise ConfigError(f"hosts file lists {len(hosts)} ranks but --np is {config.np}")
    endpoint = connect_tcp(config.rank, hosts)
    logger.info(f"rank {config.rank} joined tcp mesh of {config.np}")
    errors = {}
    result = Maybe.absent()
    try:
        result = Maybe.of(program(world(endpoint)))
    except Exception as e:
        logger.error(f"rank {config.rank} failed: {type(e).__name__}: {str(e)}")
        errors[config.rank] = e
    finally:
        ledger = endpoint.ledger.snapshot()
        endpoint.close()
    return RunOutcome(config, [result], ledger, time.perf_counter() - started, errors)
