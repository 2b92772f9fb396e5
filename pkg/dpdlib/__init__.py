"""
dpdlib
Distributed memory parallel data structures on top of group communication:
a message-passing transport (seeded in-process simulator or TCP), ordered
collectives over subgroups, DistVal/DistSeq/DistGrid, an alpha-beta cost
model, and benchmark programs with serial oracles.
"""

from .maybe import Maybe, NOTHING, some
from .errors import (
    DpdError, ConfigError, TransportError, StarvedReceiveError, StartupError,
    DeadlockError, GroupError, DistError, OracleMismatch,
)
from .transport import Endpoint, Frame, Mailbox, LaunchOutcome
from .simulator import launch_simulated, DeadlockReport
from .tcp_backend import connect_tcp, launch_tcp_local
from .groups import (
    BinaryOp, CONCAT, GroupView, subgroup, world, reduce, broadcast, all_reduce,
    scan, circular_shift, linear_reduce,
)
from .dpd import (
    DistVal, DistSeq, DistGrid, GridShape, Lazy, should_equal, rank_of, coords_of,
)
from .numeric import Numeric, register_numeric
from .costmodel import CostLedger, CostParams, predicted_time, check_against, ledger_of
from .runtime import RunConfig, RunOutcome, run
from .bench import BenchRunner, DenseMatrix, WeightedGraph
from .routes import register_bench_routes

__all__ = [
    'Maybe', 'NOTHING', 'some',
    'DpdError', 'ConfigError', 'TransportError', 'StarvedReceiveError', 'StartupError',
    'DeadlockError', 'GroupError', 'DistError', 'OracleMismatch',
    'Endpoint', 'Frame', 'Mailbox', 'LaunchOutcome',
    'launch_simulated', 'DeadlockReport', 'connect_tcp', 'launch_tcp_local',
    'BinaryOp', 'CONCAT', 'GroupView', 'subgroup', 'world', 'reduce', 'broadcast',
    'all_reduce', 'scan', 'circular_shift', 'linear_reduce',
    'DistVal', 'DistSeq', 'DistGrid', 'GridShape', 'Lazy', 'should_equal', 'rank_of', 'coords_of',
    'Numeric', 'register_numeric',
    'CostLedger', 'CostParams', 'predicted_time', 'check_against', 'ledger_of',
    'RunConfig', 'RunOutcome', 'run',
    'BenchRunner', 'DenseMatrix', 'WeightedGraph',
    'register_bench_routes',
]
