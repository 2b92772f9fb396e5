"""
Benchmark programs with built-in serial oracles: pi, seed agreement,
ordered matrix-product reduction, and 2D-blocked Floyd-Warshall.

Rank programs take the world GroupView and return Maybe results (present at
the root only for reductions). BenchRunner runs them through the runtime,
checks each against its serial oracle and hands the numbers to report_emit.
"""

import math
import time
import struct
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from . import groups
from .config import BENCH_SETTINGS
from .costmodel import check_against, predicted_time
from .dpd import DistGrid, DistSeq, DistVal, GridShape, Lazy, force
from .errors import DistError, OracleMismatch
from .groups import BinaryOp
from .maybe import NOTHING, Maybe
from .report import report_emit
from .runtime import RunConfig, run
from .serialization import FLOAT64, FLOAT64_ARRAY, INT64, PICKLE, Codec

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# data types

@dataclass(frozen=True)
class DenseMatrix:
    """rows x cols matrix stored as a flat row-major float64 array"""
    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64).reshape(-1)
        if data.size != self.rows * self.cols:
            raise DistError(f"matrix data has {data.size} values for {self.rows}x{self.cols}")
        object.__setattr__(self, 'data', data)

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array, dtype=np.float64)
        return cls(array.shape[0], array.shape[1], array.reshape(-1))

    @classmethod
    def identity(cls, k):
        return cls.from_array(np.eye(k))

    def as_array(self):
        return self.data.reshape(self.rows, self.cols)

    def allclose(self, other, rtol=BENCH_SETTINGS['matrix_rtol']):
        return (self.rows, self.cols) == (other.rows, other.cols) and \
            np.allclose(self.data, other.data, rtol=rtol, atol=rtol)

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and np.array_equal(self.data, other.data)

    __hash__ = None


class DenseMatrixCodec(Codec):
    name = 'dense-matrix'

    def encode(self, value):
        return struct.pack('<II', value.rows, value.cols) + value.data.astype('<f8').tobytes()

    def decode(self, payload):
        rows, cols = struct.unpack_from('<II', payload)
        data = np.frombuffer(payload, dtype='<f8', offset=8).astype(np.float64)
        return DenseMatrix(rows, cols, data)


DENSE_MATRIX = DenseMatrixCodec()


def matmul_naive(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Plain triple loop over the flat row-major arrays."""
    if a.cols != b.rows:
        raise DistError(f"dimension mismatch: {a.rows}x{a.cols} times {b.rows}x{b.cols}")
    n, m, p = a.rows, a.cols, b.cols
    x, y = a.data, b.data
    out = np.zeros(n * p)
    for i in range(n):
        for j in range(p):
            acc = 0.0
            for k in range(m):
                acc += x[i * m + k] * y[k * p + j]
            out[i * p + j] = acc
    return DenseMatrix(n, p, out)


MATMUL = BinaryOp(matmul_naive, commutative=False, codec=DENSE_MATRIX, name='matmul')


def random_matrix(k, seed, index):
    rng = np.random.default_rng([seed, index])
    return DenseMatrix.from_array(rng.uniform(-1.0, 1.0, size=(k, k)))


@dataclass(frozen=True)
class WeightedGraph:
    """n x n edge weights; zero diagonal, +inf for a missing edge"""
    n: int
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.shape != (self.n, self.n):
            raise DistError(f"weight matrix of shape {w.shape} for a graph of {self.n} nodes")
        if np.any(np.diag(w) != 0):
            raise DistError('graph weight matrix must have a zero diagonal')
        object.__setattr__(self, 'w', w)

    @classmethod
    def from_matrix(cls, w):
        w = np.asarray(w, dtype=np.float64)
        return cls(w.shape[0], w)

    @classmethod
    def from_file(cls, path):
        """First line n, then n rows of n whitespace-separated values ("inf" for no edge)."""
        with open(path, 'r') as f:
            first = f.readline().strip()
        try:
            n = int(first)
        except ValueError:
            raise DistError(f"graph file {path} must start with the node count, got '{first}'")
        table = pd.read_csv(path, sep=r'\s+', header=None, skiprows=1, dtype=np.float64)
        if table.shape != (n, n):
            raise DistError(f"graph file {path} declares {n} nodes but holds a {table.shape[0]}x{table.shape[1]} table")
        return cls(n, table.to_numpy())

    def to_file(self, path):
        with open(path, 'w') as f:
            f.write(f"{self.n}\n")
            for row in self.w:
                f.write(' '.join('inf' if math.isinf(v) else repr(float(v)) for v in row) + '\n')

    @classmethod
    def random(cls, n, seed, density=BENCH_SETTINGS['graph_density'],
               weight_range=BENCH_SETTINGS['graph_weight_range']):
        rng = np.random.default_rng(seed)
        low, high = weight_range
        w = np.where(rng.random((n, n)) < density, rng.uniform(low, high, size=(n, n)), np.inf)
        np.fill_diagonal(w, 0.0)
        return cls(n, w)


# ---------------------------------------------------------------------------
# pi (midpoint rule for the integral of 4/(1+x^2) over [0, 1])

def _f(x):
    return 4.0 / (1.0 + x * x)


def _midpoint(n):
    return lambda i: (i - 0.5) / n


def _compose(f, g):
    return lambda x: f(g(x))


def pi_serial(n):
    ff = _midpoint(n)
    total = 0.0
    for x in range(1, n + 1):
        total += _f(ff(x))
    return total / n


def pi_parallel(world, n, blocked=False) -> Maybe:
    """
    One sample per PE (n <= p), averaged at the root. With blocked=True each PE
    sums a contiguous chunk of samples instead, so n may exceed p.
    """
    if n < 1:
        raise DistError(f"pi needs at least one sample, got {n}")
    if not blocked:
        if n > world.size:
            raise DistError(f"insufficient processing elements: {n} samples on {world.size} PEs "
                            f"(use the blocked variant)")
        return DistSeq.ranged(world, 1, n).map_d(_compose(_f, _midpoint(n))).avg_d(FLOAT64)

    chunks = min(world.size, n)
    ff = _midpoint(n)

    def chunk(i):
        return range(i * n // chunks + 1, (i + 1) * n // chunks + 1)

    def chunk_sum(xs):
        total = 0.0
        for x in xs:
            total += _f(ff(x))
        return total

    seq = DistSeq.tabulate(world, chunks, chunk).map_d(chunk_sum)
    return seq.sum_d(FLOAT64).map(lambda s: s / n)


# ---------------------------------------------------------------------------
# seed agreement

def seed_agreement(world, clock=time.time_ns) -> Maybe:
    """Every rank proposes clock(); all agree on the minimum via one all-min."""
    return DistVal.of(world, int(clock())).all_min_d(INT64)


def seed_agreement_via_apply(world, clock=time.time_ns) -> Maybe:
    """Alternative: take whatever the PE holding index 0 proposes."""
    return DistSeq.tabulate(world, world.size, lambda i: int(clock())).apply_d(0, INT64)


# ---------------------------------------------------------------------------
# ordered matrix-product reduction

@dataclass
class MatrixReduceResult:
    tree: Maybe
    linear: Maybe
    t_lambda: float


def matrix_reduce_bench(world, k, seed=0, p_mats=None) -> MatrixReduceResult:
    """
    The first p_mats PEs (every PE by default) own one k x k matrix each,
    created lazily by its holder. The ordered product M_0 M_1 ... M_{p_mats-1}
    is computed twice: by the tree reduce and by the linear baseline, so both
    ledgers can be compared. PEs past p_mats return absent results.
    """
    p_mats = world.size if p_mats is None else p_mats
    if not 1 <= p_mats <= world.size:
        raise DistError(f"cannot reduce {p_mats} matrices on {world.size} PEs")
    seq = DistSeq.tabulate(world, p_mats, lambda i: Lazy(lambda: random_matrix(k, seed, i))).map_d(force)
    if not seq.is_holder:
        return MatrixReduceResult(NOTHING, NOTHING, 0.0)
    mine = seq.value.get()
    started = time.perf_counter()
    matmul_naive(mine, mine)
    t_lambda = time.perf_counter() - started
    tree = seq.reduce_d(MATMUL)
    linear = groups.linear_reduce(seq.seq_group(), mine, MATMUL)
    return MatrixReduceResult(tree, linear, t_lambda)


def matrix_product_serial(p, k, seed=0):
    product = random_matrix(k, seed, 0)
    for i in range(1, p):
        product = matmul_naive(product, random_matrix(k, seed, i))
    return product


# ---------------------------------------------------------------------------
# Floyd-Warshall

def update_block(block, col, row):
    """block[i][j] = min(block[i][j], col[i] + row[j]) without touching the input."""
    return np.minimum(block, col[:, None] + row[None, :])


def floyd_warshall_serial(w):
    d = np.array(w, dtype=np.float64)
    for k in range(d.shape[0]):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def floyd_warshall_levels(w):
    """Yield (k, d^k) after every iteration of the serial algorithm."""
    d = np.array(w, dtype=np.float64)
    for k in range(d.shape[0]):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
        yield k, d


MERGE_BLOCKS = BinaryOp(lambda a, b: {**a, **b}, commutative=True, codec=PICKLE, name='merge_blocks')


def _assemble(parts: Dict[Tuple[int, int], np.ndarray], q, bs):
    out = np.empty((q * bs, q * bs))
    for (i, j), block in parts.items():
        out[i * bs:(i + 1) * bs, j * bs:(j + 1) * bs] = block
    return DenseMatrix.from_array(out)


def floyd_warshall_parallel(world, graph: WeightedGraph, q: int, observer=None) -> Maybe:
    """
    Blocked Floyd-Warshall on a q x q DistGrid. In iteration k the block row
    k // BS broadcasts its row k % BS down every column subgroup and the block
    column k // BS broadcasts its column k % BS across every row subgroup,
    then every block updates locally. The assembled matrix is present at rank 0.
    observer(k, coords, block) is called on each cell after every iteration.
    """
    n = graph.n
    if q < 1 or n % q:
        raise DistError(f"graph of {n} nodes cannot be split into {q}x{q} blocks")
    if world.size < q * q:
        raise DistError(f"insufficient processing elements: {q}x{q} grid on {world.size} PEs")
    bs = n // q
    w = graph.w

    def load(coords, _):
        i, j = coords
        return w[i * bs:(i + 1) * bs, j * bs:(j + 1) * bs].copy()

    grid = DistGrid.of(world, GridShape((q, q))).map_d(load)
    for k in range(n):
        kb, kk = divmod(k, bs)
        # d[k, J-block]: row kk of block (kb, J), broadcast down column J
        k_row = grid.col_seq().map_d(lambda block: block[kk, :]).apply_d(kb, FLOAT64_ARRAY)
        # d[I-block, k]: column kk of block (I, kb), broadcast across row I
        k_col = grid.row_seq().map_d(lambda block: block[:, kk]).apply_d(kb, FLOAT64_ARRAY)
        grid = grid.map_d(lambda coords, block: update_block(block, k_col.get(), k_row.get()))
        if observer is not None:
            grid.local.map(lambda cell: observer(k, cell[0], cell[1]))

    if not grid.local.is_present:
        return NOTHING
    coords, block = grid.local.get()
    gathered = groups.reduce(grid.cells_group(), {coords: block}, MERGE_BLOCKS)
    return gathered.map(lambda parts: _assemble(parts, q, bs))


# ---------------------------------------------------------------------------
# runner

def _relative_delta(value, reference):
    if reference == 0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def _verdict(ok):
    return BENCH_SETTINGS['oracle_match_verdict'] if ok else BENCH_SETTINGS['oracle_mismatch_verdict']


class BenchRunner:
    """
    Runs a bench program under a RunConfig, checks it against its serial
    oracle and emits the report. Ranks without a root result (non-zero TCP
    ranks) skip the oracle and report 'NO RESULT AT THIS RANK'.
    """

    def __init__(self, config: RunConfig):
        self.config = config

    def _root(self, outcome):
        outcome.raise_for_status()
        return outcome.results[0].get_or_else(None) if outcome.results else None

    def _emit(self, program, outcome, fields, checks=()):
        return report_emit(program, outcome, self.config, fields, checks)

    def run_pi(self, n, blocked=None):
        blocked = n > self.config.np if blocked is None else blocked
        outcome = run(self.config, lambda w: pi_parallel(w, n, blocked))
        result = self._root(outcome)
        fields = {'n': n, 'blocked': blocked}
        if result is None or not result.is_present:
            return self._emit('pi', outcome, {**fields, 'verdict': 'NO RESULT AT THIS RANK'})
        value = result.get()
        reference = pi_serial(n)
        delta = _relative_delta(value, reference)
        fields.update(result=value, oracle_delta=delta, pi_error=abs(value - math.pi),
                      verdict=_verdict(delta < BENCH_SETTINGS['float_sum_rtol']))
        return self._emit('pi', outcome, fields, [check_against(outcome.ledger, 'reduce', min(n, self.config.np))])

    def run_seed(self, clock=time.time_ns):
        outcome = run(self.config, lambda w: seed_agreement(w, clock))
        outcome.raise_for_status()
        agreed = {r.get().get() for r in outcome.results if r.is_present and r.get().is_present}
        fields = {'n': self.config.np, 'result': min(agreed) if agreed else None,
                  'oracle_delta': 0 if len(agreed) == 1 else len(agreed) - 1,
                  'verdict': _verdict(len(agreed) == 1)}
        return self._emit('seed', outcome, fields, [check_against(outcome.ledger, 'all_reduce', self.config.np)])

    def run_matreduce(self, k, seed=0, p_mats=None):
        p = self.config.np if p_mats is None else p_mats
        outcome = run(self.config, lambda w: matrix_reduce_bench(w, k, seed, p))
        result = self._root(outcome)
        params = self.config.cost_params
        fields = {'n': k, 'matrices': p}
        if result is None or not result.tree.is_present:
            return self._emit('matreduce', outcome, {**fields, 'verdict': 'NO RESULT AT THIS RANK'})
        reference = matrix_product_serial(p, k, seed)
        tree, linear = result.tree.get(), result.linear.get()
        ok = tree.allclose(reference) and linear.allclose(reference)
        delta = float(np.max(np.abs(tree.data - reference.data))) if tree.data.size else 0.0
        words = k * k + 1
        t_lambda = result.t_lambda
        tree_time = predicted_time('reduce', p, words, params, t_lambda)
        linear_time = predicted_time('linear_reduce', p, words, params, t_lambda)
        tree_rounds = sum(r.rounds for r in outcome.ledger.operations('reduce', p))
        linear_rounds = sum(r.rounds for r in outcome.ledger.operations('linear_reduce', p))
        fields.update(result=f'{k}x{k} product', oracle_delta=delta, verdict=_verdict(ok),
                      tree_rounds=tree_rounds, linear_rounds=linear_rounds,
                      predicted_tree=tree_time, predicted_linear=linear_time,
                      ratio=(tree_time / linear_time) if linear_time else None,
                      t_lambda=t_lambda)
        checks = [check_against(outcome.ledger, 'reduce', p, params=params, t_lambda=t_lambda),
                  check_against(outcome.ledger, 'linear_reduce', p, params=params, t_lambda=t_lambda)]
        return self._emit('matreduce', outcome, fields, checks)

    def run_floyd(self, graph: WeightedGraph, q):
        outcome = run(self.config, lambda w: floyd_warshall_parallel(w, graph, q))
        result = self._root(outcome)
        fields = {'n': graph.n, 'q': q}
        if result is None or not result.is_present:
            return self._emit('floyd', outcome, {**fields, 'verdict': 'NO RESULT AT THIS RANK'})
        reference = floyd_warshall_serial(graph.w)
        got = result.get().as_array()
        ok = np.array_equal(got, reference)
        finite = np.isfinite(reference)
        delta = float(np.max(np.abs(got[finite] - reference[finite]))) if finite.any() else 0.0
        fields.update(result=f'{graph.n}x{graph.n} distances', oracle_delta=delta, verdict=_verdict(ok))
        return self._emit('floyd', outcome, fields, [check_against(outcome.ledger, 'broadcast', q)])


def require_match(report):
    """Raise OracleMismatch unless the report's verdict is a match (or not applicable at this rank)."""
    verdict = report.record.get('verdict')
    if verdict == BENCH_SETTINGS['oracle_mismatch_verdict']:
        raise OracleMismatch(f"{report.record.get('program')}: result disagrees with the serial oracle "
                             f"(delta {report.record.get('oracle_delta')})")
    return report
