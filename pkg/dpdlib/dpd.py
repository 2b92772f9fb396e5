"""
Distributed memory Parallel Data structures: DistVal, DistSeq and DistGrid.

DPDs are immutable descriptors held by every rank of a group. A rank whose
local element is absent performs no work in local operations (mapD is a nop
there) and receives absent results from collectives it is not part of.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Generic, Optional, Sequence, Tuple, TypeVar

from . import groups
from .errors import DistError
from .groups import BinaryOp, GroupView
from .maybe import NOTHING, Maybe
from .numeric import numeric_for
from .serialization import PICKLE, Codec

logger = logging.getLogger(__name__)

T = TypeVar('T')

NUMERIC_KINDS = ('sum', 'product', 'min', 'max', 'avg')


class Lazy:
    """Deferred element: the thunk runs on first force() and the value is cached."""

    __slots__ = ('_thunk', '_value', '_forced')

    def __init__(self, thunk):
        self._thunk = thunk
        self._value = None
        self._forced = False

    def force(self):
        if not self._forced:
            self._value = self._thunk()
            self._forced = True
            self._thunk = None
        return self._value

    @property
    def forced(self):
        return self._forced

    def map(self, f):
        return Lazy(lambda: f(self.force()))

    def __repr__(self):
        return f'Lazy({self._value!r})' if self._forced else 'Lazy(<pending>)'


def force(value):
    return value.force() if isinstance(value, Lazy) else value


def should_equal(m: Maybe, expected) -> bool:
    """Present values must equal expected; absent values pass vacuously."""
    return m.map(lambda v: v == expected).get_or_else(True)


def _numeric_fn(kind):
    if kind in ('sum', 'avg'):
        fn = lambda a, b: numeric_for(a).plus(a, b)
    elif kind == 'product':
        fn = lambda a, b: numeric_for(a).times(a, b)
    elif kind == 'min':
        fn = lambda a, b: a if numeric_for(a).compare(a, b) <= 0 else b
    elif kind == 'max':
        fn = lambda a, b: a if numeric_for(a).compare(a, b) >= 0 else b
    else:
        raise DistError(f"unknown numeric reduction '{kind}' (expected one of {', '.join(NUMERIC_KINDS)})")
    return fn


def _numeric_op(fn, kind, value, codec):
    """min and max always commute; sums and products only when the element type says so."""
    commutative = kind in ('min', 'max') or numeric_for(value).commutative
    return BinaryOp(fn, commutative=commutative, codec=codec, name=kind)


class NumericOps:
    """Named shortcuts over numeric_d shared by DistVal and DistSeq"""

    def numeric_d(self, kind, all=False, codec: Codec = PICKLE) -> Maybe:
        raise NotImplementedError

    def sum_d(self, codec=PICKLE):
        return self.numeric_d('sum', False, codec)

    def product_d(self, codec=PICKLE):
        return self.numeric_d('product', False, codec)

    def min_d(self, codec=PICKLE):
        return self.numeric_d('min', False, codec)

    def max_d(self, codec=PICKLE):
        return self.numeric_d('max', False, codec)

    def avg_d(self, codec=PICKLE):
        return self.numeric_d('avg', False, codec)

    def all_sum_d(self, codec=PICKLE):
        return self.numeric_d('sum', True, codec)

    def all_product_d(self, codec=PICKLE):
        return self.numeric_d('product', True, codec)

    def all_min_d(self, codec=PICKLE):
        return self.numeric_d('min', True, codec)

    def all_max_d(self, codec=PICKLE):
        return self.numeric_d('max', True, codec)

    def all_avg_d(self, codec=PICKLE):
        return self.numeric_d('avg', True, codec)


@dataclass(frozen=True)
class DistVal(NumericOps, Generic[T]):
    """One value per group member; reductions over it must be commutative"""
    local: Maybe
    group: GroupView

    def __post_init__(self):
        if self.local.is_present != self.group.is_member:
            raise DistError('DistVal must be present exactly on group members')

    @classmethod
    def of(cls, group: GroupView, value) -> 'DistVal':
        return cls(Maybe.of(value) if group.is_member else NOTHING, group)

    def map_d(self, f) -> 'DistVal':
        return DistVal(self.local.map(f), self.group)

    def _require_commutative(self, op):
        if not op.commutative:
            raise DistError(f"DistVal reductions need a commutative operator, '{op.name}' is not")

    def reduce_d(self, op: BinaryOp) -> Maybe:
        self._require_commutative(op)
        if not self.group.is_member:
            return NOTHING
        return groups.reduce(self.group, self.local.get(), op)

    def all_reduce_d(self, op: BinaryOp) -> Maybe:
        self._require_commutative(op)
        if not self.group.is_member:
            return NOTHING
        return groups.all_reduce(self.group, self.local.get(), op)

    def numeric_d(self, kind, all=False, codec: Codec = PICKLE) -> Maybe:
        fn = _numeric_fn(kind)
        if not self.group.is_member:
            return NOTHING
        value = self.local.get()
        op = _numeric_op(fn, kind, value, codec)
        self._require_commutative(op)
        if all:
            result = groups.all_reduce(self.group, value, op)
        else:
            result = groups.reduce(self.group, value, op)
        if kind == 'avg':
            size = self.group.size
            result = result.map(lambda s: numeric_for(s).to_real(s) / size)
        return result


@dataclass(frozen=True)
class DistSeq(NumericOps, Generic[T]):
    """
    Sequence of `length` elements; element i lives on the member at local index
    index_to_local[i]. `local` holds (index, element) on holders only.
    """
    length: int
    index_to_local: Tuple[int, ...]
    local: Maybe
    group: GroupView

    def __post_init__(self):
        if len(self.index_to_local) != self.length:
            raise DistError(f"mapping has {len(self.index_to_local)} entries for a sequence of {self.length}")
        if len(set(self.index_to_local)) != self.length:
            raise DistError('index to rank mapping must be one-to-one')
        if self.group.size and (self.length > self.group.size
                                or any(not 0 <= l < self.group.size for l in self.index_to_local)):
            raise DistError(f"sequence of {self.length} does not fit a group of {self.group.size}")

    # construction

    @classmethod
    def _build(cls, group, n, element_of, index_to_local):
        if n > group.size:
            raise DistError(f"insufficient processing elements: sequence of {n} on {group.size} PEs")
        mapping = tuple(range(n)) if index_to_local is None else tuple(int(l) for l in index_to_local)
        local = NOTHING
        if group.is_member and group.local_index in mapping:
            index = mapping.index(group.local_index)
            local = Maybe.of((index, element_of(index)))
        return cls(n, mapping, local, group)

    @classmethod
    def from_list(cls, group: GroupView, items: Sequence, index_to_local=None) -> 'DistSeq':
        return cls._build(group, len(items), lambda i: items[i], index_to_local)

    @classmethod
    def tabulate(cls, group: GroupView, n: int, f: Callable[[int], T], index_to_local=None) -> 'DistSeq':
        """Element i is f(i), evaluated by its holder only."""
        return cls._build(group, n, f, index_to_local)

    @classmethod
    def ranged(cls, group: GroupView, lo: int, hi: int) -> 'DistSeq':
        """Inclusive range lo..hi; index i holds lo + i."""
        if hi < lo:
            raise DistError(f"empty range {lo}..{hi}")
        return cls._build(group, hi - lo + 1, lambda i: lo + i, None)

    # descriptor helpers

    @property
    def value(self) -> Maybe:
        return self.local.map(lambda e: e[1])

    @property
    def index(self) -> Maybe:
        return self.local.map(lambda e: e[0])

    @property
    def is_holder(self):
        return self.local.is_present

    def owner_local(self, i):
        return self.index_to_local[i]

    def _with_value(self, value: Maybe) -> 'DistSeq':
        local = NOTHING if not value.is_present else Maybe.of((self.index.get(), value.get()))
        return DistSeq(self.length, self.index_to_local, local, self.group)

    def seq_group(self) -> GroupView:
        """Subgroup of the holders ordered by sequence index."""
        if not self.group.size:
            return self.group
        return groups.subgroup(self.group.endpoint, [self.group.members[l] for l in self.index_to_local])

    def _require_nonempty(self, what):
        if self.length == 0:
            raise DistError(f"{what} of an empty sequence has no value (no identity element)")

    # local operations

    def map_d(self, f) -> 'DistSeq':
        return self._with_value(self.value.map(f))

    def foreach_d(self, f) -> None:
        self.value.map(f)

    def zip_d(self, other: 'DistSeq') -> 'DistSeq':
        if other.length != self.length or other.index_to_local != self.index_to_local:
            raise DistError('zip_d needs sequences with equal length and index mapping')
        if not self.is_holder:
            return self._with_value(NOTHING)
        return self._with_value(Maybe.of((self.value.get(), other.value.get())))

    # collective operations

    def apply_d(self, i: int, codec: Codec = PICKLE) -> Maybe:
        """Element i at every group member (broadcast from its holder)."""
        if not 0 <= i < self.length:
            raise DistError(f"index {i} outside sequence of length {self.length}")
        if not self.group.is_member:
            return NOTHING
        owner = self.owner_local(i)
        payload = self.value if self.group.local_index == owner else NOTHING
        return groups.broadcast(self.group, payload, owner, codec)

    def reduce_d(self, op: BinaryOp) -> Maybe:
        """Ordered reduction by sequence index, present at the holder of index 0."""
        self._require_nonempty('reduce_d')
        if not self.is_holder:
            return NOTHING
        return groups.reduce(self.seq_group(), self.value.get(), op)

    def scan_1d(self, op: BinaryOp) -> 'DistSeq':
        self._require_nonempty('scan_1d')
        if not self.is_holder:
            return self
        return self._with_value(groups.scan(self.seq_group(), self.value.get(), op))

    def shift_d(self, d: int, codec: Codec = PICKLE) -> 'DistSeq':
        """Element i of the result is element (i - d) mod n of this sequence."""
        self._require_nonempty('shift_d')
        if not self.is_holder:
            return self
        return self._with_value(groups.circular_shift(self.seq_group(), self.value.get(), d, codec))

    def numeric_d(self, kind, all=False, codec: Codec = PICKLE) -> Maybe:
        fn = _numeric_fn(kind)
        self._require_nonempty(f'{kind}_d')
        if not self.group.is_member:
            return NOTHING
        n = self.length
        seq_group = self.seq_group()

        def finish(total):
            if kind == 'avg':
                return total.map(lambda s: numeric_for(s).to_real(s) / n)
            return total

        # ordered by index, so a non-commutative element type is fine here
        op = _numeric_op(fn, kind, self.value.get(), codec) if self.is_holder else None
        if all and seq_group.members == self.group.members:
            return finish(groups.all_reduce(self.group, self.value.get(), op))
        total = groups.reduce(seq_group, self.value.get(), op) if self.is_holder else NOTHING
        if not all:
            return finish(total)
        return groups.broadcast(self.group, finish(total), self.owner_local(0), codec)


def dist_seq_from_range(group: GroupView, lo: int, hi: int) -> DistSeq:
    return DistSeq.ranged(group, lo, hi)


def numeric_d(dpd, kind, all=False, codec: Codec = PICKLE) -> Maybe:
    return dpd.numeric_d(kind, all, codec)


@dataclass(frozen=True)
class GridShape:
    """
    Mixed-radix rank layout. axis_order lists the axes from most to least
    significant digit; the identity order is row-major.
    """
    dims: Tuple[int, ...]
    axis_order: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise DistError(f"grid dimensions must be positive, got {list(self.dims)}")
        order = tuple(range(len(dims))) if self.axis_order is None else tuple(self.axis_order)
        if sorted(order) != list(range(len(dims))):
            raise DistError(f"axis order {list(order)} is not a permutation of {len(dims)} axes")
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'axis_order', order)

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def size(self):
        size = 1
        for d in self.dims:
            size *= d
        return size


def rank_of(shape: GridShape, coords: Sequence[int]) -> int:
    if len(coords) != shape.ndim:
        raise DistError(f"expected {shape.ndim} coordinates, got {len(coords)}")
    rank = 0
    for axis in shape.axis_order:
        c = coords[axis]
        if not 0 <= c < shape.dims[axis]:
            raise DistError(f"coordinate {c} outside dimension {axis} of extent {shape.dims[axis]}")
        rank = rank * shape.dims[axis] + c
    return rank


def coords_of(shape: GridShape, rank: int) -> Tuple[int, ...]:
    if not 0 <= rank < shape.size:
        raise DistError(f"rank {rank} outside grid of {shape.size} cells")
    coords = [0] * shape.ndim
    for axis in reversed(shape.axis_order):
        rank, coords[axis] = divmod(rank, shape.dims[axis])
    return tuple(coords)


@dataclass(frozen=True)
class DistGrid(Generic[T]):
    """Cell r of the shape lives on the member at local index r; local holds (coords, value)."""
    shape: GridShape
    local: Maybe
    group: GroupView

    def __post_init__(self):
        if self.shape.size > self.group.size:
            raise DistError(f"grid of {self.shape.size} cells needs at least as many PEs, got {self.group.size}")

    @classmethod
    def of(cls, group: GroupView, shape: GridShape) -> 'DistGrid':
        """Every cell starts out holding its own coordinates."""
        local = NOTHING
        if group.is_member and group.local_index < shape.size:
            coords = coords_of(shape, group.local_index)
            local = Maybe.of((coords, coords))
        return cls(shape, local, group)

    @property
    def coords(self) -> Maybe:
        return self.local.map(lambda c: c[0])

    @property
    def value(self) -> Maybe:
        return self.local.map(lambda c: c[1])

    def cell_rank(self, coords) -> int:
        return self.group.members[rank_of(self.shape, coords)]

    def cells_group(self) -> GroupView:
        return groups.subgroup(self.group.endpoint, self.group.members[:self.shape.size])

    def map_d(self, f) -> 'DistGrid':
        """f(coords, value) on every cell; zero messages."""
        local = self.local.map(lambda c: (c[0], f(c[0], c[1])))
        return DistGrid(self.shape, local, self.group)

    def _line_seq(self, axis):
        if self.shape.ndim != 2:
            raise DistError(f"row/column sequences need a 2-dimensional grid, got {self.shape.ndim} dimensions")
        extent = self.shape.dims[axis]
        mapping = tuple(range(extent))
        if not self.local.is_present:
            return DistSeq(extent, mapping, NOTHING, groups.inert_group(self.group.endpoint))
        coords, value = self.local.get()
        line = []
        for c in range(extent):
            cell = list(coords)
            cell[axis] = c
            line.append(self.cell_rank(cell))
        sub = groups.subgroup(self.group.endpoint, line)
        return DistSeq(extent, mapping, Maybe.of((coords[axis], value)), sub)

    def row_seq(self) -> DistSeq:
        """The caller's row (i, 0..d1-1) as a sequence indexed by column."""
        return self._line_seq(1)

    def col_seq(self) -> DistSeq:
        """The caller's column (0..d0-1, j) as a sequence indexed by row."""
        return self._line_seq(0)


def grid_row_seq(grid: DistGrid) -> DistSeq:
    return grid.row_seq()


def grid_col_seq(grid: DistGrid) -> DistSeq:
    return grid.col_seq()


def grid_map_d(grid: DistGrid, f) -> DistGrid:
    return grid.map_d(f)
