"""
Group communication over ordered subgroups of ranks.

All collectives require only associativity of the operator: partial results
are always combined as (left block) op (right block) of adjacent member
ranges, so non-commutative operators such as string concatenation reduce in
member order. Every collective instance draws a fresh tag from a per-group
sequence counter on the endpoint, so back-to-back collectives on one group
cannot cross-match. Tags are 32-bit hashes of (group, sequence); the endpoint
remembers which collective derived each tag, and a second owner of the same
tag raises GroupError.

Non-members (local_index absent) return immediately without sending: absent
from reduce/broadcast/all_reduce, and absent from scan/circular_shift as well.
"""

import zlib
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

from .errors import GroupError
from .maybe import NOTHING, Maybe
from .serialization import PICKLE, UTF8, Codec
from .utils import ceil_log2

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BinaryOp:
    """A pure (T, T) -> T function plus its algebraic class and wire codec"""
    fn: Callable
    commutative: bool = False
    codec: Codec = PICKLE
    name: str = 'op'

    def __call__(self, a, b):
        return self.fn(a, b)


CONCAT = BinaryOp(lambda a, b: a + b, commutative=False, codec=UTF8, name='concat')


def collective_tag(key, seq):
    """Wire tag of the seq-th collective of the group with this key."""
    return zlib.crc32(f'{key}:{seq}'.encode('ascii'))


@dataclass(frozen=True)
class GroupView:
    """
    Ordered subgroup of global ranks as seen from one rank. Every member holds
    the same members tuple; local_index is the caller's position (None for
    non-members).
    """
    members: Tuple[int, ...]
    local_index: Optional[int]
    endpoint: object = field(repr=False, compare=False)

    @property
    def size(self):
        return len(self.members)

    @property
    def is_member(self):
        return self.local_index is not None

    @property
    def key(self):
        """Stable identifier shared by all members (crc32 of the member list)"""
        return zlib.crc32(','.join(map(str, self.members)).encode('ascii'))

    def _next_tag(self):
        seq = self.endpoint.next_sequence(self.members)
        tag = collective_tag(self.key, seq)
        owner = self.endpoint.claim_tag(tag, (self.members, seq))
        if owner != (self.members, seq):
            raise GroupError(f"collective {seq} of group {list(self.members)} derives tag {tag}, "
                             f"already taken by collective {owner[1]} of group {list(owner[0])}")
        return tag, seq

    def _send(self, local_dst, tag, value, codec):
        self.endpoint.send(self.members[local_dst], tag, codec.encode(value))

    def _receive(self, local_src, tag, codec):
        return codec.decode(self.endpoint.receive(self.members[local_src], tag))


def subgroup(ep, member_ranks: Sequence[int]) -> GroupView:
    """
    Build the caller's view of an ordered subgroup. Purely local: every rank
    computes the same members list from the program's own data.
    """
    members = tuple(int(r) for r in member_ranks)
    if len(set(members)) != len(members):
        raise GroupError(f"duplicate ranks in subgroup {list(members)}")
    bad = [r for r in members if not 0 <= r < ep.world_size]
    if bad:
        raise GroupError(f"ranks {bad} outside world of size {ep.world_size}")
    local_index = members.index(ep.rank) if ep.rank in members else None
    return GroupView(members, local_index, ep)


def world(ep) -> GroupView:
    """The group of all ranks in rank order."""
    return subgroup(ep, range(ep.world_size))


def inert_group(ep) -> GroupView:
    """Empty view for ranks that belong to no group of a DPD."""
    return GroupView((), None, ep)


def _check_local(g, local_index, role):
    if not 0 <= local_index < g.size:
        raise GroupError(f"{role} local index {local_index} outside group of size {g.size}")


def _tree_reduce(g, value, op, tag, record, step_base=0, observer=None):
    """Inverse recursive doubling to local index 0; returns the caller's final partial."""
    r = g.local_index
    q = g.size
    for i in range(ceil_log2(q)):
        m = 1 << i
        if r % (2 * m) == 0:
            if r + m < q:
                record.mark_step(step_base + i)
                value = op(value, g._receive(r + m, tag, op.codec))
                if observer is not None:
                    observer(i, value)
        else:
            # r % (2m) == m: ranks that are not multiples of 2m left the tree earlier
            record.mark_step(step_base + i)
            g._send(r - m, tag, value, op.codec)
            return NOTHING
    return Maybe.of(value)


def _tree_broadcast(g, value, root, tag, codec, record, step_base=0):
    """Recursive doubling from root over virtual ranks v = (i - root) mod q."""
    q = g.size
    v = (g.local_index - root) % q
    rounds = ceil_log2(q)
    for step, i in enumerate(reversed(range(rounds))):
        m = 1 << i
        if v % (2 * m) == 0:
            if v + m < q:
                record.mark_step(step_base + step)
                g._send((v + m + root) % q, tag, value, codec)
        elif v % (2 * m) == m:
            record.mark_step(step_base + step)
            value = g._receive((v - m + root) % q, tag, codec)
    return value


def reduce(g: GroupView, value, op: BinaryOp, root_local_index: int = 0, observer=None) -> Maybe:
    """
    Ordered reduction value_0 op value_1 op ... op value_{q-1}, present at the
    root only. A root other than 0 costs one extra message from local 0.
    observer(step, partial) is called on the caller after each round in which
    it combined a received partial.
    """
    if not g.is_member:
        return NOTHING
    _check_local(g, root_local_index, 'root')
    tag, seq = g._next_tag()
    with g.endpoint.ledger.collective((g.key, seq), 'reduce', g.size, root_local_index) as record:
        result = _tree_reduce(g, value, op, tag, record, observer=observer)
        if root_local_index == 0 or g.size == 1:
            return result
        hop = ceil_log2(g.size)
        if g.local_index == 0:
            record.mark_step(hop)
            g._send(root_local_index, tag, result.get(), op.codec)
            return NOTHING
        if g.local_index == root_local_index:
            record.mark_step(hop)
            return Maybe.of(g._receive(0, tag, op.codec))
        return NOTHING


def broadcast(g: GroupView, value: Maybe, root_local_index: int = 0, codec: Codec = PICKLE) -> Maybe:
    """Every member returns the root's value; the root passes it as a present Maybe."""
    if not g.is_member:
        return NOTHING
    _check_local(g, root_local_index, 'root')
    if g.local_index == root_local_index and not value.is_present:
        raise GroupError('broadcast without payload')
    tag, seq = g._next_tag()
    with g.endpoint.ledger.collective((g.key, seq), 'broadcast', g.size, root_local_index) as record:
        payload = value.get_or_else(None) if g.local_index == root_local_index else None
        return Maybe.of(_tree_broadcast(g, payload, root_local_index, tag, codec, record))


def all_reduce(g: GroupView, value, op: BinaryOp) -> Maybe:
    """Ordered reduction delivered to every member: reduce to local 0, then broadcast."""
    if not g.is_member:
        return NOTHING
    tag, seq = g._next_tag()
    with g.endpoint.ledger.collective((g.key, seq), 'all_reduce', g.size) as record:
        partial = _tree_reduce(g, value, op, tag, record)
        total = partial.get_or_else(None) if g.local_index == 0 else None
        return Maybe.of(_tree_broadcast(g, total, 0, tag, op.codec, record, step_base=ceil_log2(g.size)))


def scan(g: GroupView, value, op: BinaryOp) -> Maybe:
    """
    Inclusive prefix value_0 op ... op value_i at local index i.

    Hypercube exchange: at dimension d each member swaps its block total with
    partner i xor 2^d. A lower partner's block lies to the left and is
    prepended to both the prefix and the total; a higher partner's block is
    appended to the total only. Partners beyond the group end are skipped,
    which truncates the block without needing an identity element.
    """
    if not g.is_member:
        return NOTHING
    r = g.local_index
    q = g.size
    tag, seq = g._next_tag()
    with g.endpoint.ledger.collective((g.key, seq), 'scan', q) as record:
        prefix = value
        total = value
        for d in range(ceil_log2(q)):
            partner = r ^ (1 << d)
            if partner >= q:
                continue
            record.mark_step(d)
            g._send(partner, tag, total, op.codec)
            other = g._receive(partner, tag, op.codec)
            if partner < r:
                prefix = op(other, prefix)
                total = op(other, total)
            else:
                total = op(total, other)
        return Maybe.of(prefix)


def circular_shift(g: GroupView, value, d: int, codec: Codec = PICKLE) -> Maybe:
    """Member i returns the value of member (i - d) mod q; one send and one receive each."""
    if not g.is_member:
        return NOTHING
    q = g.size
    if q == 1:
        return Maybe.of(value)
    tag, seq = g._next_tag()
    with g.endpoint.ledger.collective((g.key, seq), 'circular_shift', q) as record:
        record.mark_step(0)
        g._send((g.local_index + d) % q, tag, value, codec)
        return Maybe.of(g._receive((g.local_index - d) % q, tag, codec))


def linear_reduce(g: GroupView, value, op: BinaryOp) -> Maybe:
    """
    Sequential reduction at local 0 receiving from 1, 2, ..., q-1 in turn:
    q-1 rounds instead of ceil(log2 q). Baseline for the matrix benchmark.
    """
    if not g.is_member:
        return NOTHING
    tag, seq = g._next_tag()
    with g.endpoint.ledger.collective((g.key, seq), 'linear_reduce', g.size) as record:
        if g.local_index != 0:
            record.mark_step(g.local_index - 1)
            g._send(0, tag, value, op.codec)
            return NOTHING
        for src in range(1, g.size):
            record.mark_step(src - 1)
            value = op(value, g._receive(src, tag, op.codec))
        return Maybe.of(value)
