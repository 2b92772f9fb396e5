"""
Ranked endpoints with nonblocking send and blocking, (src, tag)-selective receive.

Backends (simulator.py, tcp_backend.py) subclass Endpoint and implement
_transmit/_collect. Frames on one (src, dst, tag) channel are delivered in
send order; frames that do not match a pending receive are buffered per
endpoint. Send buffering is unbounded: a sender never waits for its receiver,
so a fast producer can grow the receiver's mailbox without limit.
"""

import numbers
import struct
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .config import TRANSPORT_SETTINGS
from .costmodel import CostLedger
from .errors import DeadlockError, TransportError
from .maybe import Maybe

logger = logging.getLogger(__name__)

HEADER = struct.Struct(TRANSPORT_SETTINGS['header_format'])


@dataclass(frozen=True)
class Frame:
    src: int
    dst: int
    tag: int
    payload: bytes = b''

    def encode(self):
        """Header of four little-endian u32 (src, dst, tag, payload length) followed by the payload."""
        return HEADER.pack(self.src, self.dst, self.tag, len(self.payload)) + self.payload


def decode_header(data):
    """Return (src, dst, tag, payload_length) from the first HEADER.size bytes."""
    if len(data) < HEADER.size:
        raise TransportError(f"truncated frame header ({len(data)} of {HEADER.size} bytes)")
    return HEADER.unpack_from(data)


def decode_frame(data):
    src, dst, tag, length = decode_header(data)
    payload = bytes(data[HEADER.size:HEADER.size + length])
    if len(payload) != length:
        raise TransportError(f"truncated frame payload ({len(payload)} of {length} bytes)")
    return Frame(src, dst, tag, payload)


class Mailbox:
    """Per-endpoint buffer of delivered frames, one FIFO per (src, tag)"""

    def __init__(self):
        self._queues = defaultdict(deque)

    def put(self, frame):
        self._queues[(frame.src, frame.tag)].append(frame)

    def take(self, src, tag):
        queue = self._queues.get((src, tag))
        if not queue:
            return None
        frame = queue.popleft()
        if not queue:
            del self._queues[(src, tag)]
        return frame

    def has(self, src, tag):
        return bool(self._queues.get((src, tag)))

    def __len__(self):
        return sum(len(q) for q in self._queues.values())


class Endpoint:
    """
    One processing element: its rank, the world size, and send/receive over a backend.
    Confined to the execution context that uses it.
    """

    def __init__(self, rank, world_size):
        if world_size < 1:
            raise TransportError(f"world size must be at least 1, got {world_size}")
        if not 0 <= rank < world_size:
            raise TransportError(f"rank {rank} outside world of size {world_size}")
        self.rank = rank
        self.world_size = world_size
        self.ledger = CostLedger()
        self.closed = False
        self._sequences = {}
        self._tag_owners = {}

    def send(self, dst, tag, payload=b''):
        """Queue payload for dst and return without waiting for the receiver."""
        self._check_open()
        self._check_rank(dst, 'destination')
        self._check_tag(tag)
        payload = bytes(payload)
        self.ledger.charge_send(len(payload))
        self._transmit(Frame(self.rank, dst, tag, payload))

    def receive(self, src, tag):
        """Block until a frame from (src, tag) is available and return its payload."""
        self._check_open()
        self._check_rank(src, 'source')
        self._check_tag(tag)
        return self._collect(src, tag).payload

    def next_sequence(self, group):
        """Monotone per-group counter used to give each collective a fresh tag."""
        seq = self._sequences.get(group, 0)
        self._sequences[group] = seq + 1
        return seq

    def claim_tag(self, tag, owner):
        """Record owner as the user of tag; returns the first owner ever recorded for it."""
        return self._tag_owners.setdefault(tag, owner)

    def close(self):
        self.closed = True

    def _check_open(self):
        if self.closed:
            raise TransportError(f"endpoint of rank {self.rank} is closed")

    def _check_rank(self, rank, role):
        if isinstance(rank, bool) or not isinstance(rank, numbers.Integral) or not 0 <= rank < self.world_size:
            raise TransportError(f"unknown {role} rank {rank} (world size {self.world_size})")

    @staticmethod
    def _check_tag(tag):
        if not 0 <= tag <= TRANSPORT_SETTINGS['max_tag']:
            raise TransportError(f"tag {tag} is not an unsigned 32-bit integer")

    def _transmit(self, frame):
        raise NotImplementedError

    def _collect(self, src, tag):
        raise NotImplementedError

    def __repr__(self):
        return f'<{type(self).__name__} rank={self.rank}/{self.world_size}>'


@dataclass
class LaunchOutcome:
    """Per-rank results of a multi-rank launch (absent for ranks that failed or deadlocked)"""
    results: List[Maybe]
    ledgers: List[CostLedger]
    errors: Dict[int, BaseException] = field(default_factory=dict)
    deadlock: Optional[Any] = None
    seed: Optional[int] = None

    @property
    def ok(self):
        return self.deadlock is None and not self.errors

    @property
    def ledger(self):
        return CostLedger.merge_all(self.ledgers)

    def values(self):
        """Plain results, with None for ranks without one"""
        return [r.get_or_else(None) for r in self.results]

    def raise_for_status(self):
        if self.errors:
            # first failure in execution order; later ones are usually starved peers
            raise next(iter(self.errors.values()))
        if self.deadlock is not None:
            raise DeadlockError(self.deadlock)
        return self
