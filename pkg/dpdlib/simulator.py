"""
Deterministic in-process backend.

Every logical PE runs on its own thread, but only one thread holds the baton
at a time. A seeded scheduler passes the baton at every send and receive, so
the interleaving is pseudo-random yet fully reproducible from the seed.
Delivery is instantaneous; modeled time lives in the cost model.

When no rank is runnable the scheduler inspects the blocked ranks: a receive
waiting on a rank that has already finished is failed as starved, and if
every blocked rank waits on another blocked rank the run ends with a
deadlock report.
"""

import random
import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .config import SIMULATOR_SETTINGS
from .errors import DpdError, StarvedReceiveError
from .maybe import NOTHING, Maybe
from .transport import Endpoint, LaunchOutcome, Mailbox

logger = logging.getLogger(__name__)

RUNNABLE = 'runnable'
BLOCKED = 'blocked'
DONE = 'done'


class SimulationAborted(BaseException):
    """Unwinds rank threads after a deadlock; not catchable as Exception by user programs"""


@dataclass
class DeadlockReport:
    blocked: Dict[int, Tuple[int, int]]
    finished: List[int] = field(default_factory=list)

    def describe(self):
        waits = ', '.join(f"rank {r} waits on (src={src}, tag={tag})"
                          for r, (src, tag) in sorted(self.blocked.items()))
        return f"deadlock: {len(self.blocked)} blocked rank(s): {waits}"


class SimulatedWorld:
    """Scheduler and shared state for one simulated execution"""

    def __init__(self, world_size, seed):
        if world_size < 1:
            raise DpdError(f"simulation needs at least one rank, got {world_size}")
        if world_size > SIMULATOR_SETTINGS['max_ranks']:
            raise DpdError(f"simulation limited to {SIMULATOR_SETTINGS['max_ranks']} ranks, got {world_size}")
        self.world_size = world_size
        self.seed = seed
        self._rng = random.Random(seed)
        self._batons = [threading.Semaphore(0) for _ in range(world_size)]
        self._state = [RUNNABLE] * world_size
        self._waiting_on: Dict[int, Tuple[int, int]] = {}
        self._starved = set()
        self._runnable = list(range(world_size))
        self._slot = list(range(world_size))
        self._aborted = False
        self._finished = threading.Event()
        self.deadlock: Optional[DeadlockReport] = None
        self.endpoints = [SimulatedEndpoint(self, rank) for rank in range(world_size)]

    # runnable set with O(1) insert/remove; order is deterministic for a given seed
    def _make_runnable(self, rank):
        self._state[rank] = RUNNABLE
        self._slot[rank] = len(self._runnable)
        self._runnable.append(rank)

    def _remove_runnable(self, rank, new_state):
        slot = self._slot[rank]
        last = self._runnable.pop()
        if last != rank:
            self._runnable[slot] = last
            self._slot[last] = slot
        self._state[rank] = new_state

    def _pick_next(self):
        while True:
            if self._runnable:
                return self._runnable[self._rng.randrange(len(self._runnable))]
            blocked = sorted(self._waiting_on)
            if not blocked:
                return None
            starved = [r for r in blocked if self._state[self._waiting_on[r][0]] == DONE]
            if starved:
                for rank in starved:
                    self._starved.add(rank)
                    self._make_runnable(rank)
                continue
            self.deadlock = DeadlockReport(
                blocked={r: self._waiting_on[r] for r in blocked},
                finished=[r for r in range(self.world_size) if self._state[r] == DONE])
            logger.warning(f"simulation seed={self.seed}: {self.deadlock.describe()}")
            return None

    def _pass_baton(self, rank):
        """Hand control to the scheduler's choice; returns once rank is scheduled again."""
        nxt = self._pick_next()
        if nxt == rank:
            return
        if nxt is None:
            self._stop()
        else:
            self._batons[nxt].release()
        self._wait_turn(rank)

    def _wait_turn(self, rank):
        self._batons[rank].acquire()
        if self._aborted:
            raise SimulationAborted()

    def _stop(self):
        if self.deadlock is not None:
            self._aborted = True
            for r in self._waiting_on:
                self._batons[r].release()
        self._finished.set()

    def deliver(self, frame):
        self.endpoints[frame.dst].mailbox.put(frame)
        if self._state[frame.dst] == BLOCKED and self._waiting_on.get(frame.dst) == (frame.src, frame.tag):
            del self._waiting_on[frame.dst]
            self._make_runnable(frame.dst)
        self._pass_baton(frame.src)

    def await_frame(self, rank, src, tag):
        mailbox = self.endpoints[rank].mailbox
        self._pass_baton(rank)
        while not mailbox.has(src, tag):
            if rank in self._starved:
                self._starved.discard(rank)
                self._waiting_on.pop(rank, None)
                logger.warning(f"rank {rank}: starved receive from {src} tag {tag}")
                raise StarvedReceiveError(rank, src, tag, f"rank {src} finished without sending")
            self._waiting_on[rank] = (src, tag)
            self._remove_runnable(rank, BLOCKED)
            self._pass_baton(rank)
        # a starved rank can still be served if another rank recovered and sent
        self._starved.discard(rank)
        self._waiting_on.pop(rank, None)
        return mailbox.take(src, tag)

    def run(self, program):
        results: List[Maybe] = [NOTHING] * self.world_size
        errors: Dict[int, BaseException] = {}

        def body(rank):
            try:
                self._wait_turn(rank)
            except SimulationAborted:
                return
            try:
                results[rank] = Maybe.of(program(self.endpoints[rank]))
            except SimulationAborted:
                return
            except Exception as e:
                logger.error(f"rank {rank} failed: {type(e).__name__}: {str(e)}")
                errors[rank] = e
            self._remove_runnable(rank, DONE)
            nxt = self._pick_next()
            if nxt is None:
                self._stop()
            else:
                self._batons[nxt].release()

        previous_stack = threading.stack_size()
        threading.stack_size(SIMULATOR_SETTINGS['thread_stack_bytes'])
        try:
            threads = [threading.Thread(target=body, args=(rank,), name=f'dpd-rank-{rank}', daemon=True)
                       for rank in range(self.world_size)]
            for thread in threads:
                thread.start()
        finally:
            threading.stack_size(previous_stack)

        first = self._pick_next()
        self._batons[first].release()
        self._finished.wait()
        for thread in threads:
            thread.join()

        for endpoint in self.endpoints:
            endpoint.close()
        return LaunchOutcome(
            results=results,
            ledgers=[ep.ledger.snapshot() for ep in self.endpoints],
            errors=errors,
            deadlock=self.deadlock,
            seed=self.seed)


class SimulatedEndpoint(Endpoint):

    def __init__(self, world, rank):
        super().__init__(rank, world.world_size)
        self.world = world
        self.mailbox = Mailbox()

    def _transmit(self, frame):
        self.world.deliver(frame)

    def _collect(self, src, tag):
        return self.world.await_frame(self.rank, src, tag)


def launch_simulated(p, program, seed=None):
    """
    Run program(endpoint) once per rank on p logical PEs inside this process.
    Scheduling is pseudo-random from seed; the outcome holds each rank's result,
    per-rank errors, and a deadlock report if the run went quiescent with blocked ranks.
    """
    seed = SIMULATOR_SETTINGS['default_seed'] if seed is None else seed
    logger.debug(f"launching simulated run p={p} seed={seed}")
    world = SimulatedWorld(p, seed)
    return world.run(program)
