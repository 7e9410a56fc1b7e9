"""
Discrete-event simulation core.

Virtual time is measured in packet transmission times. Events are processed in
(time, seq) order; seq is a queue-wide insertion counter, so events sharing a
timestamp run first-in first-out and never by station id.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from macbench.errors import DomainError, SimulationError
from macbench.seeds import MASK64

EVENT_KINDS = ("arrival", "start_tx", "end_tx", "sense", "timer", "slot_boundary")

COMPLETED = "completed"
STARVED = "starved"


@dataclass
class Event:
    time: float
    kind: str
    station_id: int = -1
    detail: str = ""
    action: Optional[Callable] = None
    seq: int = -1
    cancelled: bool = False


class EventQueue:
    """Min-heap of events keyed on (time, seq) with lazy cancellation"""

    def __init__(self):
        self._heap = []
        self._seq = itertools.count()
        self.now = 0.0

    def push(self, event: Event) -> Event:
        if event.kind not in EVENT_KINDS:
            raise SimulationError(f"unknown event kind {event.kind!r}")
        if event.time < self.now or math.isnan(event.time):
            raise SimulationError(
                f"event {event.kind} scheduled at t={event.time} before the clock t={self.now}"
            )
        event.seq = next(self._seq)
        heapq.heappush(self._heap, (event.time, event.seq, event))
        return event

    def _discard_cancelled(self):
        while self._heap and self._heap[0][2].cancelled:
            heapq.heappop(self._heap)

    def peek(self) -> Optional[Event]:
        self._discard_cancelled()
        return self._heap[0][2] if self._heap else None

    def pop(self) -> Optional[Event]:
        self._discard_cancelled()
        if not self._heap:
            return None
        time, _, event = heapq.heappop(self._heap)
        if time < self.now:
            raise SimulationError(f"clock would move backwards: {time} < {self.now}")
        self.now = time
        return event

    def count(self, kind: str) -> int:
        return sum(1 for _, _, event in self._heap if event.kind == kind and not event.cancelled)

    def __bool__(self):
        return self.peek() is not None


def schedule(queue: EventQueue, event: Event) -> Event:
    return queue.push(event)


class Engine:
    def __init__(self, trace: bool = False):
        self.queue = EventQueue()
        self.trace_lines = [] if trace else None
        self.processed = 0
        self._periodic = []

    @property
    def now(self) -> float:
        return self.queue.now

    def schedule(self, time, kind, station_id=-1, detail="", action=None) -> Event:
        return self.queue.push(Event(time=time, kind=kind, station_id=station_id, detail=detail, action=action))

    def cancel(self, event: Optional[Event]):
        if event is not None:
            event.cancelled = True

    def pending(self, kind: str) -> int:
        """Live (uncancelled) events of one kind still waiting in the queue"""
        return self.queue.count(kind)

    def every(self, n_events: int, callback: Callable):
        """Call callback() after every n_events processed events"""
        self._periodic.append((n_events, callback))

    def note(self, kind, station_id=-1, detail=""):
        """Record a trace line at the current time without scheduling anything"""
        if self.trace_lines is not None:
            self.trace_lines.append(f"{self.now:.9g}\t{kind}\t{station_id}\t{detail}")

    def run(self, stop: Callable[[], bool], horizon: Optional[float] = None) -> str:
        """
        Process events until stop() is true or the horizon passes.

        Returns "completed", or "starved" when the queue empties first.
        """
        while not stop():
            upcoming = self.queue.peek()
            if upcoming is None:
                return STARVED
            if horizon is not None and upcoming.time > horizon:
                self.queue.now = max(self.queue.now, horizon)
                return COMPLETED

            event = self.queue.pop()
            self.note(event.kind, event.station_id, event.detail)
            if event.action is not None:
                event.action(event)

            self.processed += 1
            for n_events, callback in self._periodic:
                if self.processed % n_events == 0:
                    callback()
        return COMPLETED


class RandomStream:
    """
    PCG64 stream keyed on (seed, stream_id) through numpy's SeedSequence spawn key.
    Identical (seed, stream_id, draw index) gives an identical value on every platform.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & MASK64
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def random(self) -> float:
        return float(self._gen.random())

    def uniform_open_closed(self, high: float) -> float:
        """Uniform on (0, high]"""
        return high * (1.0 - float(self._gen.random()))

    def exponential(self, mean: float) -> float:
        return float(self._gen.exponential(mean))

    def integer(self, low: int, high: int) -> int:
        """Uniform integer on [low, high], both ends included"""
        return int(self._gen.integers(low, high, endpoint=True))


def next_poisson_arrival(stream: RandomStream, rate_g: float) -> float:
    """Exponential inter-arrival time with mean 1/rate_g"""
    if not rate_g > 0:
        raise DomainError(f"arrival rate must be > 0, got {rate_g}")
    return stream.exponential(1.0 / rate_g)


@dataclass(eq=False)
class Transmission:
    station_id: int
    start: float
    end: float
    kind: str = "data"
    packet: object = None
    tx_id: int = -1
    collided: bool = False
    collided_with: set = field(default_factory=set)

    @property
    def duration(self) -> float:
        return self.end - self.start

    def overlaps(self, other: "Transmission") -> bool:
        # half-open intervals: touching endpoints do not overlap
        return self.start < other.end and other.start < self.end


class Channel:
    """
    Shared medium. A transmission is lost iff any other transmission overlaps any
    part of its [start, end) interval; both sides of an overlap are marked.
    """

    def __init__(self, norm_prop_delay: float = 0.0):
        self.norm_prop_delay = norm_prop_delay
        self.active = []
        self._ids = itertools.count()

    def prune(self, now: float):
        horizon = now - self.norm_prop_delay
        self.active = [tx for tx in self.active if tx.end > horizon]

    def transmit(self, station_id, start, duration, kind="data", packet=None) -> Transmission:
        if not duration > 0:
            raise DomainError(f"transmission duration must be > 0, got {duration}")
        self.prune(start)

        tx = Transmission(station_id, start, start + duration, kind, packet, next(self._ids))
        for other in self.active:
            if tx.overlaps(other):
                tx.collided = other.collided = True
                tx.collided_with.add(other.tx_id)
                other.collided_with.add(tx.tx_id)
        self.active.append(tx)
        return tx

    def sensed_busy(self, at: float) -> bool:
        """Whether any transmission occupied the medium at instant `at`"""
        return any(tx.start <= at < tx.end for tx in self.active)


def channel_transmit(channel: Channel, station_id, start, duration, kind="data") -> Transmission:
    return channel.transmit(station_id, start, duration, kind)


@dataclass
class SimResult:
    metrics: object
    trace: Optional[list] = None


def write_trace(lines, path):
    """Write trace lines as tab-separated text with a header row"""
    with open(path, "w") as f:
        f.write("time\tkind\tstation\tdetail\n")
        for line in lines or []:
            f.write(line + "\n")


def run(config, trace: bool = False, logger=None) -> SimResult:
    """Run one simulation described by a SimConfig"""
    from macbench.protocols import simulate

    engine = Engine(trace=trace)
    metrics = simulate(config, engine=engine, logger=logger)
    return SimResult(metrics=metrics, trace=engine.trace_lines)
