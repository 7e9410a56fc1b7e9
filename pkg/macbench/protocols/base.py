"""
Shared simulation plumbing for the access-technique state machines: the run
configuration, outcome bookkeeping, traffic sources and the closed-loop load
controller used by the random-access techniques.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import norm

from macbench.des_engine import Channel, Engine, RandomStream, next_poisson_arrival
from macbench.errors import ConfigError

Technique = Literal["pure_aloha", "slotted_aloha", "csma_1p", "csma_ca", "tdma", "fdma"]

ARRIVAL_STREAM = 0
RETRY_STREAM = 1

MIN_MEANINGFUL_PACKETS = 1000
CONTROL_INTERVAL_EVENTS = 1000
CONTROL_ALPHA = 0.2
CONTROL_SETTLE_INTERVALS = 2.0
MIN_NEW_ARRIVAL_FRACTION = 1e-4
MAX_NEW_ARRIVAL_FACTOR = 2.0
DELAY_BATCHES = 20


class SimConfig(BaseModel):
    """One simulation run. Times are in packet transmission times."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    technique: Technique
    offered_load_g: float = Field(..., gt=0)
    norm_prop_delay_a: float = Field(0.01, ge=0)
    n_stations: int = Field(10, ge=1)
    retrans_window_k: float = Field(100.0, gt=0)
    backoff_distribution: Literal["uniform", "exponential"] = "uniform"
    rts_cts_enabled: bool = True
    backoff_window_slots: int = Field(8, ge=1)
    backoff_slot_time: float = Field(0.5, gt=0)
    rts_time: float = Field(0.1, gt=0)
    cts_time: float = Field(0.1, ge=0)
    ack_time: float = Field(0.0, ge=0)
    pkt_len: float = Field(1.0, gt=0)
    cycle_len: float = Field(1.0, gt=0)
    finite_population: bool = False
    closed_loop: bool = True
    stop_packets: int = Field(100_000, ge=0)
    horizon: Optional[float] = Field(None, ge=0)
    seed: int = 42
    warmup_fraction: float = Field(0.1, ge=0, lt=1)

    @model_validator(mode="after")
    def validate_stop_rule(self):
        if self.stop_packets == 0 and self.horizon is None:
            raise ValueError("stop_packets = 0 needs a horizon")
        return self

    def with_updates(self, **updates) -> "SimConfig":
        return SimConfig.model_validate({**self.model_dump(), **updates})

    @property
    def slot_time(self) -> float:
        """TDMA slot / FDMA base service time L/C"""
        return self.pkt_len / self.cycle_len


@dataclass
class Metrics:
    technique: str
    g: float
    seed: int
    status: str = "completed"
    attempted: int = 0
    succeeded: int = 0
    collided: int = 0
    in_flight: int = 0
    rts_collisions: int = 0
    collided_time: float = 0.0
    sim_duration: float = 0.0
    throughput_s: float = 0.0
    attempt_rate: float = 0.0
    utilization: float = 0.0
    mean_delay: float = math.nan
    delay_stddev: float = math.nan
    ci95: tuple = (math.nan, math.nan)
    delays_counted: int = 0

    @property
    def delivery_ratio(self) -> float:
        resolved = self.succeeded + self.collided
        return self.succeeded / resolved if resolved else math.nan

    @property
    def collided_time_fraction(self) -> float:
        return self.collided_time / self.sim_duration if self.sim_duration > 0 else 0.0

    def to_dict(self) -> dict:
        row = asdict(self)
        row["ci_lo"], row["ci_hi"] = row.pop("ci95")
        return row


def delay_confidence_interval(delays, batches: int = DELAY_BATCHES) -> tuple:
    """95% normal-approximation interval for the mean delay, from batch means"""
    values = np.asarray(delays, dtype=float)
    n = len(values)
    if n == 0:
        return (math.nan, math.nan)
    mean = float(values.mean())
    if n < 2:
        return (mean, mean)
    if n >= 2 * batches:
        samples = np.array([chunk.mean() for chunk in np.array_split(values, batches)])
    else:
        samples = values
    half = float(norm.ppf(0.975) * samples.std(ddof=1) / math.sqrt(len(samples)))
    return (mean - half, mean + half)


@dataclass
class Packet:
    pid: int
    station_id: int
    arrival: float
    attempts: int = 0
    last_access: Optional[float] = None
    collided_once: bool = False


class OutcomeCollector:
    """Counts resolved outcomes; rate and delay statistics use the post-warm-up window."""

    def __init__(self, config: SimConfig):
        self.stop_packets = config.stop_packets
        # a horizon run may also end warm-up on the clock, see Protocol.start
        self.warmup_outcomes = int(config.warmup_fraction * config.stop_packets) if config.stop_packets else None
        self.attempted = 0
        self.succeeded = 0
        self.collided = 0
        self.rts_collisions = 0
        self.warm_start = 0.0 if config.warmup_fraction == 0 or self.warmup_outcomes == 0 else None
        self.success_time = 0.0
        self.collided_time = 0.0
        self.window_attempts = 0
        self.delays = []

    @property
    def resolved(self) -> int:
        return self.succeeded + self.collided

    @property
    def warmed_up(self) -> bool:
        return self.warm_start is not None

    def done(self) -> bool:
        return self.stop_packets > 0 and self.resolved >= self.stop_packets

    def _after_outcome(self, now):
        if self.warmup_outcomes is not None and self.resolved >= self.warmup_outcomes:
            self.open_window(now)

    def open_window(self, now):
        """End warm-up at `now` unless it has already ended"""
        if self.warm_start is None:
            self.warm_start = now

    def attempt(self):
        self.attempted += 1
        if self.warmed_up:
            self.window_attempts += 1

    def success(self, packet: Packet, tx, now, weight: float = 1.0):
        if self.warmed_up:
            self.success_time += tx.duration * weight
            self.delays.append(now - packet.arrival)
        self.succeeded += 1
        self._after_outcome(now)

    def collision(self, tx, now, weight: float = 1.0):
        if self.warmed_up:
            self.collided_time += tx.duration * weight
        self.collided += 1
        if tx.kind == "rts":
            self.rts_collisions += 1
        self._after_outcome(now)

    def metrics(self, config: SimConfig, status: str, end_time: float, in_flight: int = 0) -> Metrics:
        start = self.warm_start if self.warm_start is not None else end_time
        duration = max(end_time - start, 0.0)
        delays = np.asarray(self.delays, dtype=float)

        m = Metrics(
            technique=config.technique,
            g=config.offered_load_g,
            seed=config.seed,
            status=status,
            attempted=self.attempted,
            succeeded=self.succeeded,
            collided=self.collided,
            in_flight=in_flight,
            rts_collisions=self.rts_collisions,
            collided_time=self.collided_time,
            sim_duration=duration,
            delays_counted=len(delays),
        )
        if duration > 0:
            m.throughput_s = self.success_time / duration
            m.attempt_rate = self.window_attempts / duration
            m.utilization = (self.success_time + self.collided_time) / duration
        if len(delays):
            m.mean_delay = float(delays.mean())
            m.delay_stddev = float(delays.std(ddof=1)) if len(delays) > 1 else 0.0
            m.ci95 = delay_confidence_interval(delays)
        return m


class LoadController:
    """
    Keeps the total access rate near G by thinning new arrivals:

        new-arrival rate = G - n / tau + (G t - A(t)) / W

    n is the backlog (packets that collided at least once and are not yet
    delivered), tau an exponential moving average of the measured retry cycle
    time, A(t) the number of channel accesses so far and W twice the length of
    the last control interval. The last term pulls the long-run access rate
    onto G.
    """

    def __init__(self, target_g: float, initial_cycle: float, enabled: bool = True):
        self.target_g = target_g
        self.enabled = enabled
        self.cycle_estimate = initial_cycle
        self.backlog = 0
        self.accesses = 0
        self.correction = 0.0
        self._cycle_sum = 0.0
        self._cycle_count = 0
        self._last_refresh = 0.0

    def new_arrival_rate(self) -> float:
        if not self.enabled:
            return self.target_g
        rate = self.target_g - self.backlog / self.cycle_estimate + self.correction
        low = MIN_NEW_ARRIVAL_FRACTION * self.target_g
        return min(max(rate, low), MAX_NEW_ARRIVAL_FACTOR * self.target_g)

    def record_access(self):
        self.accesses += 1

    def record_cycle(self, elapsed: float):
        self._cycle_sum += elapsed
        self._cycle_count += 1

    def refresh(self, now: Optional[float] = None):
        if self._cycle_count:
            measured = self._cycle_sum / self._cycle_count
            self.cycle_estimate = CONTROL_ALPHA * measured + (1 - CONTROL_ALPHA) * self.cycle_estimate
        self._cycle_sum = 0.0
        self._cycle_count = 0

        if now is not None and now > self._last_refresh:
            window = CONTROL_SETTLE_INTERVALS * (now - self._last_refresh)
            self.correction = (self.target_g * now - self.accesses) / window
            self._last_refresh = now


class Protocol:
    """
    Base state machine: traffic source, per-station queues and outcome bookkeeping.

    Infinite population: every arrival is a fresh station. Finite population:
    arrivals pick one of n_stations uniformly and queue there; only the
    head-of-line packet of a station is handed to access().
    """

    technique = ""
    finite = False

    def __init__(self, config: SimConfig, engine: Optional[Engine] = None, logger=None):
        if config.technique != self.technique:
            raise ConfigError(f"{type(self).__name__} cannot run technique {config.technique!r}")
        self.config = config
        self.engine = engine or Engine()
        self.logger = logger
        self.stats = OutcomeCollector(config)
        self.arrivals = RandomStream(config.seed, ARRIVAL_STREAM)
        self.queues = {}
        self._pids = itertools.count()
        self._pending_arrival = None

    # --- traffic ---------------------------------------------------------------

    def arrival_rate(self) -> float:
        return self.config.offered_load_g

    def schedule_arrival(self):
        gap = next_poisson_arrival(self.arrivals, self.arrival_rate())
        self._pending_arrival = self.engine.schedule(
            self.engine.now + gap, "arrival", action=self._on_arrival
        )

    def redraw_arrival(self):
        # exact for exponential gaps: the residual is memoryless
        self.engine.cancel(self._pending_arrival)
        self.schedule_arrival()

    def _on_arrival(self, event):
        pid = next(self._pids)
        if self.finite:
            station = self.arrivals.integer(0, self.config.n_stations - 1)
        else:
            station = pid
        event.station_id = station
        packet = Packet(pid=pid, station_id=station, arrival=self.engine.now)
        self.schedule_arrival()

        if not self.finite:
            self.access(packet)
            return
        queue = self.queues.setdefault(station, deque())
        queue.append(packet)
        self.on_enqueue(packet, queue)

    def on_enqueue(self, packet, queue):
        if len(queue) == 1:
            self.access(packet)

    def access(self, packet: Packet):
        raise NotImplementedError

    # --- outcomes --------------------------------------------------------------

    def start_transmission(self, channel: Channel, packet: Packet, duration, kind="data", on_end=None, note=True):
        self.stats.attempt()
        packet.attempts += 1
        tx = channel.transmit(packet.station_id, self.engine.now, duration, kind, packet)
        if note:
            self.engine.note("start_tx", packet.station_id, f"{kind} pkt={packet.pid}")
        self.engine.schedule(
            tx.end, "end_tx", packet.station_id, f"{kind} pkt={packet.pid}",
            action=partial(on_end or self.on_end_tx, tx),
        )
        return tx

    def on_end_tx(self, tx, event):
        raise NotImplementedError

    def deliver(self, packet: Packet, tx, weight: float = 1.0):
        self.stats.success(packet, tx, self.engine.now, weight)
        if self.finite:
            queue = self.queues[packet.station_id]
            queue.popleft()
            self.on_dequeue(queue)

    def on_dequeue(self, queue):
        if queue:
            self.access(queue[0])

    # --- run -------------------------------------------------------------------

    def start(self):
        self.schedule_arrival()
        cfg = self.config
        if cfg.horizon is not None and not self.stats.warmed_up:
            self.engine.schedule(
                cfg.warmup_fraction * cfg.horizon, "timer", detail="warm-up ends",
                action=lambda event: self.stats.open_window(self.engine.now),
            )

    def run(self) -> Metrics:
        if self.config.stop_packets < MIN_MEANINGFUL_PACKETS and self.logger is not None:
            self.logger.warning(
                f"stop_packets={self.config.stop_packets} is below {MIN_MEANINGFUL_PACKETS}; "
                "statistics will be noisy",
                technique=self.technique, component="simulate",
            )
        self.start()
        status = self.engine.run(stop=self.stats.done, horizon=self.config.horizon)
        # every unresolved attempt still has its end_tx queued
        in_flight = self.engine.pending("end_tx")
        return self.stats.metrics(self.config, status, self.engine.now, in_flight)


class RandomAccessProtocol(Protocol):
    """Contention protocols: collision handling, retry backoff and the load controller"""

    def __init__(self, config: SimConfig, engine: Optional[Engine] = None, logger=None):
        super().__init__(config, engine, logger)
        self.finite = config.finite_population
        self.channel = Channel(config.norm_prop_delay_a)
        self.retries = RandomStream(config.seed, RETRY_STREAM)
        self.station_streams = {}
        self.controller = LoadController(
            target_g=config.offered_load_g,
            initial_cycle=self.mean_backoff() + config.pkt_len,
            enabled=config.closed_loop and not self.finite,
        )

    def arrival_rate(self) -> float:
        if self.finite:
            return self.config.offered_load_g
        return self.controller.new_arrival_rate()

    def start(self):
        super().start()
        if self.controller.enabled:
            self.engine.every(CONTROL_INTERVAL_EVENTS, self._refresh_controller)

    def _refresh_controller(self):
        self.controller.refresh(self.engine.now)
        self.redraw_arrival()

    def stream_for(self, packet: Packet) -> RandomStream:
        if not self.finite:
            return self.retries
        station = packet.station_id
        if station not in self.station_streams:
            self.station_streams[station] = RandomStream(self.config.seed, RETRY_STREAM + 1 + station)
        return self.station_streams[station]

    def mean_backoff(self) -> float:
        return self.config.retrans_window_k / 2.0

    def backoff(self, packet: Packet) -> float:
        stream = self.stream_for(packet)
        if self.config.backoff_distribution == "exponential":
            return stream.exponential(self.config.retrans_window_k / 2.0)
        return stream.uniform_open_closed(self.config.retrans_window_k)

    def note_access(self, packet: Packet):
        """A new or retried packet reaches the channel"""
        now = self.engine.now
        self.controller.record_access()
        if packet.last_access is not None:
            self.controller.record_cycle(now - packet.last_access)
        packet.last_access = now

    def fail(self, packet: Packet, tx):
        self.stats.collision(tx, self.engine.now)
        if not packet.collided_once:
            packet.collided_once = True
            self.controller.backlog += 1

    def deliver(self, packet: Packet, tx, weight: float = 1.0):
        if packet.collided_once:
            self.controller.backlog -= 1
        super().deliver(packet, tx, weight)

    def retry_after(self, delay: float, packet: Packet, action):
        self.engine.schedule(
            self.engine.now + delay, "timer", packet.station_id, f"retry pkt={packet.pid}",
            action=lambda event: action(packet),
        )
