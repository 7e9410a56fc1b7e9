"""
Frame-level delay decompositions and the throughput-from-delay rule.

Each technique's per-frame delay is a sum of named components (seconds).
Throughput is 8 * payload_bytes / total delay, in bits per second: the payload
size x is taken in bytes.

Derived components:
    T_data = N_data / f_c, T_ack = N_ack / f_c, T_oh = N_oh / f_c, T_syn = N_syn / f_c
    T_bo   = bo_slots * T_boslots
    T_ta   = T_data + T_ack (or the override); 0 when no ACK is used (N_ack = 0)
    T_ifs  = T_data - T_ack (or the override)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from macbench.errors import DomainError

FRAME_TECHNIQUES = ("csma_ca", "tdma", "fdma", "pure_aloha", "slotted_aloha")


class FrameTiming(BaseModel):
    """Frame component bit counts and durations; defaults are a low-rate body-area radio"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    data_rate: float = Field(250_000.0, gt=0)
    n_overhead_bits: float = Field(48, ge=0)
    n_ack_bits: float = Field(88, ge=0)
    n_sync_bits: float = Field(40, ge=0)
    n_data_bits: float = Field(1016, ge=0)
    guard_time: float = Field(100e-6, ge=0)
    turnaround_time_override: Optional[float] = Field(None, ge=0)
    ifs_override: Optional[float] = Field(None, ge=0)
    backoff_slots: float = Field(4, ge=0)
    backoff_slot_time: float = Field(320e-6, ge=0)
    rts_time: float = Field(352e-6, ge=0)
    cts_time: float = Field(352e-6, ge=0)
    idle_time: float = Field(200e-6, ge=0)
    slot_boundary_wait: float = Field(256e-6, ge=0)
    queue_time: float = Field(2e-3, ge=0)
    payload_bytes: float = Field(127, gt=0)

    def with_updates(self, **updates) -> "FrameTiming":
        return FrameTiming.model_validate({**self.model_dump(), **updates})

    @property
    def data_time(self) -> float:
        return self.n_data_bits / self.data_rate

    @property
    def ack_time(self) -> float:
        return self.n_ack_bits / self.data_rate

    @property
    def overhead_time(self) -> float:
        return self.n_overhead_bits / self.data_rate

    @property
    def sync_time(self) -> float:
        return self.n_sync_bits / self.data_rate

    @property
    def backoff_time(self) -> float:
        return self.backoff_slots * self.backoff_slot_time

    @property
    def turnaround_time(self) -> float:
        if self.turnaround_time_override is not None:
            return self.turnaround_time_override
        if self.n_ack_bits == 0:
            return 0.0
        return self.data_time + self.ack_time

    @property
    def ifs_time(self) -> float:
        if self.ifs_override is not None:
            return self.ifs_override
        ifs = self.data_time - self.ack_time
        if ifs < 0:
            raise DomainError(
                f"negative inter-frame space T_ifs = T_data - T_ack: "
                f"T_data={self.data_time:g}s < T_ack={self.ack_time:g}s"
            )
        return ifs


@dataclass(frozen=True)
class DelayBreakdown:
    technique: str
    components: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return math.fsum(self.components.values())


def csmaca_frame_delay(ft: FrameTiming) -> DelayBreakdown:
    """Backoff + data + turnaround + ACK + IFS + RTS + CTS."""
    return DelayBreakdown("csma_ca", {
        "backoff": ft.backoff_time,
        "data": ft.data_time,
        "turnaround": ft.turnaround_time,
        "ack": ft.ack_time,
        "ifs": ft.ifs_time,
        "rts": ft.rts_time,
        "cts": ft.cts_time,
    })


def tdma_frame_delay(ft: FrameTiming) -> DelayBreakdown:
    """Overhead + ACK + guard + sync + turnaround."""
    return DelayBreakdown("tdma", {
        "overhead": ft.overhead_time,
        "ack": ft.ack_time,
        "guard": ft.guard_time,
        "sync": ft.sync_time,
        "turnaround": ft.turnaround_time,
    })


def fdma_frame_delay(ft: FrameTiming) -> DelayBreakdown:
    """Overhead + ACK + guard + turnaround + data."""
    return DelayBreakdown("fdma", {
        "overhead": ft.overhead_time,
        "ack": ft.ack_time,
        "guard": ft.guard_time,
        "turnaround": ft.turnaround_time,
        "data": ft.data_time,
    })


def aloha_frame_delay(ft: FrameTiming) -> DelayBreakdown:
    # no retransmission term; the analytic delay relations carry that
    return DelayBreakdown("pure_aloha", {
        "data": ft.data_time,
        "queue": ft.queue_time,
    })


def saloha_frame_delay(ft: FrameTiming) -> DelayBreakdown:
    """ACK + sync + turnaround + idle + slot-boundary wait."""
    return DelayBreakdown("slotted_aloha", {
        "ack": ft.ack_time,
        "sync": ft.sync_time,
        "turnaround": ft.turnaround_time,
        "idle": ft.idle_time,
        "slot_boundary_wait": ft.slot_boundary_wait,
    })


FRAME_DELAYS = {
    "csma_ca": csmaca_frame_delay,
    "tdma": tdma_frame_delay,
    "fdma": fdma_frame_delay,
    "pure_aloha": aloha_frame_delay,
    "slotted_aloha": saloha_frame_delay,
}


def frame_delay(technique: str, ft: FrameTiming) -> DelayBreakdown:
    if technique not in FRAME_DELAYS:
        raise DomainError(f"no frame decomposition for technique {technique!r}")
    return FRAME_DELAYS[technique](ft)


def throughput_from_delay(payload_bytes: float, total_delay: float) -> float:
    """Bits per second carried by one frame of payload_bytes taking total_delay seconds."""
    if payload_bytes <= 0:
        raise DomainError(f"payload size must be > 0 bytes, got {payload_bytes}")
    if total_delay <= 0:
        raise DomainError(f"total delay must be > 0 s, got {total_delay}")
    return 8.0 * payload_bytes / total_delay


def rank_techniques(ft: FrameTiming) -> list:
    """All five techniques as (technique, bits/s), best first; ties alphabetical"""
    results = [
        (technique, throughput_from_delay(ft.payload_bytes, frame_delay(technique, ft).total))
        for technique in FRAME_TECHNIQUES
    ]
    return sorted(results, key=lambda item: (-item[1], item[0]))


def throughput_vs_payload(technique: str, ft: FrameTiming, payload_grid) -> list:
    """
    Throughput (bits/s) for each payload size in bytes, with the data-bit count
    recomputed as 8 * payload so that only T_data (and the terms derived from it)
    track the payload.
    """
    points = []
    for payload in payload_grid:
        sized = ft.with_updates(payload_bytes=payload, n_data_bits=8 * payload)
        total = frame_delay(technique, sized).total
        points.append((float(payload), throughput_from_delay(payload, total)))
    return points
