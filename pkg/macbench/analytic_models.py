"""
Closed-form throughput / delay / offered-load relations for the five access techniques.

All delays are dimensionless multiples of one packet transmission time. Notes
on the forms implemented here:

- CSMA delay vs throughput and pure-ALOHA delay vs load use the same template as
  the pure-ALOHA delay vs throughput relation:
  (e^(kx) - 1) * ((K - 1)/2 + 2a + 1) + 1 + a.
- TDMA "throughput vs load" is the TDMA delay expression with the queue
  occupancy replaced by G (additive form). It is a normalized transfer time,
  not a [0, 1] throughput, and is not rescaled.
- CSMA delay vs load is the CSMA throughput kernel with the packet count L in
  the slot of the normalized propagation delay. It is implemented as printed
  and tagged "as-printed" in curve output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from macbench.errors import DomainError

TECHNIQUES = ("pure_aloha", "slotted_aloha", "csma_1p", "csma_ca", "tdma", "fdma")
RELATIONS = ("d-vs-g", "t-vs-g", "d-vs-t")

TECHNIQUE_ALIASES = {"csma": "csma_1p"}


def canonical_technique(name: str) -> str:
    """Map command-line spellings (pure-aloha, csma, csma-1p) onto technique ids"""
    key = str(name).strip().lower().replace("-", "_")
    key = TECHNIQUE_ALIASES.get(key, key)
    if key not in TECHNIQUES:
        raise DomainError(f"unknown technique {name!r}")
    return key


OfferedLoad = float
NormalizedThroughput = float

# q and K defaults are plotting conveniences, not measured values
DEFAULT_N_NODES = 10
DEFAULT_PKT_LEN = 1.0
DEFAULT_CYCLE_LEN = 1.0
DEFAULT_QUEUE_OCC = 0.5
DEFAULT_NORM_PROP_DELAY = 0.01
DEFAULT_RETRANS_WINDOW = 1.0

AS_PRINTED = "as-printed"


class AnalyticParams(BaseModel):
    """Symbol set shared by the closed-form relations (N, L, C, q, a, K)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_nodes: int = Field(DEFAULT_N_NODES, ge=1)
    pkt_len: float = Field(DEFAULT_PKT_LEN, gt=0)
    cycle_len: float = Field(DEFAULT_CYCLE_LEN, gt=0)
    queue_occ: float = Field(DEFAULT_QUEUE_OCC, ge=0)
    norm_prop_delay: float = Field(DEFAULT_NORM_PROP_DELAY, ge=0)
    retrans_window: float = Field(DEFAULT_RETRANS_WINDOW, ge=1)

    @field_validator("queue_occ")
    @classmethod
    def validate_queue_occ(cls, v):
        if v >= 1:
            raise ValueError("queue occupancy must be below 1 (saturated queue)")
        return v

    def with_updates(self, **updates) -> "AnalyticParams":
        """Validated copy with some fields replaced"""
        return AnalyticParams.model_validate({**self.model_dump(), **updates})

    @property
    def retrans_factor(self) -> float:
        """(K - 1)/2 + 2a + 1, the multiplier shared by the ALOHA/CSMA delay relations"""
        return (self.retrans_window - 1.0) / 2.0 + 2.0 * self.norm_prop_delay + 1.0


@dataclass(frozen=True)
class CurvePoint:
    x: float
    y: float
    relation: str
    technique: str
    note: str = ""


@dataclass(frozen=True)
class Curve:
    """Points of one relation in ascending x, plus the grid values skipped as out of domain."""

    technique: str
    relation: str
    points: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    note: str = ""

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    @property
    def xs(self):
        return [p.x for p in self.points]

    @property
    def ys(self):
        return [p.y for p in self.points]


def _check_load(g: float) -> float:
    if g < 0 or math.isnan(g):
        raise DomainError(f"offered load must be >= 0, got {g}")
    return float(g)


def _check_throughput(s: float) -> float:
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"normalized throughput must lie in [0, 1], got {s}")
    return float(s)


def _check_load_term(x: float) -> float:
    if x < 0 or math.isnan(x):
        raise DomainError(f"load term must be >= 0, got {x}")
    if x >= 1:
        raise DomainError(f"saturated queue: load term {x} >= 1")
    return float(x)


# --- ALOHA family -------------------------------------------------------------

def aloha_throughput(g: OfferedLoad) -> NormalizedThroughput:
    """Pure ALOHA: S = G e^(-2G), peak 1/(2e) at G = 0.5."""
    g = _check_load(g)
    return g * math.exp(-2.0 * g)


def slotted_aloha_throughput(g: OfferedLoad) -> NormalizedThroughput:
    """Slotted ALOHA: S = G e^(-G), peak 1/e at G = 1."""
    g = _check_load(g)
    return g * math.exp(-g)


def _retrans_delay(x: float, rate: float, params: AnalyticParams, constant: float) -> float:
    return (math.exp(rate * x) - 1.0) * params.retrans_factor + constant + params.norm_prop_delay


def aloha_delay_vs_throughput(s: NormalizedThroughput, params: AnalyticParams) -> float:
    s = _check_throughput(s)
    return _retrans_delay(s, 2.0, params, 1.0)


def aloha_delay_vs_load(g: OfferedLoad, params: AnalyticParams) -> float:
    g = _check_load(g)
    return _retrans_delay(g, 1.0, params, 1.0)


def saloha_delay_vs_throughput(s: NormalizedThroughput, params: AnalyticParams) -> float:
    # 1.5 = one packet time plus half a slot of boundary waiting
    s = _check_throughput(s)
    return _retrans_delay(s, 1.0, params, 1.5)


def saloha_delay_vs_load(g: OfferedLoad, params: AnalyticParams) -> float:
    g = _check_load(g)
    return _retrans_delay(g, 1.0, params, 1.5)


def peak_load(technique: str) -> float:
    """Offered load at which the ALOHA throughput relation peaks."""
    peaks = {"pure_aloha": 0.5, "slotted_aloha": 1.0}
    if technique not in peaks:
        raise DomainError(f"no closed-form peak for technique {technique!r}")
    return peaks[technique]


def peak_throughput(technique: str) -> float:
    load = peak_load(technique)
    if technique == "pure_aloha":
        return aloha_throughput(load)
    return slotted_aloha_throughput(load)


# --- CSMA ----------------------------------------------------------------------

def _csma_kernel(g: float, b: float) -> float:
    """1-persistent CSMA throughput kernel, b in the normalized-delay slot."""
    if g == 0.0:
        return 0.0
    numerator = g * (1.0 + g + b * g * (1.0 + g + b * g / 2.0)) * math.exp(-g * (1.0 + 2.0 * b))
    denominator = g * (1.0 + 2.0 * b) - (1.0 - math.exp(-b * g)) + (1.0 + b * g) * math.exp(-g * (1.0 + b))
    return numerator / denominator


def csma_throughput(g: OfferedLoad, a: float) -> NormalizedThroughput:
    g = _check_load(g)
    if a < 0:
        raise DomainError(f"normalized propagation delay must be >= 0, got {a}")
    return _csma_kernel(g, a)


def csma_delay_vs_throughput(t: NormalizedThroughput, params: AnalyticParams) -> float:
    t = _check_throughput(t)
    return _retrans_delay(t, 2.0, params, 1.0)


def csma_delay_vs_load(g: OfferedLoad, l: float) -> float:
    """Delay proxy as printed: the CSMA kernel evaluated with L in place of a."""
    g = _check_load(g)
    if l < 0:
        raise DomainError(f"packet count must be >= 0, got {l}")
    return _csma_kernel(g, l)


# --- TDMA / FDMA ----------------------------------------------------------------

def _rate(params: AnalyticParams, rate: str) -> float:
    if rate == "C":
        r = params.cycle_len
    elif rate == "a":
        r = params.norm_prop_delay
    else:
        raise DomainError(f"rate selector must be 'C' or 'a', got {rate!r}")
    if r <= 0:
        raise DomainError(f"rate parameter {rate} must be > 0, got {r}")
    return r


def _queue_factor(x: float) -> float:
    return x / (2.0 * (1.0 - x))


def tdma_delay(load_term: float, params: AnalyticParams, rate: Literal["C", "a"] = "C") -> float:
    """L/r + x/(2(1-x)) * N L/r + N L/(2r): transmission, queueing, half-frame slot wait."""
    x = _check_load_term(load_term)
    r = _rate(params, rate)
    n, l = params.n_nodes, params.pkt_len
    return l / r + _queue_factor(x) * n * l / r + n * l / (2.0 * r)


def tdma_throughput_vs_load(g: OfferedLoad, params: AnalyticParams) -> float:
    return tdma_delay(g, params, "C")


def fdma_delay(load_term: float, params: AnalyticParams, rate: Literal["C", "a"] = "C") -> float:
    """N L/r * (1 + x/(2(1-x))): one sub-channel of rate 1/N with M/D/1 queueing."""
    x = _check_load_term(load_term)
    r = _rate(params, rate)
    return params.n_nodes * params.pkt_len / r * (1.0 + _queue_factor(x))


def fdma_throughput_vs_load(g: OfferedLoad, params: AnalyticParams) -> float:
    return fdma_delay(g, params, "C")


def collision_free_throughput(g: OfferedLoad, params: AnalyticParams) -> NormalizedThroughput:
    """Carried throughput g L / C of a stable collision-free schedule."""
    g = _check_load(g)
    s = g * params.pkt_len / params.cycle_len
    if s >= 1:
        raise DomainError(f"saturated queue: utilization {s} >= 1")
    return s


# --- curves ---------------------------------------------------------------------

_RELATIONS: dict = {
    ("pure_aloha", "t-vs-g"): (lambda x, p: aloha_throughput(x), ""),
    ("pure_aloha", "d-vs-t"): (aloha_delay_vs_throughput, ""),
    ("pure_aloha", "d-vs-g"): (aloha_delay_vs_load, ""),
    ("slotted_aloha", "t-vs-g"): (lambda x, p: slotted_aloha_throughput(x), ""),
    ("slotted_aloha", "d-vs-t"): (saloha_delay_vs_throughput, ""),
    ("slotted_aloha", "d-vs-g"): (saloha_delay_vs_load, ""),
    ("csma_1p", "t-vs-g"): (lambda x, p: csma_throughput(x, p.norm_prop_delay), ""),
    ("csma_1p", "d-vs-t"): (csma_delay_vs_throughput, ""),
    ("csma_1p", "d-vs-g"): (lambda x, p: csma_delay_vs_load(x, p.pkt_len), AS_PRINTED),
    ("tdma", "d-vs-t"): (lambda x, p: tdma_delay(x, p, "C"), ""),
    ("tdma", "t-vs-g"): (tdma_throughput_vs_load, ""),
    ("tdma", "d-vs-g"): (lambda x, p: tdma_delay(x, p, "a"), ""),
    ("fdma", "d-vs-g"): (lambda x, p: fdma_delay(x, p, "a"), ""),
    ("fdma", "d-vs-t"): (lambda x, p: fdma_delay(x, p, "C"), ""),
    ("fdma", "t-vs-g"): (fdma_throughput_vs_load, ""),
}
# CSMA/CA shares the CSMA closed forms
for _rel in RELATIONS:
    _RELATIONS[("csma_ca", _rel)] = _RELATIONS[("csma_1p", _rel)]


def relation_for(technique: str, relation: str):
    """Return (function, note) for a technique/relation pair"""
    key = (technique, relation)
    if key not in _RELATIONS:
        raise DomainError(f"unknown technique/relation pair: {technique} {relation}")
    return _RELATIONS[key]


def load_grid(lo: float, hi: float, step: float) -> list:
    """Inclusive ascending grid lo, lo+step, ..., <= hi."""
    if step <= 0:
        raise DomainError(f"grid step must be > 0, got {step}")
    if hi < lo:
        raise DomainError(f"empty range: lo={lo} > hi={hi}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def generate_curve(technique: str, relation: str, x_range, params: AnalyticParams | None = None) -> Curve:
    params = params or AnalyticParams()
    func, note = relation_for(technique, relation)
    lo, hi, step = x_range

    points, skipped = [], []
    for x in load_grid(lo, hi, step):
        try:
            y = func(x, params)
        except DomainError:
            skipped.append(x)
            continue
        if not math.isfinite(y):
            skipped.append(x)
            continue
        points.append(CurvePoint(x=x, y=y, relation=relation, technique=technique, note=note))

    return Curve(technique=technique, relation=relation, points=points, skipped=skipped, note=note)
