"""
Offered-load sweeps: run replications per (technique, g), aggregate them, and
join the simulated columns with the closed-form predictions.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.stats import norm

from macbench import analytic_models as am
from macbench.analytic_models import TECHNIQUES, AnalyticParams
from macbench.errors import ConfigError, DomainError, MacBenchError
from macbench.protocols import SimConfig, simulate
from macbench.run_logger import RunLogger
from macbench.seeds import DEFAULT_SEED, derive_seed

SWEEP_COLUMNS = [
    "technique", "g",
    "s_analytic", "s_sim_mean", "s_sim_ci95_lo", "s_sim_ci95_hi",
    "d_analytic", "d_sim_mean", "d_sim_ci95_lo", "d_sim_ci95_hi",
    "n_replications", "q_sim_mean", "collided_sim_mean", "seed",
]

CONCLUSION_TECHNIQUES = ("tdma", "fdma", "csma_ca", "pure_aloha", "slotted_aloha")
DEFAULT_CONCLUSION_G = 0.8
ABSOLUTE_ERROR_FLOOR = 1e-3

# keys owned by the harness, never by overrides
_HARNESS_KEYS = {"technique", "offered_load_g", "seed"}


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    techniques: Tuple[str, ...] = TECHNIQUES
    g_grid: Tuple[float, float, float] = (0.1, 2.0, 0.1)
    replications: int = Field(5, ge=1)
    base_seed: int = DEFAULT_SEED
    analytic_params: AnalyticParams = AnalyticParams()
    sim_overrides: dict = Field(default_factory=dict)
    relations: Tuple[str, ...] = am.RELATIONS
    workers: int = Field(1, ge=1)
    conclusion_g: Optional[float] = Field(None, gt=0)

    @field_validator("techniques")
    @classmethod
    def validate_techniques(cls, v):
        if not v:
            raise ValueError("at least one technique is required")
        unknown = [t for t in v if t not in TECHNIQUES]
        if unknown:
            raise ValueError(f"unknown techniques: {unknown}")
        return tuple(dict.fromkeys(v))

    @field_validator("relations")
    @classmethod
    def validate_relations(cls, v):
        unknown = [r for r in v if r not in am.RELATIONS]
        if unknown:
            raise ValueError(f"unknown relations: {unknown}")
        return tuple(v)

    @field_validator("sim_overrides")
    @classmethod
    def validate_overrides(cls, v):
        unknown = set(v) - (set(SimConfig.model_fields) - _HARNESS_KEYS)
        if unknown:
            raise ValueError(f"sim_overrides has unsupported keys: {sorted(unknown)}")
        return v

    @model_validator(mode="after")
    def validate_grid(self):
        lo, hi, step = self.g_grid
        if step <= 0 or hi < lo:
            raise ValueError(f"g_grid must satisfy lo <= hi and step > 0, got {self.g_grid}")
        if lo <= 0:
            raise ValueError("g_grid must start above 0: the simulator needs a positive load")
        return self

    def grid(self) -> list:
        return am.load_grid(*self.g_grid)

    def sim_config(self, technique: str, g: float, seed: int) -> SimConfig:
        p = self.analytic_params
        base = {
            "n_stations": p.n_nodes,
            "pkt_len": p.pkt_len,
            "cycle_len": p.cycle_len,
            "norm_prop_delay_a": p.norm_prop_delay,
        }
        try:
            return SimConfig(technique=technique, offered_load_g=g, seed=seed, **{**base, **self.sim_overrides})
        except ValidationError as e:
            raise ConfigError(f"invalid simulation settings: {e}")

    def effective_params(self) -> AnalyticParams:
        """Analytic symbols aligned with what the simulator runs (K, a, N, L, C)"""
        sim = self.sim_config(self.techniques[0], 1.0, self.base_seed)
        try:
            return self.analytic_params.with_updates(
                retrans_window=sim.retrans_window_k,
                norm_prop_delay=sim.norm_prop_delay_a,
                n_nodes=sim.n_stations,
                pkt_len=sim.pkt_len,
                cycle_len=sim.cycle_len,
            )
        except ValidationError as e:
            raise ConfigError(f"simulation settings have no analytic counterpart: {e}")


@dataclass
class SweepTable:
    frame: pd.DataFrame
    diagnostics: list = field(default_factory=list)
    seed: int = DEFAULT_SEED

    def __len__(self):
        return len(self.frame)

    def row(self, technique: str, g: float) -> pd.Series:
        match = self.frame[(self.frame["technique"] == technique) & np.isclose(self.frame["g"], g)]
        if match.empty:
            raise KeyError(f"no row for {technique} at g={g}")
        return match.iloc[0]

    def to_csv(self, path_or_buf=None):
        return self.frame.to_csv(path_or_buf, index=False, float_format="%.6g")


def analytic_columns(technique: str, g: float, params: AnalyticParams) -> Tuple[float, float]:
    """(throughput, delay) predicted by the closed forms for one sweep row"""
    if technique == "pure_aloha":
        return am.aloha_throughput(g), am.aloha_delay_vs_load(g, params)
    if technique == "slotted_aloha":
        return am.slotted_aloha_throughput(g), am.saloha_delay_vs_load(g, params)
    if technique in ("csma_1p", "csma_ca"):
        s = am.csma_throughput(g, params.norm_prop_delay)
        return s, am.csma_delay_vs_throughput(s, params)

    s = am.collision_free_throughput(g, params)
    if technique == "tdma":
        return s, am.tdma_delay(s, params, "C")
    return s, am.fdma_delay(s, params, "C")


def normal_interval(values) -> Tuple[float, float, float]:
    """(mean, lo, hi) of a 95% normal interval over replication means"""
    values = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if len(values) == 0:
        return (math.nan, math.nan, math.nan)
    mean = float(values.mean())
    if len(values) == 1:
        return (mean, mean, mean)
    half = float(norm.ppf(0.975) * values.std(ddof=1) / math.sqrt(len(values)))
    return (mean, mean - half, mean + half)


def _run_replication(config: SimConfig):
    # module level so the process pool can pickle it; a failure aborts only its row
    try:
        return simulate(config), None
    except MacBenchError as e:
        return None, str(e)
    except Exception as e:
        return None, f"{type(e).__name__}: {e}"


def _jobs(spec: SweepSpec, techniques, grid):
    jobs = []
    for technique in techniques:
        tech_index = TECHNIQUES.index(technique)
        for g_index, g in enumerate(grid):
            for rep in range(spec.replications):
                seed = derive_seed(spec.base_seed, tech_index, g_index, rep)
                jobs.append(((technique, g_index, rep), spec.sim_config(technique, g, seed)))
    return jobs


def _execute(jobs, workers: int) -> dict:
    results = {}
    if workers <= 1:
        for slot, config in jobs:
            results[slot] = _run_replication(config)
        return results

    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(_run_replication, config): slot for slot, config in jobs}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results


def run_sweep(spec: SweepSpec, logger: Optional[RunLogger] = None) -> SweepTable:
    logger = logger or RunLogger(quiet=True)
    grid = spec.grid()
    params = spec.effective_params()
    jobs = _jobs(spec, spec.techniques, grid)
    logger.info(
        f"Sweep: {len(spec.techniques)} techniques x {len(grid)} loads x {spec.replications} replications, "
        f"seed={spec.base_seed}",
        component="sweep",
    )

    results = _execute(jobs, spec.workers)

    rows = []
    diagnostics = []
    for technique in spec.techniques:
        for g_index, g in enumerate(grid):
            row = {"technique": technique, "g": g, "seed": spec.base_seed}

            try:
                row["s_analytic"], row["d_analytic"] = analytic_columns(technique, g, params)
            except DomainError as e:
                row["s_analytic"] = row["d_analytic"] = math.nan
                diagnostics.append({"technique": technique, "g": g, "component": "analytic", "error": str(e)})
                logger.warning(f"No analytic value at g={g}: {e}", technique=technique, component="analytic")

            runs = [results[(technique, g_index, rep)] for rep in range(spec.replications)]
            failures = [err for _, err in runs if err is not None]
            if failures:
                diagnostics.append({"technique": technique, "g": g, "component": "simulate", "error": failures[0]})
                logger.error(f"Row aborted at g={g}: {failures[0]}", technique=technique, component="simulate")
                metrics = []
            else:
                metrics = [m for m, _ in runs]

            row["s_sim_mean"], row["s_sim_ci95_lo"], row["s_sim_ci95_hi"] = normal_interval(
                [m.throughput_s for m in metrics]
            )
            row["d_sim_mean"], row["d_sim_ci95_lo"], row["d_sim_ci95_hi"] = normal_interval(
                [m.mean_delay for m in metrics]
            )
            row["q_sim_mean"] = float(np.mean([m.utilization for m in metrics])) if metrics else math.nan
            row["collided_sim_mean"] = float(np.mean([m.collided for m in metrics])) if metrics else math.nan
            row["n_replications"] = len(metrics)
            rows.append(row)

    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    frame = frame.sort_values(["technique", "g"], kind="stable").reset_index(drop=True)
    logger.info(f"Sweep finished: {len(frame)} rows, {len(diagnostics)} diagnostics", component="sweep")
    return SweepTable(frame=frame, diagnostics=diagnostics, seed=spec.base_seed)


def max_relative_error(table: SweepTable, columns=("s_sim_mean", "s_analytic")):
    """
    Largest |sim - analytic| / |analytic| over the rows, and the row it occurs at.
    Rows whose analytic value is below 1e-3 in magnitude are compared absolutely.
    """
    sim_col, analytic_col = columns
    frame = table.frame if isinstance(table, SweepTable) else table
    for col in columns:
        if col not in frame.columns:
            raise DomainError(f"column {col!r} not in table")
    usable = frame[[sim_col, analytic_col]].dropna()
    if usable.empty:
        raise DomainError("cannot compute an error over an empty table")

    sim = usable[sim_col].to_numpy(dtype=float)
    analytic = usable[analytic_col].to_numpy(dtype=float)
    diff = np.abs(sim - analytic)
    magnitude = np.abs(analytic)
    errors = np.where(magnitude < ABSOLUTE_ERROR_FLOOR, diff, diff / np.maximum(magnitude, ABSOLUTE_ERROR_FLOOR))

    at = int(np.argmax(errors))
    return float(errors[at]), usable.index[at]


@dataclass
class ConclusionReport:
    g: float
    throughput_ranking: List[Tuple[str, float]]
    delay_ranking: List[Tuple[str, float]]
    collisions: dict

    @property
    def tdma_best_throughput(self) -> bool:
        return self.throughput_ranking[0][0] == "tdma"

    @property
    def tdma_best_delay(self) -> bool:
        return self.delay_ranking[0][0] == "tdma"

    @property
    def claim_holds(self) -> bool:
        """TDMA first on both throughput and delay"""
        return self.tdma_best_throughput and self.tdma_best_delay

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for rank, (technique, value) in enumerate(self.throughput_ranking, start=1):
            rows.append({"g": self.g, "metric": "throughput", "rank": rank, "technique": technique, "value": value})
        for rank, (technique, value) in enumerate(self.delay_ranking, start=1):
            rows.append({"g": self.g, "metric": "delay", "rank": rank, "technique": technique, "value": value})
        for technique in sorted(self.collisions):
            rows.append({"g": self.g, "metric": "collisions", "rank": 0, "technique": technique,
                         "value": self.collisions[technique]})
        rows.append({"g": self.g, "metric": "tdma_best", "rank": 0, "technique": "tdma",
                     "value": int(self.claim_holds)})
        return pd.DataFrame(rows, columns=["g", "metric", "rank", "technique", "value"])


def _rank(values: dict, descending: bool) -> list:
    def key(item):
        technique, value = item
        if math.isnan(value):
            return (1, 0.0, technique)
        return (0, -value if descending else value, technique)
    return sorted(values.items(), key=key)


def reproduce_conclusion(spec: SweepSpec, g: Optional[float] = None, logger: Optional[RunLogger] = None):
    """
    Rank the five techniques by simulated throughput and by simulated mean delay
    at one high load point. The verdict is reported, never asserted.
    """
    g = g or spec.conclusion_g or DEFAULT_CONCLUSION_G
    missing = [t for t in CONCLUSION_TECHNIQUES if t not in spec.techniques]
    if missing:
        raise ConfigError(f"conclusion needs all five techniques, missing {missing}")

    techniques = tuple(t for t in spec.techniques if t in CONCLUSION_TECHNIQUES)
    point_spec = spec.model_copy(update={"techniques": techniques, "g_grid": (g, g, 1.0)})
    table = run_sweep(point_spec, logger)

    frame = table.frame.set_index("technique")
    report = ConclusionReport(
        g=g,
        throughput_ranking=_rank(frame["s_sim_mean"].to_dict(), descending=True),
        delay_ranking=_rank(frame["d_sim_mean"].to_dict(), descending=False),
        collisions=frame["collided_sim_mean"].to_dict(),
    )
    if logger is not None:
        verdict = "holds" if report.claim_holds else "does not hold"
        logger.info(f"TDMA-best claim {verdict} at g={g}", component="conclusion")
    return report
