# config_manager.py
"""
Run manifest loading and validation
"""

from typing import Literal, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from macbench.analytic_models import RELATIONS, TECHNIQUES, AnalyticParams, canonical_technique
from macbench.errors import ConfigError, DomainError
from macbench.frame_timing import FrameTiming
from macbench.protocols import SimConfig
from macbench.seeds import resolve_seed
from macbench.sweep_harness import SweepSpec

SCHEMA_VERSION = 1

DEFAULT_SIM_TECHNIQUE = "pure_aloha"
DEFAULT_SIM_LOAD = 0.5


def _canonical(names):
    try:
        return tuple(canonical_technique(n) for n in names)
    except DomainError as e:
        raise ValueError(str(e))


class SweepSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    techniques: Tuple[str, ...] = TECHNIQUES
    g_grid: Tuple[float, float, float] = (0.1, 2.0, 0.1)
    replications: int = Field(5, ge=1)
    relations: Tuple[str, ...] = RELATIONS
    workers: int = Field(1, ge=1)
    conclusion_g: Optional[float] = Field(None, gt=0)

    @field_validator("techniques", mode="before")
    @classmethod
    def validate_techniques(cls, v):
        return _canonical(v)


class RunConfig(BaseModel):
    """A complete run manifest; every section falls back to its defaults"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    version: Literal[1] = SCHEMA_VERSION
    seed: Optional[int] = None
    analytic: AnalyticParams = AnalyticParams()
    frame_timing: FrameTiming = FrameTiming()
    simulation: dict = Field(default_factory=dict)
    sweep: SweepSection = SweepSection()

    @field_validator("simulation")
    @classmethod
    def validate_simulation(cls, v):
        v = dict(v)
        if "seed" in v:
            raise ValueError("set the seed at the top level, not under simulation")
        if "technique" in v:
            v["technique"] = _canonical([v["technique"]])[0]
        unknown = set(v) - set(SimConfig.model_fields)
        if unknown:
            raise ValueError(f"unknown simulation keys: {sorted(unknown)}")
        return v


class ConfigManager:
    def __init__(self, path=None, cli_seed=None):
        load_dotenv()
        self.path = path
        self.config = self.load(path) if path else RunConfig()
        self.seed = resolve_seed(cli_seed, self.config.seed)

    @staticmethod
    def parse(text, source="<config>"):
        """Parse and validate a YAML manifest"""
        try:
            document = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            if mark is not None:
                raise ConfigError(
                    f"{source}: line {mark.line + 1}, column {mark.column + 1}: {getattr(e, 'problem', e)}"
                )
            raise ConfigError(f"{source}: {e}")

        if document is None:
            document = {}
        if not isinstance(document, dict):
            raise ConfigError(f"{source}: top level must be a mapping")
        if "version" not in document:
            raise ConfigError(f"{source}: missing required key 'version' (supported: {SCHEMA_VERSION})")

        try:
            return RunConfig.model_validate(document)
        except ValidationError as e:
            raise ConfigError(f"{source}: {e}")

    def load(self, path):
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        return self.parse(text, source=str(path))

    def analytic_params(self) -> AnalyticParams:
        return self.config.analytic

    def frame_timing(self) -> FrameTiming:
        return self.config.frame_timing

    def sim_config(self, **overrides) -> SimConfig:
        """Single-run settings, with N/L/C/a inherited from the analytic section"""
        p = self.config.analytic
        document = {
            "technique": DEFAULT_SIM_TECHNIQUE,
            "offered_load_g": DEFAULT_SIM_LOAD,
            "n_stations": p.n_nodes,
            "pkt_len": p.pkt_len,
            "cycle_len": p.cycle_len,
            "norm_prop_delay_a": p.norm_prop_delay,
            **self.config.simulation,
            **overrides,
            "seed": self.seed,
        }
        try:
            return SimConfig.model_validate(document)
        except ValidationError as e:
            raise ConfigError(f"invalid simulation settings: {e}")

    def sweep_spec(self) -> SweepSpec:
        sweep = self.config.sweep
        overrides = {
            k: v for k, v in self.config.simulation.items() if k not in ("technique", "offered_load_g")
        }
        try:
            return SweepSpec(
                techniques=sweep.techniques,
                g_grid=sweep.g_grid,
                replications=sweep.replications,
                base_seed=self.seed,
                analytic_params=self.config.analytic,
                sim_overrides=overrides,
                relations=sweep.relations,
                workers=sweep.workers,
                conclusion_g=sweep.conclusion_g,
            )
        except ValidationError as e:
            raise ConfigError(f"invalid sweep settings: {e}")

    def dump(self) -> str:
        """Resolved manifest as YAML, seed included"""
        document = self.config.model_dump(mode="json")
        document["seed"] = self.seed
        return yaml.dump(document, default_flow_style=False, sort_keys=False)
