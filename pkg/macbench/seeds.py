"""
Seed derivation for reproducible sweeps.

Per-replication seeds are derived from a base seed and the replication's
coordinates (technique index, grid index, replication index). The packed
coordinates are XOR-ed into the base seed and passed through the SplitMix64
finalizer, which is a bijection on 64-bit integers, so distinct coordinates
always map to distinct seeds.
"""

from __future__ import annotations

import os

from macbench.errors import ConfigError

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 42
SEED_ENV_VAR = "MACBENCH_SEED"

TECHNIQUE_BITS = 16
GRID_BITS = 28
REPLICATION_BITS = 20


def mix64(x: int) -> int:
    """SplitMix64 finalizer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, technique_index: int, g_index: int, rep_index: int) -> int:
    if not 0 <= technique_index < (1 << TECHNIQUE_BITS):
        raise ConfigError(f"technique index out of range: {technique_index}")
    if not 0 <= g_index < (1 << GRID_BITS):
        raise ConfigError(f"grid index out of range: {g_index}")
    if not 0 <= rep_index < (1 << REPLICATION_BITS):
        raise ConfigError(f"replication index out of range: {rep_index}")

    key = (technique_index << (GRID_BITS + REPLICATION_BITS)) | (g_index << REPLICATION_BITS) | rep_index
    return mix64((base_seed & MASK64) ^ key)


def resolve_seed(cli_seed=None, config_seed=None) -> int:
    """Pick the run seed: --seed flag, then the config document, then MACBENCH_SEED, then 42"""
    if cli_seed is not None:
        return int(cli_seed)
    if config_seed is not None:
        return int(config_seed)
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed:
        try:
            return int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}")
    return DEFAULT_SEED
