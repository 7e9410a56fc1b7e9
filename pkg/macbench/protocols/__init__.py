from macbench.errors import ConfigError
from macbench.protocols.base import Metrics, SimConfig
from macbench.protocols.csma import simulate_csma_1p
from macbench.protocols.csma_ca import simulate_csma_ca
from macbench.protocols.fdma import simulate_fdma
from macbench.protocols.pure_aloha import simulate_pure_aloha
from macbench.protocols.slotted_aloha import simulate_slotted_aloha
from macbench.protocols.tdma import simulate_tdma

SIMULATORS = {
    "pure_aloha": simulate_pure_aloha,
    "slotted_aloha": simulate_slotted_aloha,
    "csma_1p": simulate_csma_1p,
    "csma_ca": simulate_csma_ca,
    "tdma": simulate_tdma,
    "fdma": simulate_fdma,
}


def simulate(config: SimConfig, engine=None, logger=None) -> Metrics:
    """Dispatch a run to the state machine of its technique"""
    if config.technique not in SIMULATORS:
        raise ConfigError(f"unknown technique {config.technique!r}")
    return SIMULATORS[config.technique](config, engine=engine, logger=logger)


__all__ = [
    "Metrics", "SimConfig", "SIMULATORS", "simulate",
    "simulate_pure_aloha", "simulate_slotted_aloha", "simulate_csma_1p",
    "simulate_csma_ca", "simulate_tdma", "simulate_fdma",
]
