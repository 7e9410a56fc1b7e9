"""
Exception hierarchy for macbench
"""


class MacBenchError(Exception):
    """Base class for every error raised by macbench"""


class DomainError(MacBenchError, ValueError):
    """Input lies outside the domain of a relation (saturated queue, zero delay, ...)"""


class ConfigError(MacBenchError):
    """Configuration document could not be parsed or validated"""


class SimulationError(MacBenchError):
    """Logic error inside the simulator; the run is aborted"""
