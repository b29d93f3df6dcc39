"""
Exception hierarchy for the simulator
"""


class SimulationError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigError(SimulationError, ValueError):
    """Invalid, unparsable or inconsistent configuration."""


class ScenarioError(SimulationError):
    """Degenerate scenario or a scenario that does not fit the configuration."""


class MissingAnalyticFieldError(ScenarioError):
    pass


class ParticleOutOfGridError(SimulationError):
    """A particle left [-L^n, L^n]; grid enlargement must run before the position push."""


class EmptyParticleSetError(SimulationError):
    pass


class ExhaustedValidityError(SimulationError):
    pass


class InsufficientPeaksError(SimulationError):
    pass


class ConvergenceError(SimulationError):
    pass


class OutputError(SimulationError):
    """Writing results failed; the message names the path."""
