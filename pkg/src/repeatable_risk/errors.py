"""Exception types raised across the package."""


class RiskEstimationError(Exception):
    """Base class for package errors."""


class DimensionError(RiskEstimationError, ValueError):
    pass


class AbsoluteContinuityError(RiskEstimationError, ValueError):
    """p puts mass where q has zero density."""


class PlannerDivergedError(RiskEstimationError):
    """The fluctuation-constant scan hit its upper limit without satisfying the bound."""


class PlannerParameterError(RiskEstimationError, ValueError):
    pass


class SimulationDivergedError(RiskEstimationError, ArithmeticError):
    pass


class ConfigError(RiskEstimationError, ValueError):
    pass
