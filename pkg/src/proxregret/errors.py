"""Exception types shared across the package."""


class UnboundedSetError(ValueError):
    """Raised when an operation needs a finite diameter but the set is unbounded."""


class ProxNonconvergence(RuntimeError):
    """Iterative prox solver exhausted its iteration cap.

    Carries the final fixed-point displacement in ``residual``.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = float(residual)


class ProtocolError(RuntimeError):
    """Predict/update called out of order on a two-phase learner."""


class NotAnEndomorphism(ValueError):
    """An affine map left the feasible set at some trace point.

    ``round_index`` is the first offending round (1-based), ``point`` the image.
    """

    def __init__(self, message, round_index, point):
        super().__init__(message)
        self.round_index = int(round_index)
        self.point = point


class StepSizeError(ValueError):
    """Step size violates an admissibility condition required by a bound."""


class ConstantsViolated(RuntimeError):
    """A declared gradient-norm or smoothness constant was exceeded at runtime."""

    def __init__(self, message, player, round_index, witness):
        super().__init__(message)
        self.player = int(player)
        self.round_index = int(round_index)
        self.witness = witness


class BoundaryDivergence(ValueError):
    """Bregman divergence undefined: reference point on the domain boundary."""


class ConfigError(ValueError):
    """Experiment configuration failed validation. ``where`` names the key path."""

    def __init__(self, message, where=""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
