"""Exception types shared across the package."""


class NiquadError(Exception):
    """Base class for all package errors."""


class SingularResolvent(NiquadError):
    """``jw I - A`` is numerically singular at the requested frequency."""

    def __init__(self, omega, cond):
        super().__init__(f"resolvent singular at omega={omega:g} (cond={cond:.3g})")
        self.omega = omega
        self.cond = cond


class EmptyGrid(NiquadError):
    pass


class NotSymmetric(NiquadError):
    pass


class SingularA(NiquadError):
    """det(A) vanishes, so the rank condition of the state-space SNI test
    cannot be formed. ``condition`` names the failed condition ("i")."""

    def __init__(self, det, condition="i"):
        super().__init__(f"A is singular (det={det:.3g}); condition {condition} fails")
        self.det = det
        self.condition = condition


class SingularInertia(NiquadError):
    """Euler-rate matrix is singular (gimbal lock, |cos theta| too small)."""


class NonPositiveGain(NiquadError):
    pass


class TooFewSamples(NiquadError):
    pass


class NonUniformTimestep(NiquadError):
    pass


class EmptySamples(NiquadError):
    pass


class NonFiniteDerivative(NiquadError):
    pass


class SimulationDiverged(NiquadError):
    """State norm left the divergence guard. Carries the last finite sample."""

    def __init__(self, t, last_state, trajectory=None):
        super().__init__(f"simulation diverged at t={t:g}")
        self.t = t
        self.last_state = last_state
        self.trajectory = trajectory


class ConfigError(NiquadError):
    """Invalid configuration. ``key`` is the dotted name of the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
