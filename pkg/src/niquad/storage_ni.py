"""Storage functions and trajectory-based checks of the nonlinear
negative-imaginary dissipation inequality ``dV/dt <= dy/dt^T u``.

Three storage functions are provided:

``FULL_LAGRANGIAN``
    ``1/2 qd^T M(q) qd + m g z`` on the 12-vector ``(q, qd)``. The potential is
    unbounded below, so dissipation checks shift it by its trajectory minimum.
``INNER_LOOP``
    ``1/2 eta_dot^T J(eta) eta_dot + 1/2 e^T Kp e`` with ``e = eta - eta_d``,
    matched to :func:`niquad.quadrotor.lagrangian_inner_loop_dynamics`.
``INNER_LOOP_STATE_SPACE``
    ``1/2 sum eta_dot_i^2 / b_i + 1/2 e^T Kp e``, matched to the printed
    constant-inertia rows (:func:`niquad.quadrotor.inner_loop_dynamics`).
    Its derivative equals ``eta_dot^T v`` up to the residual
    ``phi_dot theta_dot psi_dot (Jx - Jy)(1 - 1/l)``, which vanishes for
    ``Jx == Jy`` (the default airframe) or ``l == 1``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import NonUniformTimestep, SimulationDiverged, TooFewSamples
from .quadrotor import QuadrotorParams, mass_matrix, potential_energy, rotational_inertia

DEFAULT_TOL = 1e-6


class StorageKind(enum.Enum):
    FULL_LAGRANGIAN = "full_lagrangian"
    INNER_LOOP = "inner_loop"
    INNER_LOOP_STATE_SPACE = "inner_loop_state_space"


@dataclass(frozen=True)
class StorageFunction:
    kind: StorageKind
    params: QuadrotorParams = field(default_factory=QuadrotorParams)
    kp: tuple = None
    eta_d: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind is not StorageKind.FULL_LAGRANGIAN:
            if self.kp is None:
                raise ValueError("inner-loop storage needs Kp gains")
            kp = tuple(float(k) for k in self.kp)
            if len(kp) != 3 or min(kp) <= 0:
                raise ValueError(f"Kp must be three positive gains, got {kp}")
            object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "eta_d", tuple(float(e) for e in self.eta_d))

    def __call__(self, state):
        return storage_value(self, state)


def kinetic_weights(p):
    """Diagonal effective inertia ``(Jx/l, Jy/l, Jz)`` of the printed rows."""
    return np.array([1.0 / p.b1, 1.0 / p.b2, 1.0 / p.b3])


def storage_value(V, state):
    """Evaluate ``V`` on a state array (leading axes broadcast)."""
    state = np.asarray(state, dtype=float)
    p = V.params
    if V.kind is StorageKind.FULL_LAGRANGIAN:
        q, qd = state[..., :6], state[..., 6:12]
        M = mass_matrix(q, p)
        return 0.5 * np.einsum("...i,...ij,...j->...", qd, M, qd) + potential_energy(q, p)
    eta, eta_dot = state[..., 0::2], state[..., 1::2]
    err = eta - np.asarray(V.eta_d)
    potential = 0.5 * np.sum(np.asarray(V.kp) * err**2, axis=-1)
    if V.kind is StorageKind.INNER_LOOP:
        J = rotational_inertia(eta, p)
        kinetic = 0.5 * np.einsum("...i,...ij,...j->...", eta_dot, J, eta_dot)
    else:
        kinetic = 0.5 * np.sum(kinetic_weights(p) * eta_dot**2, axis=-1)
    return kinetic + potential


@dataclass
class DissipationReport:
    max_violation: float
    violation_time: float
    samples: int
    tolerance_used: float
    passed: bool
    max_abs_residual: float = 0.0
    storage_offset: float = 0.0
    min_storage: float = 0.0

    def summary(self):
        return "\n".join([
            "check: dissipation",
            f"passed: {str(self.passed).lower()}",
            f"max_violation: {self.max_violation!r}",
            f"violation_time: {self.violation_time!r}",
            f"max_abs_residual: {self.max_abs_residual!r}",
            f"tolerance_used: {self.tolerance_used!r}",
            f"samples: {self.samples}",
        ])


def _uniform_step(t):
    t = np.asarray(t, dtype=float)
    if t.size < 3:
        raise TooFewSamples(f"need at least 3 samples, got {t.size}")
    steps = np.diff(t)
    dt = steps.mean()
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-9 * dt + 1e-12 * np.abs(t).max():
        raise NonUniformTimestep("trajectory samples must be uniformly spaced")
    return dt


def supply_residual(t, V_samples, y, u):
    """``dV/dt - dy/dt^T u`` by second-order finite differences, plus the supply."""
    dt = _uniform_step(t)
    V_dot = np.gradient(np.asarray(V_samples, dtype=float), dt, axis=0, edge_order=2)
    y_dot = np.gradient(np.asarray(y, dtype=float), dt, axis=0, edge_order=2)
    supply = np.sum(y_dot * np.asarray(u, dtype=float), axis=-1)
    return V_dot - supply, supply


def dissipation_check(traj, V, tol=DEFAULT_TOL):
    """Largest violation of ``dV/dt <= dy/dt^T u`` along a recorded trajectory.

    Uses ``traj.x`` for the storage argument, ``traj.v`` as the input channel
    and ``traj.y`` as the output. The tolerance is scale-aware:
    ``tol * (1 + max |dy/dt^T u|)``.
    """
    Vs = storage_value(V, traj.x)
    offset = 0.0
    if V.kind is StorageKind.FULL_LAGRANGIAN:
        q = np.asarray(traj.x)[..., :6]
        offset = float(np.min(potential_energy(q, V.params)))
        Vs = Vs - offset
    residual, supply = supply_residual(traj.t, Vs, traj.y, traj.v)
    tol_used = tol * (1.0 + float(np.max(np.abs(supply))))
    idx = np.unravel_index(np.argmax(residual), residual.shape)
    worst = max(0.0, float(residual[idx]))
    return DissipationReport(
        max_violation=worst,
        violation_time=float(np.asarray(traj.t)[idx[0]]),
        samples=int(np.asarray(traj.t).size),
        tolerance_used=tol_used,
        passed=worst <= tol_used,
        max_abs_residual=float(np.max(np.abs(residual))),
        storage_offset=offset,
        min_storage=float(np.min(Vs)),
    )


@dataclass
class ProbeResult:
    label: str
    equality_held: bool
    input_vanished: bool
    max_abs_residual: float
    final_input_norm: float

    @property
    def consistent(self):
        """False exactly when this input witnesses a violation of marginal strictness."""
        return (not self.equality_held) or self.input_vanished


def marginal_strictness_probe(rhs, output, V, x0, equality_inputs, horizon=20.0, dt=1e-3,
                              tol=1e-4, window=0.1, vanish_rel=1e-4):
    """Finite-horizon evidence for the marginal-strictness property.

    For each input signal ``u(t)`` the system ``x' = rhs(t, x, u)`` is
    simulated from ``x0``; the probe records whether the dissipation equality
    held (within ``tol``, scale-aware) and whether ``||u||`` averaged over the
    final ``window`` fraction of the horizon fell below ``vanish_rel`` times
    its peak. An input for which equality held but ``u`` did not vanish is a
    counterexample. Nothing here is a proof.
    """
    from .sim import Trajectory, integrate

    n = int(round(horizon / dt))
    results = []
    for i, item in enumerate(equality_inputs):
        label, u_fn = item if isinstance(item, tuple) else (f"input_{i}", item)
        t, X = integrate(lambda s, x: rhs(s, x, u_fn(s)), x0, 0.0, dt, n)
        U = np.stack([np.broadcast_to(np.asarray(u_fn(s), dtype=float), np.shape(x0)[:-1] + (3,)) for s in t])
        traj = Trajectory(t=t, x=X, v=U, y=output(X))
        Vs = storage_value(V, X)
        residual, supply = supply_residual(t, Vs, traj.y, U)
        if not np.all(np.isfinite(residual)):
            raise SimulationDiverged(float(t[-1]), X[-1])
        held = float(np.max(np.abs(residual))) <= tol * (1.0 + float(np.max(np.abs(supply))))
        norms = np.linalg.norm(U, axis=-1)
        final = float(np.mean(norms[t >= (1.0 - window) * t[-1]]))
        peak = float(np.max(norms))
        vanished = peak == 0.0 or final < vanish_rel * peak
        results.append(ProbeResult(label, held, vanished, float(np.max(np.abs(residual))), final))
    return results
