"""Fixed-step RK4 simulation of the attitude loops.

The closed loop is the positive-feedback interconnection of the inner loop
(plant input ``v``, output ``eta``) and the IRC (input ``eta - eta_d``,
output ``xc``), wired as ``v = xc``. Integrators accept a leading batch axis
on the state, so many initial conditions can share one run.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .controllers import InnerGains
from .errors import NonFiniteDerivative, SimulationDiverged
from .quadrotor import (
    QuadrotorParams,
    _gains,
    lagrangian_dynamics,
    lagrangian_inner_loop_dynamics,
    rotational_dynamics,
)
from .storage_ni import StorageFunction, StorageKind, dissipation_check, kinetic_weights, storage_value

DIVERGENCE_GUARD = 1e6


def rk4_step(rhs, state, t, dt):
    """One classical Runge-Kutta step of ``x' = rhs(t, x)``."""
    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * dt, state + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, state + 0.5 * dt * k2)
    k4 = rhs(t + dt, state + dt * k3)
    incr = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(incr)):
        raise NonFiniteDerivative(f"non-finite derivative near t={t:g}")
    return state + incr


def integrate(rhs, x0, t0, dt, n_steps, record_every=1, guard=DIVERGENCE_GUARD):
    """Integrate ``n_steps`` RK4 steps, recording every ``record_every`` steps.

    Returns ``(t, X)`` with ``X`` shaped ``(samples,) + x0.shape``. Raises
    :class:`SimulationDiverged` once any state norm exceeds ``guard``; the
    exception carries the samples recorded so far.
    """
    x = np.array(x0, dtype=float)
    n_rec = n_steps // record_every + 1
    X = np.empty((n_rec,) + x.shape)
    t = t0 + dt * record_every * np.arange(n_rec)
    X[0] = x
    r = 1
    for k in range(1, n_rec * record_every - record_every + 1):
        tk = t0 + (k - 1) * dt
        try:
            x = rk4_step(rhs, x, tk, dt)
        except NonFiniteDerivative:
            raise SimulationDiverged(tk, X[r - 1], (t[:r], X[:r])) from None
        if np.max(np.linalg.norm(x.reshape(-1, x.shape[-1]), axis=-1)) > guard:
            raise SimulationDiverged(tk + dt, X[r - 1], (t[:r], X[:r]))
        if k % record_every == 0:
            X[r] = x
            r += 1
    return t, X


@dataclass
class Trajectory:
    """Recorded samples, time on axis 0 (and an optional batch axis 1).

    ``v`` is the input channel and ``y`` the output used by dissipation
    checks; ``u`` is the applied torque ``(u2, u3, u4)`` when it differs
    from ``v``.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    y: np.ndarray
    u: np.ndarray = None
    x_c: np.ndarray = None
    V: np.ndarray = None

    def __len__(self):
        return len(self.t)

    def select(self, i):
        """Single run ``i`` out of a batched trajectory."""
        def pick(a):
            return None if a is None else a[:, i]
        return Trajectory(self.t, pick(self.x), pick(self.v), pick(self.y),
                          pick(self.u), pick(self.x_c), pick(self.V))

    def shifted(self, t0):
        return replace(self, t=self.t + t0)


@dataclass(frozen=True)
class Scenario:
    params: QuadrotorParams = field(default_factory=QuadrotorParams)
    kp: InnerGains = field(default_factory=lambda: InnerGains(2.0, 2.0, 2.0))
    gamma: np.ndarray = field(default_factory=lambda: 2.0 * np.eye(3))
    phi: float = 1.0
    x0: np.ndarray = field(default_factory=lambda: np.zeros(6))
    xc0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    eta_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    g_u: float = 0.0
    dt: float = 1e-3
    t_end: float = 20.0
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > self.dt:
            raise ValueError("t_end must exceed dt")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if not self.phi > 0:
            raise ValueError("phi must be positive")
        for name, shape in (("gamma", (3, 3)), ("x0", (6,)), ("xc0", (3,)), ("eta_d", (3,))):
            value = np.array(getattr(self, name), dtype=float)
            if value.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {value.shape}")
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        if not isinstance(self.kp, InnerGains):
            object.__setattr__(self, "kp", InnerGains(*self.kp))

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    def initial_state(self):
        return np.concatenate([self.x0, self.xc0])


def _closed_loop_field(scenario, eta_d=None):
    p = scenario.params
    k = scenario.kp.as_array()
    gamma_t = scenario.gamma.T
    phi = scenario.phi
    g_u = scenario.g_u
    ref = scenario.eta_d if eta_d is None else eta_d

    def rhs(t, z):
        x, xc = z[..., :6], z[..., 6:]
        err = x[..., 0::2] - ref
        torque = -k * err + xc
        dz = np.empty_like(z)
        dz[..., :6] = rotational_dynamics(x, torque, g_u, p)
        dz[..., 6:] = (err - phi * xc) @ gamma_t
        return dz

    return rhs


def closed_loop_rhs(state, scenario):
    """Derivative of the 9-state closed loop ``(RotState, xc)``."""
    return _closed_loop_field(scenario)(0.0, np.asarray(state, dtype=float))


def closed_loop_storage(x, xc, scenario, eta_d=None):
    """``V_plant + 1/2 phi |xc|^2 - e^T xc`` with ``e = eta - eta_d``.

    ``V_plant`` is the state-space inner-loop storage. The sum is
    nonincreasing along closed-loop solutions whenever the plant storage
    satisfies its dissipation equality, and positive definite iff every
    ``k_i * phi > 1``, i.e. iff the gain bound holds.
    """
    ref = scenario.eta_d if eta_d is None else eta_d
    err = x[..., 0::2] - ref
    kinetic = 0.5 * np.sum(kinetic_weights(scenario.params) * x[..., 1::2] ** 2, axis=-1)
    potential = 0.5 * np.sum(scenario.kp.as_array() * err**2, axis=-1)
    return kinetic + potential + 0.5 * scenario.phi * np.sum(xc**2, axis=-1) - np.sum(err * xc, axis=-1)


def _closed_loop_trajectory(t, Z, scenario, eta_d):
    x, xc = Z[..., :6], Z[..., 6:]
    err = x[..., 0::2] - eta_d
    u = -scenario.kp.as_array() * err + xc
    V = closed_loop_storage(x, xc, scenario, eta_d)
    return Trajectory(t=t, x=x, v=xc, y=x[..., 0::2], u=u, x_c=xc, V=V)


def simulate(scenario):
    """Integrate the closed loop from ``(x0, xc0)`` to ``t_end``."""
    rhs = _closed_loop_field(scenario)
    try:
        t, Z = integrate(rhs, scenario.initial_state(), 0.0, scenario.dt, scenario.n_steps,
                         scenario.record_every)
    except SimulationDiverged as exc:
        tp, Zp = exc.trajectory
        exc.trajectory = _closed_loop_trajectory(tp, Zp, scenario, scenario.eta_d)
        raise
    return _closed_loop_trajectory(t, Z, scenario, scenario.eta_d)


def simulate_many(scenarios):
    """Run scenarios that differ only in ``x0``, ``xc0`` and ``eta_d`` as one batch."""
    scenarios = list(scenarios)
    base = scenarios[0]
    for s in scenarios[1:]:
        same = (s.params == base.params and s.kp == base.kp and s.phi == base.phi
                and np.array_equal(s.gamma, base.gamma) and s.g_u == base.g_u
                and s.dt == base.dt and s.t_end == base.t_end and s.record_every == base.record_every)
        if not same:
            raise ValueError("batched scenarios may differ only in x0, xc0 and eta_d")
    z0 = np.stack([s.initial_state() for s in scenarios])
    eta_d = np.stack([s.eta_d for s in scenarios])
    rhs = _closed_loop_field(base, eta_d)
    t, Z = integrate(rhs, z0, 0.0, base.dt, base.n_steps, base.record_every)
    batch = _closed_loop_trajectory(t, Z, base, eta_d)
    return [batch.select(i) for i in range(len(scenarios))]


def simulate_inner_loop(params, kp, x0, v_fn, dt, t_end, eta_d=(0.0, 0.0, 0.0), g_u=0.0,
                        record_every=1, model="state_space"):
    """Open inner loop driven by an external signal ``v_fn(t)``.

    ``model="state_space"`` uses the printed constant-inertia rows;
    ``model="lagrangian"`` uses ``J(eta)`` with Christoffel Coriolis terms
    (``g_u`` is ignored there). ``x0`` may carry a leading batch axis, and
    for the state-space model ``kp`` may be ``(N, 3)`` and ``params`` a
    :class:`RotationalCoefficients`; storage is then left for the caller.
    """
    k = _gains(kp)
    ref = np.asarray(eta_d, dtype=float)
    if model == "state_space":
        def rhs(t, x):
            torque = -k * (x[..., 0::2] - ref) + v_fn(t)
            return rotational_dynamics(x, torque, g_u, params)
        kind = StorageKind.INNER_LOOP_STATE_SPACE
    elif model == "lagrangian":
        def rhs(t, x):
            return lagrangian_inner_loop_dynamics(x, v_fn(t), ref, k, params)
        kind = StorageKind.INNER_LOOP
    else:
        raise ValueError(f"unknown model {model!r}")
    n = int(round(t_end / dt))
    t, X = integrate(rhs, x0, 0.0, dt, n, record_every)
    x0 = np.asarray(x0)
    V_in = np.stack([np.broadcast_to(np.asarray(v_fn(s), dtype=float), x0.shape[:-1] + (3,)) for s in t])
    Vs = None
    if k.ndim == 1 and ref.ndim == 1 and isinstance(params, QuadrotorParams):
        Vs = storage_value(StorageFunction(kind, params, tuple(k), tuple(ref)), X)
    return Trajectory(t=t, x=X, v=V_in, y=X[..., 0::2], u=-k * (X[..., 0::2] - ref) + V_in, V=Vs)


def simulate_lagrangian(params, state0, force_fn, dt, t_end, record_every=1):
    """Full Euler-Lagrange model with generalised force input ``force_fn(t)``.

    State is ``(q, qd)`` with ``q = (x, y, z, phi, theta, psi)``; the
    recorded input channel is ``F`` and the output is ``q``.
    """
    def rhs(t, s):
        return lagrangian_dynamics(s, force_fn(t), params)

    n = int(round(t_end / dt))
    t, X = integrate(rhs, state0, 0.0, dt, n, record_every)
    state0 = np.asarray(state0)
    F = np.stack([np.broadcast_to(np.asarray(force_fn(s), dtype=float), state0.shape[:-1] + (6,)) for s in t])
    storage = StorageFunction(StorageKind.FULL_LAGRANGIAN, params)
    return Trajectory(t=t, x=X, v=F, y=X[..., :6], u=F, V=storage_value(storage, X))


def sinusoid(amplitude, frequency, phase):
    """``v(t) = amplitude * sin(frequency * t + phase)``, broadcasting over runs."""
    amplitude = np.asarray(amplitude, dtype=float)
    frequency = np.asarray(frequency, dtype=float)
    phase = np.asarray(phase, dtype=float)

    def v(t):
        return amplitude * np.sin(frequency * t + phase)

    return v


def random_inner_loop_batch(rng, count, angle=0.3, rate=0.5, amplitude=0.2, freq=(0.5, 5.0)):
    """Random initial states and bounded sinusoidal inputs for dissipation runs."""
    x0 = np.zeros((count, 6))
    x0[:, 0::2] = rng.uniform(-angle, angle, (count, 3))
    x0[:, 1::2] = rng.uniform(-rate, rate, (count, 3))
    v_fn = sinusoid(rng.uniform(0.0, amplitude, (count, 3)),
                    rng.uniform(*freq, (count, 3)),
                    rng.uniform(0.0, 2 * np.pi, (count, 3)))
    return x0, v_fn


def plant_dissipation_batch(params, kp, seed=42, count=4, horizon=1.0, dt=1e-4, tol=1e-6):
    """Dissipation reports for a seeded batch of driven inner-loop runs."""
    rng = np.random.default_rng(seed)
    x0, v_fn = random_inner_loop_batch(rng, count)
    traj = simulate_inner_loop(params, kp, x0, v_fn, dt, horizon)
    storage = StorageFunction(StorageKind.INNER_LOOP_STATE_SPACE, params, tuple(kp))
    return [dissipation_check(traj.select(i), storage, tol) for i in range(count)]


def convergence_metrics(traj, eta_d=(0.0, 0.0, 0.0)):
    """Settling time (2 % band of the initial error), final error, and whether
    the recorded storage is nonincreasing within ``1e-8 * V(0)`` per sample."""
    err = np.linalg.norm(np.asarray(traj.y) - np.asarray(eta_d), axis=-1)
    e0 = err[0]
    above = err >= 0.02 * e0 if e0 > 0 else err > 0
    if not above.any():
        settling = 0.0
    elif above[-1]:
        settling = None
    else:
        settling = float(traj.t[np.nonzero(above)[0][-1] + 1])
    monotone = None
    if traj.V is not None:
        V = np.asarray(traj.V)
        monotone = bool(np.all(np.diff(V) <= 1e-8 * abs(V[0])))
    return {"settling_time_s": settling, "final_error_rad": float(err[-1]), "monotone_energy": monotone}
