"""Quadrotor kinematics and dynamics.

Two inertia models live here side by side:

* the Lagrangian model, with configuration-dependent rotational inertia
  ``J(eta) = W(eta)^T J W(eta)``, its Christoffel-symbol Coriolis matrix and
  the gravity vector (used for the dissipation checks);
* the 12-state model with constant diagonal ``J`` and gyroscopic cross terms,
  reproduced row by row (used by the closed-loop simulations).

State ordering of the 12-state model is
``(phi, phi_dot, theta, theta_dot, psi, psi_dot, z, z_dot, x, x_dot, y, y_dot)``
and the rotational subsystem uses the first six components. Generalised
coordinates of the Lagrangian model are ``q = (x, y, z, phi, theta, psi)``.

Most functions broadcast over leading batch axes.
"""

from dataclasses import dataclass, fields

import numpy as np

from .errors import NonPositiveGain, SingularInertia

GIMBAL_EPS = 1e-6


@dataclass(frozen=True)
class QuadrotorParams:
    """Physical constants. Derived coefficients are properties, never stored."""

    m: float = 0.65
    g: float = 9.81
    l: float = 0.23
    b: float = 3.13e-5
    d: float = 7.5e-7
    Jx: float = 7.5e-3
    Jy: float = 7.5e-3
    Jz: float = 1.3e-2
    Jr: float = 6e-5

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"QuadrotorParams.{f.name} must be positive, got {value!r}")

    @property
    def a1(self):
        return (self.Jy - self.Jz) / self.Jx

    @property
    def a2(self):
        return self.Jr / self.Jx

    @property
    def a3(self):
        return (self.Jz - self.Jx) / self.Jy

    @property
    def a4(self):
        return self.Jr / self.Jy

    @property
    def a5(self):
        return (self.Jx - self.Jy) / self.Jz

    @property
    def b1(self):
        return self.l / self.Jx

    @property
    def b2(self):
        return self.l / self.Jy

    @property
    def b3(self):
        return 1.0 / self.Jz

    @property
    def inertia(self):
        return np.diag([self.Jx, self.Jy, self.Jz])


@dataclass(frozen=True)
class RotationalCoefficients:
    """The coefficients read by :func:`rotational_dynamics`, stacked per run.

    Lets one batched integration cover airframes with different parameters:
    each field has shape ``(N,)`` matching a leading batch axis of the state.
    """

    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    a4: np.ndarray
    a5: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray

    @classmethod
    def stack(cls, params):
        return cls(*(np.array([getattr(p, f.name) for p in params]) for f in fields(cls)))


def rotation_matrix(eta):
    """Body-to-earth rotation for ZYX Euler angles ``eta = (phi, theta, psi)``."""
    phi, theta, psi = np.moveaxis(np.asarray(eta, dtype=float), -1, 0)
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    rows = [
        [ct * cp, cp * st * sf - cf * sp, cf * cp * st + sf * sp],
        [ct * sp, st * sf * sp + cf * cp, cf * st * sp - cp * sf],
        [-st, ct * sf, ct * cf],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def euler_rate_matrix(eta):
    """``W_eta`` with ``omega_body = W_eta @ eta_dot``. det(W_eta) = cos(theta)."""
    phi, theta, _ = np.moveaxis(np.asarray(eta, dtype=float), -1, 0)
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    one, zero = np.ones_like(phi), np.zeros_like(phi)
    rows = [
        [one, zero, -st],
        [zero, cf, sf * ct],
        [zero, -sf, cf * ct],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def mix_rotor_speeds(w, p):
    """Map rotor speeds to ``(u, g_u)``.

    ``u = (u1, u2, u3, u4)`` is the mixing matrix applied to squared speeds;
    ``g_u = w1 - w2 + w3 - w4`` is the relative rotor speed feeding the
    gyroscopic terms.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("rotor speeds must be nonnegative")
    mix = np.array([
        [p.b, p.b, p.b, p.b],
        [0.0, p.b, 0.0, -p.b],
        [p.b, 0.0, -p.b, 0.0],
        [p.d, -p.d, p.d, -p.d],
    ])
    u = (w**2) @ mix.T
    g_u = w[..., 0] - w[..., 1] + w[..., 2] - w[..., 3]
    return u, g_u


def _check_gimbal(theta):
    if np.any(np.abs(np.cos(theta)) <= GIMBAL_EPS):
        raise SingularInertia("|cos(theta)| <= 1e-6: Euler-rate matrix is singular")


def _inertia_terms(eta):
    phi, theta = eta[..., 0], eta[..., 1]
    return np.cos(phi), np.sin(phi), np.cos(theta), np.sin(theta)


def rotational_inertia(eta, p):
    """Configuration-dependent inertia ``J(eta) = W^T J W``, entry by entry."""
    eta = np.asarray(eta, dtype=float)
    _check_gimbal(eta[..., 1])
    cf, sf, ct, st = _inertia_terms(eta)
    J = np.zeros(np.shape(cf) + (3, 3))
    J[..., 0, 0] = p.Jx
    J[..., 0, 2] = J[..., 2, 0] = -p.Jx * st
    J[..., 1, 1] = p.Jy * cf**2 + p.Jz * sf**2
    J[..., 1, 2] = J[..., 2, 1] = (p.Jy - p.Jz) * cf * sf * ct
    J[..., 2, 2] = p.Jx * st**2 + (p.Jy * sf**2 + p.Jz * cf**2) * ct**2
    return J


def rotational_inertia_partials(eta, p):
    """Stack of ``dJ(eta)/d eta_i`` for i = phi, theta, psi, shape (..., 3, 3, 3)."""
    cf, sf, ct, st = _inertia_terms(np.asarray(eta, dtype=float))
    dJ = np.zeros(np.shape(cf) + (3, 3, 3))
    dy = p.Jy - p.Jz
    dJ[..., 0, 1, 1] = -2.0 * dy * sf * cf
    dJ[..., 0, 1, 2] = dJ[..., 0, 2, 1] = dy * (cf**2 - sf**2) * ct
    dJ[..., 0, 2, 2] = 2.0 * dy * sf * cf * ct**2
    dJ[..., 1, 0, 2] = dJ[..., 1, 2, 0] = -p.Jx * ct
    dJ[..., 1, 1, 2] = dJ[..., 1, 2, 1] = -dy * cf * sf * st
    dJ[..., 1, 2, 2] = 2.0 * st * ct * (p.Jx - p.Jy * sf**2 - p.Jz * cf**2)
    return dJ


def mass_matrix(q, p):
    """Block-diagonal ``M(q) = diag(m I3, J(eta))`` for ``q = (x, y, z, phi, theta, psi)``."""
    q = np.asarray(q, dtype=float)
    M = np.zeros(q.shape[:-1] + (6, 6))
    M[..., 0, 0] = M[..., 1, 1] = M[..., 2, 2] = p.m
    M[..., 3:, 3:] = rotational_inertia(q[..., 3:], p)
    return M


def mass_matrix_partials(q, p):
    """``dM/dq_i`` stacked along axis -3, shape (..., 6, 6, 6)."""
    q = np.asarray(q, dtype=float)
    dM = np.zeros(q.shape[:-1] + (6, 6, 6))
    dM[..., 3:, 3:, 3:] = rotational_inertia_partials(q[..., 3:], p)
    return dM


def mass_matrix_rate(q, qdot, p):
    """Time derivative of M along the motion, by the chain rule."""
    dM = mass_matrix_partials(q, p)
    return np.einsum("...ikj,...i->...kj", dM, np.asarray(qdot, dtype=float))


def christoffel_coriolis(dM, qdot):
    """Coriolis matrix from first-kind Christoffel symbols of a given ``dM/dq`` stack."""
    qdot = np.asarray(qdot, dtype=float)
    t1 = np.einsum("...ikj,...i->...kj", dM, qdot)
    t2 = np.einsum("...jki,...i->...kj", dM, qdot)
    t3 = np.einsum("...kij,...i->...kj", dM, qdot)
    return 0.5 * (t1 + t2 - t3)


def coriolis_matrix(q, qdot, p):
    """Christoffel-symbol Coriolis matrix; makes ``Mdot - 2C`` skew-symmetric."""
    q = np.asarray(q, dtype=float)
    _check_gimbal(q[..., 4])
    return christoffel_coriolis(mass_matrix_partials(q, p), qdot)


def gravity_vector(q, p):
    """Gradient of ``U(q) = m g z``."""
    q = np.asarray(q, dtype=float)
    G = np.zeros(q.shape[:-1] + (6,))
    G[..., 2] = p.m * p.g
    return G


def potential_energy(q, p):
    return p.m * p.g * np.asarray(q, dtype=float)[..., 2]


def lagrangian_dynamics(state, F, p):
    """``M(q) qdd + C(q, qd) qd + G(q) = F`` solved for the 12-vector ``(q, qd)``.

    M is block diagonal with a constant translational block, so only the
    3x3 rotational block is solved.
    """
    state = np.asarray(state, dtype=float)
    F = np.asarray(F, dtype=float)
    q, qd = state[..., :6], state[..., 6:]
    eta, eta_dot = q[..., 3:], qd[..., 3:]
    _check_gimbal(eta[..., 1])
    J = rotational_inertia(eta, p)
    C = christoffel_coriolis(rotational_inertia_partials(eta, p), eta_dot)
    rhs = F[..., 3:] - np.einsum("...ij,...j->...i", C, eta_dot)
    out = np.empty(np.broadcast_shapes(state.shape, F.shape[:-1] + (12,)))
    out[..., :6] = qd
    out[..., 6:9] = (F[..., :3] - gravity_vector(q, p)[..., :3]) / p.m
    out[..., 9:] = np.linalg.solve(J, rhs[..., None])[..., 0]
    return out


def full_dynamics(x, u, g_u, p):
    """Derivative of the 12-state model, row for row."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    u1 = u[..., 0]
    dx = np.empty(np.broadcast_shapes(x.shape, u.shape[:-1] + (12,)))
    dx[..., :6] = rotational_dynamics(x[..., :6], u[..., 1:], g_u, p)
    x1, x3, x5 = x[..., 0], x[..., 2], x[..., 4]
    dx[..., 6] = x[..., 7]
    dx[..., 7] = p.g - u1 / p.m * np.cos(x1) * np.cos(x3)
    dx[..., 8] = x[..., 9]
    dx[..., 9] = -u1 / p.m * (np.sin(x1) * np.sin(x5) + np.cos(x1) * np.sin(x3) * np.cos(x5))
    dx[..., 10] = x[..., 11]
    dx[..., 11] = u1 / p.m * (np.sin(x1) * np.cos(x5) - np.cos(x1) * np.sin(x3) * np.sin(x5))
    return dx


def rotational_dynamics(x, torque, g_u, p):
    """Six-state rotational subsystem driven by ``torque = (u2, u3, u4)``."""
    x = np.asarray(x, dtype=float)
    torque = np.asarray(torque, dtype=float)
    x2, x4, x6 = x[..., 1], x[..., 3], x[..., 5]
    dx = np.empty(np.broadcast_shapes(x.shape, torque.shape[:-1] + (6,)))
    dx[..., 0] = x2
    dx[..., 1] = x4 * x6 * p.a1 - x4 * p.a2 * g_u + p.b1 * torque[..., 0]
    dx[..., 2] = x4
    dx[..., 3] = x2 * x6 * p.a3 + x2 * p.a4 * g_u + p.b2 * torque[..., 1]
    dx[..., 4] = x6
    dx[..., 5] = x4 * x2 * p.a5 + p.b3 * torque[..., 2]
    return dx


def _gains(kp):
    kp = np.asarray(tuple(kp) if not isinstance(kp, np.ndarray) else kp, dtype=float)
    if kp.shape[-1:] != (3,) or np.any(kp <= 0):
        raise NonPositiveGain(f"proportional gains must be three positive values, got {kp}")
    return kp


def inner_loop_dynamics(x, v, eta_d, g_u, kp, p):
    """Rotational subsystem closed by ``tau = -Kp (eta - eta_d) + v``.

    Errors are taken per axis on (phi, theta, psi) = (x1, x3, x5).
    """
    x = np.asarray(x, dtype=float)
    kp = _gains(kp)
    err = x[..., 0::2] - np.asarray(eta_d, dtype=float)
    torque = -kp * err + np.asarray(v, dtype=float)
    return rotational_dynamics(x, torque, g_u, p)


def lagrangian_inner_loop_dynamics(x, v, eta_d, kp, p):
    """Inner loop on the Lagrangian rotational model.

    ``J(eta) eta_dd + C(eta, eta_d) eta_d = -Kp (eta - eta_d) + v`` with the
    RotState layout ``(phi, phi_dot, theta, theta_dot, psi, psi_dot)``.
    """
    x = np.asarray(x, dtype=float)
    kp = _gains(kp)
    eta, eta_dot = x[..., 0::2], x[..., 1::2]
    _check_gimbal(eta[..., 1])
    J = rotational_inertia(eta, p)
    C = christoffel_coriolis(rotational_inertia_partials(eta, p), eta_dot)
    tau = -kp * (eta - np.asarray(eta_d, dtype=float)) + np.asarray(v, dtype=float)
    rhs = tau - np.einsum("...ij,...j->...i", C, eta_dot)
    eta_dd = np.linalg.solve(J, rhs[..., None])[..., 0]
    dx = np.empty(np.broadcast_shapes(x.shape, eta_dd.shape[:-1] + (6,)))
    dx[..., 0::2] = eta_dot
    dx[..., 1::2] = eta_dd
    return dx
