"""
Two rotational models
=====================

The Lagrangian model uses J(eta) = W^T J W with a Christoffel Coriolis
matrix, which makes Mdot - 2C skew-symmetric. The 12-state model keeps J
constant and adds gyroscopic cross terms. Near hover they agree.
"""

import numpy as np

from niquad.quadrotor import (
    QuadrotorParams,
    coriolis_matrix,
    full_dynamics,
    lagrangian_dynamics,
    mass_matrix_rate,
    mix_rotor_speeds,
)

p = QuadrotorParams()
rng = np.random.default_rng(1)

q = rng.uniform(-1, 1, 6)
qd = rng.normal(size=6)
S = mass_matrix_rate(q, qd, p) - 2 * coriolis_matrix(q, qd, p)
print("||S + S^T|| =", np.linalg.norm(S + S.T))

# hover: four equal rotor speeds balancing gravity
w_hover = np.sqrt(p.m * p.g / (4 * p.b))
u, g_u = mix_rotor_speeds(np.full(4, w_hover), p)
print(f"hover rotor speed {w_hover:.1f} rad/s -> u = {np.round(u, 6)}, g(u) = {g_u}")
print("12-state derivative at hover:", np.abs(full_dynamics(np.zeros(12), u, g_u, p)).max())

# a small roll input: the printed rows scale u2 by the arm length l, so the
# matching generalised torque is l * u2; both models then agree at rest
tau = np.array([1e-3, 0.0, 0.0])
x12 = np.zeros(12)
printed = full_dynamics(x12, np.r_[p.m * p.g, tau], 0.0, p)[1]
F = np.r_[0.0, 0.0, p.m * p.g, tau * np.array([p.l, 1.0, 1.0])]
lagrangian = lagrangian_dynamics(np.zeros(12), F, p)[9]
print(f"roll acceleration: printed rows {printed:.6f}, Lagrangian {lagrangian:.6f} rad/s^2")
