"""
Dissipation along trajectories
==============================

Drive the inner loop with sinusoids and check dV/dt <= d(eta)/dt^T v from the
recorded samples. The residual is a finite-difference artefact, so halving
dt cuts it by about four.
"""

import numpy as np

from niquad.quadrotor import QuadrotorParams
from niquad.sim import Trajectory, random_inner_loop_batch, simulate_inner_loop
from niquad.storage_ni import StorageFunction, StorageKind, dissipation_check

p, kp = QuadrotorParams(), (2.0, 3.0, 4.0)
V = StorageFunction(StorageKind.INNER_LOOP_STATE_SPACE, p, kp)
x0, v_fn = random_inner_loop_batch(np.random.default_rng(3), 1)

for dt in (4e-4, 2e-4, 1e-4):
    run = simulate_inner_loop(p, kp, x0, v_fn, dt, 2.0).select(0)
    r = dissipation_check(run, V)
    print(f"dt={dt:.0e}: passed={r.passed}  max|residual|={r.max_abs_residual:.2e}  tol={r.tolerance_used:.2e}")

# with the output sign flipped the inequality fails by about twice the supply
bad = dissipation_check(Trajectory(run.t, run.x, run.v, -run.y), V)
print(f"flipped output: passed={bad.passed}, worst violation {bad.max_violation:.3g} at t={bad.violation_time:.3f} s")
