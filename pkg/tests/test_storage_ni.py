import numpy as np
import pytest
from numpy.testing import assert_allclose

from niquad.errors import NonUniformTimestep, SingularInertia, TooFewSamples
from niquad.quadrotor import QuadrotorParams, inner_loop_dynamics
from niquad.sim import Trajectory, random_inner_loop_batch, simulate_inner_loop, simulate_lagrangian, sinusoid
from niquad.storage_ni import (
    StorageFunction,
    StorageKind,
    dissipation_check,
    marginal_strictness_probe,
    storage_value,
    supply_residual,
)

P = QuadrotorParams()
KP = (2.0, 3.0, 4.0)
SS = StorageFunction(StorageKind.INNER_LOOP_STATE_SPACE, P, KP)


def test_storage_examples():
    V = StorageFunction(StorageKind.INNER_LOOP, P, (2.0, 1.0, 1.0), eta_d=(0.1, -0.2, 0.3))
    assert storage_value(V, [0.1, 0, -0.2, 0, 0.3, 0]) == 0
    V = StorageFunction(StorageKind.INNER_LOOP, P, (2.0, 1.0, 1.0))
    assert storage_value(V, [0.1, 0, 0, 0, 0, 0]) == pytest.approx(0.01, rel=1e-15)
    full = StorageFunction(StorageKind.FULL_LAGRANGIAN, QuadrotorParams(m=2.0, g=9.81))
    assert storage_value(full, [0, 0, 1, 0, 0, 0] + [0] * 6) == pytest.approx(19.62, rel=1e-15)
    with pytest.raises(SingularInertia):
        storage_value(V, [0, 0, np.pi / 2, 0, 0, 0])
    with pytest.raises(ValueError):
        StorageFunction(StorageKind.INNER_LOOP, P)


def test_storage_nonnegative_zero_only_at_equilibrium():
    rng = np.random.default_rng(0)
    n = 10_000
    x = rng.uniform(-1, 1, (n, 6))
    x[:, 2] = rng.uniform(-1.5, 1.5, n)
    for kind in (StorageKind.INNER_LOOP, StorageKind.INNER_LOOP_STATE_SPACE):
        V = storage_value(StorageFunction(kind, P, KP), x)
        assert np.all(V > 1e-12)
        assert storage_value(StorageFunction(kind, P, KP), np.zeros(6)) == 0
    s = rng.uniform(-1, 1, (n, 12))
    s[:, 2] = rng.uniform(0, 5, n)
    s[:, 4] = rng.uniform(-1.5, 1.5, n)
    full = StorageFunction(StorageKind.FULL_LAGRANGIAN, P)
    assert np.all(storage_value(full, s) > 1e-12)
    assert storage_value(full, np.zeros(12)) == 0


def test_zero_input_from_rest_is_constant():
    traj = simulate_inner_loop(P, KP, [0.1, 0, -0.05, 0, 0.2, 0], lambda t: np.zeros(3), 1e-3, 2.0)
    r = dissipation_check(traj, SS)
    assert r.passed and r.max_abs_residual < 1e-6
    assert np.ptp(traj.V) < 1e-9 * traj.V[0]


def _driven_run(dt, params=P, seed=1):
    rng = np.random.default_rng(seed)
    x0, v_fn = random_inner_loop_batch(rng, 4)
    return simulate_inner_loop(params, KP, x0, v_fn, dt, 2.0)


def test_driven_inner_loop_passes_and_sign_flip_fails():
    traj = _driven_run(1e-4)
    for i in range(4):
        run = traj.select(i)
        r = dissipation_check(run, SS)
        assert r.passed, r.summary()
        _, supply = supply_residual(run.t, run.V, run.y, run.v)
        flipped = dissipation_check(Trajectory(run.t, run.x, run.v, -run.y), SS)
        assert not flipped.passed
        assert flipped.max_violation == pytest.approx(2 * np.max(supply), rel=1e-3)


def test_residual_is_second_order_in_dt():
    coarse, fine = _driven_run(2e-4), _driven_run(1e-4)
    for i in range(4):
        a = dissipation_check(coarse.select(i), SS).max_abs_residual
        b = dissipation_check(fine.select(i), SS).max_abs_residual
        assert a / b >= 3.0


def test_time_shift_invariance():
    run = _driven_run(1e-4).select(0)
    a = dissipation_check(run, SS)
    b = dissipation_check(run.shifted(123.0), SS)
    assert a.max_violation == pytest.approx(b.max_violation, rel=1e-6, abs=1e-15)
    assert b.violation_time == pytest.approx(a.violation_time + 123.0)


def test_printed_rows_residual_for_asymmetric_airframe():
    # dV/dt - eta_dot^T v = phi_dot theta_dot psi_dot (Jx - Jy)(1 - 1/l), exactly
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = QuadrotorParams(l=rng.uniform(0.1, 2), Jx=rng.uniform(1e-3, 1e-2), Jy=rng.uniform(1e-3, 1e-2),
                            Jz=rng.uniform(1e-3, 2e-2), Jr=rng.uniform(1e-6, 1e-4))
        x = rng.normal(size=6)
        v = rng.normal(size=3)
        dx = inner_loop_dynamics(x, v, np.zeros(3), rng.normal(), KP, p)
        # V = 1/2 sum w_i eta_dot_i^2 + 1/2 sum k_i eta_i^2 with w = (Jx/l, Jy/l, Jz)
        w = np.array([p.Jx / p.l, p.Jy / p.l, p.Jz])
        Vdot = np.sum(w * x[1::2] * dx[1::2]) + np.sum(np.array(KP) * x[0::2] * dx[0::2])
        expected = x[1] * x[3] * x[5] * (p.Jx - p.Jy) * (1 - 1 / p.l)
        assert Vdot - x[1::2] @ v == pytest.approx(expected, rel=1e-5, abs=1e-9)


def test_lagrangian_inner_loop_dissipation_random_params():
    rng = np.random.default_rng(3)
    for _ in range(3):
        p = QuadrotorParams(Jx=rng.uniform(3e-3, 2e-2), Jy=rng.uniform(3e-3, 2e-2), Jz=rng.uniform(3e-3, 3e-2))
        x0, v_fn = random_inner_loop_batch(rng, 3)
        traj = simulate_inner_loop(p, KP, x0, v_fn, 1e-4, 0.5, model="lagrangian")
        V = StorageFunction(StorageKind.INNER_LOOP, p, KP)
        for i in range(3):
            assert dissipation_check(traj.select(i), V).passed


def test_full_lagrangian_dissipation():
    rng = np.random.default_rng(4)
    s0 = np.zeros(12)
    s0[3:6] = rng.uniform(-0.3, 0.3, 3)
    s0[6:] = rng.uniform(-0.5, 0.5, 6)
    F = sinusoid(rng.uniform(0, [1, 1, 8, 0.01, 0.01, 0.01]), rng.uniform(0.5, 5, 6), rng.uniform(0, 6, 6))
    traj = simulate_lagrangian(P, s0, F, 1e-4, 0.5)
    r = dissipation_check(traj, StorageFunction(StorageKind.FULL_LAGRANGIAN, P))
    assert r.passed, r.summary()
    assert r.min_storage >= 0


def test_dissipation_input_errors():
    t = np.array([0.0, 1.0])
    with pytest.raises(TooFewSamples):
        supply_residual(t, np.zeros(2), np.zeros((2, 3)), np.zeros((2, 3)))
    t = np.array([0.0, 1.0, 3.0])
    with pytest.raises(NonUniformTimestep):
        supply_residual(t, np.zeros(3), np.zeros((3, 3)), np.zeros((3, 3)))


def _inner_rhs(t, x, v):
    return inner_loop_dynamics(x, v, np.zeros(3), 0.0, KP, P)


def _output(X):
    return X[..., 0::2]


def test_marginal_strictness_probe_examples():
    inputs = [
        ("zero", lambda t: np.zeros(3)),
        ("constant", lambda t: np.full(3, 0.1)),
        ("decaying", lambda t: np.exp(-t) * np.ones(3)),
    ]
    x0 = np.array([0.1, 0, 0, 0, -0.1, 0])
    zero, const, decay = marginal_strictness_probe(_inner_rhs, _output, SS, x0, inputs)
    assert zero.equality_held and zero.input_vanished and zero.consistent
    assert const.equality_held and not const.input_vanished and not const.consistent
    assert decay.equality_held and decay.input_vanished and decay.consistent
    assert decay.final_input_norm < 1e-4
    assert_allclose(const.final_input_norm, np.sqrt(3) * 0.1)
