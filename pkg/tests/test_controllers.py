import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from niquad.controllers import (
    InnerGains,
    IrcController,
    controller_output_at_steady_state,
    dc_gain,
    gain_bound_check,
    inner_torque,
    irc_derivative,
    irc_realization,
    sector_bound_verify,
    steady_state_map,
    steady_state_residual,
    theorem_hypotheses_report,
)
from niquad.errors import EmptySamples, NonPositiveGain
from niquad.lin_ni import FrequencyGrid, transfer_at
from niquad.sim import integrate

gains = st.floats(0.05, 50)
GRID = FrequencyGrid.log(1e-3, 1e3, 100)


def test_inner_gains_validation():
    assert list(InnerGains.uniform(2.0)) == [2.0, 2.0, 2.0]
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(NonPositiveGain):
            InnerGains(1.0, bad, 1.0)


def test_inner_torque_examples():
    kp = InnerGains(5.0, 1.0, 1.0)
    assert_allclose(inner_torque(np.ones(3), np.ones(3), np.zeros(3), kp), 0)
    assert_allclose(inner_torque([0.2, 0, 0], np.zeros(3), np.zeros(3), kp), [-1, 0, 0])
    assert_allclose(inner_torque(np.ones(3), np.ones(3), [1, 2, 3], kp), [1, 2, 3])


def test_irc_derivative_examples():
    c = IrcController(np.eye(3), 2.0)
    assert_allclose(irc_derivative(c, np.zeros(3)), 0)
    c.xc = np.array([1.0, 0, 0])
    assert_allclose(irc_derivative(c, np.zeros(3)), [-2, 0, 0])


def test_irc_step_response_reaches_dc_gain():
    rng = np.random.default_rng(0)
    G = rng.normal(size=(3, 3))
    c = IrcController(G @ G.T + 0.5 * np.eye(3), 1.7)
    u_bar = np.array([0.3, -0.2, 0.5])

    def rhs(t, x):
        c.xc = x
        return irc_derivative(c, u_bar)

    _, X = integrate(rhs, np.zeros(3), 0.0, 1e-2, 5000)
    assert_allclose(X[-1], u_bar / 1.7, atol=1e-9)


def test_irc_controller_validation():
    with pytest.raises(ValueError):
        IrcController(-np.eye(3), 1.0)
    with pytest.raises(ValueError):
        IrcController(np.eye(3), 0.0)
    with pytest.raises(ValueError):
        IrcController(np.eye(2), 1.0)


def test_dc_gain_examples():
    assert_allclose(dc_gain(IrcController(np.eye(3), 2.0)), 0.5 * np.eye(3))
    assert_allclose(dc_gain(IrcController(np.eye(3), 1.0)), np.eye(3))
    rng = np.random.default_rng(1)
    for _ in range(20):
        G = rng.normal(size=(3, 3))
        c = IrcController(G @ G.T + 0.1 * np.eye(3), rng.uniform(0.2, 5))
        # (Gamma Phi)^-1 Gamma computed independently of dc_gain
        direct = np.linalg.solve(c.phi * c.gamma, c.gamma)
        assert_allclose(dc_gain(c), direct, atol=1e-9)
        assert_allclose(transfer_at(c.realization(), 1e-8), dc_gain(c), atol=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=9, max_size=9), st.floats(0.01, 100))
def test_minus_gamma_phi_is_hurwitz(entries, phi):
    G = np.array(entries).reshape(3, 3)
    gamma = G @ G.T + 1e-2 * np.eye(3)
    assert np.all(np.linalg.eigvals(irc_realization(gamma, phi).A).real < 0)


def test_gain_bound_examples():
    r = gain_bound_check(InnerGains(2, 2, 2), 1.0)
    assert r.gamma_sq == 0.25 and r.satisfied
    r = gain_bound_check(InnerGains(1, 1, 1), 1.0)
    assert r.gamma_sq == 1.0 and not r.satisfied
    r = gain_bound_check(InnerGains(0.5, 2, 2), 1.0)
    assert r.gamma_sq == 4.0 and not r.satisfied
    assert gain_bound_check(InnerGains(2, 2, 2), 0.1).gamma_sq == pytest.approx(25.0)


@settings(max_examples=200, deadline=None)
@given(gains, gains, gains, st.floats(0.05, 20), st.floats(0.1, 10))
def test_gain_bound_scaling(k1, k2, k3, phi, c):
    base = gain_bound_check((k1, k2, k3), phi).gamma_sq
    scaled = gain_bound_check((c * k1, c * k2, c * k3), phi).gamma_sq
    assert scaled == pytest.approx(base / c**2, rel=1e-12)


def test_steady_state_examples():
    kp = InnerGains(4.0, 2.0, 1.0)
    assert_allclose(steady_state_map(np.zeros(3), kp), 0)
    x = steady_state_map([1.0, 0, 0], kp)
    assert_allclose(x, [0.25, 0, 0, 0, 0, 0])
    rng = np.random.default_rng(2)
    v = rng.normal(size=(100, 3))
    assert np.max(np.abs(steady_state_residual(v, kp))) <= 1e-12


def test_sector_examples():
    kp = InnerGains(2, 2, 2)
    r = sector_bound_verify(kp, 1.0, np.zeros((1, 3)))
    assert r.passed
    yc = controller_output_at_steady_state(np.ones(3), kp, 1.0)
    assert yc @ yc == 0.75
    r = sector_bound_verify(kp, 1.0, np.ones((1, 3)))
    assert r.passed and r.details["max_ratio"] == pytest.approx(0.25)
    rng = np.random.default_rng(3)
    r = sector_bound_verify(InnerGains(2, 3, 4), 1.0, rng.normal(size=(10_000, 3)))
    assert r.details["max_ratio"] == pytest.approx(0.25)
    assert_allclose(np.abs(r.witness) / np.linalg.norm(r.witness), [1, 0, 0])


def test_sector_failure_produces_witness():
    r = sector_bound_verify(InnerGains(0.5, 2, 2), 1.0, np.zeros((1, 3)))
    assert not r.passed and r.worst_margin < 0
    assert_allclose(r.witness, [1, 0, 0])
    with pytest.raises(EmptySamples):
        sector_bound_verify(InnerGains(2, 2, 2), 1.0, np.empty((0, 3)))


@settings(max_examples=100, deadline=None)
@given(gains, gains, gains, st.floats(0.05, 20))
def test_sector_passes_iff_gain_bound(k1, k2, k3, phi):
    kp = (k1, k2, k3)
    gamma_sq = gain_bound_check(kp, phi).gamma_sq
    assert sector_bound_verify(kp, phi, np.ones((1, 3))).passed == (gamma_sq < 1)


def test_theorem_report_compliant():
    r = theorem_hypotheses_report(InnerGains(2, 2, 2), 1.0, 2 * np.eye(3), GRID)
    assert r.passed and r.failed() == []
    assert r.checks["g_zero_state_observability"]["passed"] is None
    assert "assumed" in r.summary()


def test_theorem_report_sector_violation_fails_only_f():
    r = theorem_hypotheses_report(InnerGains(2, 2, 2), 0.4, 2 * np.eye(3), GRID)
    assert r.failed() == ["f_sector_bound"]


def test_theorem_report_indefinite_gamma():
    r = theorem_hypotheses_report(InnerGains(2, 2, 2), 1.0, np.diag([1.0, -1.0, 1.0]), GRID,
                                  run_dissipation=False)
    assert set(r.failed()) == {"b_controller_sni", "d_controller_steady_state"}
