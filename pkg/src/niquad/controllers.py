"""Inner proportional attitude loop, outer integral resonant controller (IRC),
and the steady-state conditions that tie them together.

The IRC is realized as ``xc' = -Gamma Phi xc + Gamma uc``, ``yc = xc`` with
``Phi = phi I``; its transfer function is ``(sI + Gamma Phi)^-1 Gamma`` and
its DC gain is ``Phi^-1``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySamples, NonPositiveGain
from .lin_ni import CheckReport, FrequencyGrid, LtiStateSpace, sni_frequency_test
from .quadrotor import QuadrotorParams, inner_loop_dynamics


@dataclass(frozen=True)
class InnerGains:
    """Diagonal proportional gains (N m / rad) for roll, pitch and yaw."""

    phi: float
    theta: float
    psi: float

    def __post_init__(self):
        for name in ("phi", "theta", "psi"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise NonPositiveGain(f"k_p^{name} must be positive, got {value!r}")

    @classmethod
    def uniform(cls, k):
        return cls(k, k, k)

    def __iter__(self):
        return iter((self.phi, self.theta, self.psi))

    def as_array(self):
        return np.array([self.phi, self.theta, self.psi])


@dataclass
class IrcController:
    """Integral resonant controller with mutable state ``xc``."""

    gamma: np.ndarray
    phi: float
    xc: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.gamma = np.atleast_2d(np.asarray(self.gamma, dtype=float))
        if self.gamma.shape != (3, 3):
            raise ValueError("Gamma must be 3x3")
        if not self.phi > 0:
            raise ValueError(f"phi must be positive, got {self.phi!r}")
        if not is_positive_definite(self.gamma):
            raise ValueError("Gamma must be positive definite")
        self.xc = np.asarray(self.xc, dtype=float).copy()

    @property
    def Phi(self):
        return self.phi * np.eye(3)

    def realization(self):
        return irc_realization(self.gamma, self.phi)

    def output(self):
        return self.xc.copy()


def is_positive_definite(M, tol=0.0):
    """Positive definiteness of the symmetric part."""
    M = np.asarray(M, dtype=float)
    return bool(np.linalg.eigvalsh(0.5 * (M + M.T))[0] > tol)


def irc_realization(gamma, phi):
    """``(A, B, C, D) = (-Gamma Phi, Gamma, I, 0)``. No validation, so that
    hypothesis reports can inspect invalid configurations."""
    gamma = np.asarray(gamma, dtype=float)
    return LtiStateSpace(-phi * gamma, gamma, np.eye(3), np.zeros((3, 3)))


def inner_torque(eta, eta_d, v, kp):
    """``(u2, u3, u4) = -Kp (eta - eta_d) + v``, per axis."""
    k = np.asarray(tuple(kp), dtype=float)
    return -k * (np.asarray(eta, dtype=float) - np.asarray(eta_d, dtype=float)) + np.asarray(v, dtype=float)


def irc_derivative(c, uc):
    return -c.phi * (c.gamma @ c.xc) + c.gamma @ np.asarray(uc, dtype=float)


def dc_gain(c):
    return np.eye(3) / c.phi


@dataclass
class GainBoundReport:
    gamma_sq: float
    bound: float
    satisfied: bool

    def summary(self):
        return (
            "check: gain-bound\n"
            f"gamma_sq: {self.gamma_sq!r}\n"
            f"bound: {self.bound!r}\n"
            f"satisfied: {str(self.satisfied).lower()}"
        )


def gain_bound_check(kp, phi):
    """``gamma^2 = max_i 1/k_i^2 / phi^2``; satisfied iff ``gamma^2 < 1`` (strict)."""
    if not phi > 0:
        raise ValueError("phi must be positive")
    k = np.asarray(tuple(kp), dtype=float)
    bound = float(np.max(1.0 / k**2))
    gamma_sq = bound / phi**2
    return GainBoundReport(gamma_sq, bound, gamma_sq < 1.0)


def steady_state_map(v_bar, kp):
    """Equilibrium of the inner loop under constant ``v_bar`` (eta_d = 0)."""
    k = np.asarray(tuple(kp), dtype=float)
    if np.any(k <= 0):
        raise NonPositiveGain("gains must be positive")
    v_bar = np.asarray(v_bar, dtype=float)
    x = np.zeros(v_bar.shape[:-1] + (6,))
    x[..., 0::2] = v_bar / k
    return x


def steady_state_residual(v_bar, kp, params=None):
    params = QuadrotorParams() if params is None else params
    x_bar = steady_state_map(v_bar, kp)
    return inner_loop_dynamics(x_bar, v_bar, np.zeros(3), 0.0, kp, params)


def controller_output_at_steady_state(v_bar, kp, phi):
    """``yc = Phi^-1 (x1, x3, x5)`` for the equilibrium reached under ``v_bar``."""
    return steady_state_map(v_bar, kp)[..., 0::2] / phi


def sector_bound_verify(kp, phi, samples, tol=1e-12):
    """Sector condition ``yc^T yc <= gamma^2 v^T v`` with ``0 < gamma < 1``.

    The three axis unit vectors are appended to ``samples``; they attain the
    supremum of the ratio, so a violating witness is always found when
    ``gamma^2 >= 1``. The margin is ``1 - max ratio``.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise EmptySamples("sector_bound_verify needs at least one sample")
    report = gain_bound_check(kp, phi)
    v = np.vstack([samples, np.eye(3)])
    yc = controller_output_at_steady_state(v, kp, phi)
    num = np.sum(yc**2, axis=-1)
    den = np.sum(v**2, axis=-1)
    bound_ok = bool(np.all(num <= report.gamma_sq * den + tol))
    nz = den > 0
    ratios = np.zeros_like(num)
    ratios[nz] = num[nz] / den[nz]
    i = int(np.argmax(ratios))
    worst = float(ratios[i])
    passed = bound_ok and worst < 1.0 and report.satisfied
    details = {
        "gamma_sq": report.gamma_sq,
        "max_ratio": worst,
        "bound_consistent": bound_ok,
        "samples": int(v.shape[0]),
    }
    return CheckReport("sector", passed, 1.0 - worst, v[i], tol, details)


def _sample_directions(seed, count=64):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 3))
    return v * rng.uniform(0.1, 2.0, size=(count, 1)) / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass
class HypothesisReport:
    """Per-hypothesis results for the NI feedback stability theorem."""

    checks: dict

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks.values() if c["passed"] is not None)

    def failed(self):
        return [k for k, c in self.checks.items() if c["passed"] is False]

    def summary(self):
        lines = ["check: theorem", f"passed: {str(self.passed).lower()}"]
        for key, c in self.checks.items():
            status = "assumed" if c["passed"] is None else ("pass" if c["passed"] else "fail")
            lines.append(f"{key}: {status} ({c['what']})")
        return "\n".join(lines)


def theorem_hypotheses_report(kp, phi, gamma, grid=None, params=None, seed=42, run_dissipation=True):
    """Collect evidence for each hypothesis of the closed-loop stability result.

    (a) plant is nonlinear NI (dissipation on a seeded scenario batch),
    (b) IRC passes the SNI frequency test,
    (c) inner-loop equilibria solve the steady-state equations,
    (d) controller is LTI with Gamma > 0 and -Gamma Phi Hurwitz,
    (e) y^T yc >= 0 at steady state,
    (f) sector bound with gamma < 1,
    (g) zero-state observability, which is assumed, not verified.
    """
    params = QuadrotorParams() if params is None else params
    grid = FrequencyGrid.log(1e-3, 1e3, 400) if grid is None else grid
    gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
    k = np.asarray(tuple(kp), dtype=float)
    samples = _sample_directions(seed)
    checks = {}

    if run_dissipation:
        from .sim import plant_dissipation_batch

        reports = plant_dissipation_batch(params, kp, seed=seed)
        ok = all(r.passed for r in reports)
        worst = max(r.max_violation for r in reports)
        checks["a_plant_nonlinear_ni"] = {"passed": ok, "what": f"{len(reports)} runs, max violation {worst:.3g}"}
    else:
        checks["a_plant_nonlinear_ni"] = {"passed": None, "what": "dissipation batch skipped"}

    gamma_pd = is_positive_definite(gamma)
    if phi > 0:
        sni = sni_frequency_test(irc_realization(gamma, phi), grid)
        b_ok = gamma_pd and sni.passed
        b_what = f"SNI margin {sni.worst_margin:.3g} at w={sni.witness}"
    else:
        b_ok, b_what = False, "phi must be positive"
    checks["b_controller_sni"] = {"passed": b_ok, "what": b_what}

    res = np.abs(steady_state_residual(samples, k, params)).max()
    nonzero = np.all(np.any(steady_state_map(samples, k) != 0, axis=-1))
    checks["c_plant_steady_state"] = {"passed": bool(res <= 1e-12 and nonzero), "what": f"max residual {res:.3g}"}

    eig = np.linalg.eigvals(-phi * gamma)
    d_ok = gamma_pd and phi > 0 and bool(np.all(eig.real < 0))
    checks["d_controller_steady_state"] = {"passed": d_ok, "what": f"max Re eig(-Gamma Phi) {eig.real.max():.3g}"}

    if phi > 0:
        y = steady_state_map(samples, k)[..., 0::2]
        yc = y / phi
        inner = np.sum(y * yc, axis=-1)
        e_ok = bool(np.all(inner >= 0))
        e_what = f"min y^T yc {inner.min():.3g}"
    else:
        e_ok, e_what = False, "phi must be positive"
    checks["e_steady_state_inner_product"] = {"passed": e_ok, "what": e_what}

    if phi > 0:
        sector = sector_bound_verify(k, phi, samples)
        f_ok = sector.passed
        f_what = f"gamma^2 {sector.details['gamma_sq']:.6g}"
    else:
        f_ok, f_what = False, "phi must be positive"
    checks["f_sector_bound"] = {"passed": f_ok, "what": f_what}
    checks["g_zero_state_observability"] = {"passed": None, "what": "hypothesis, not verified"}
    return HypothesisReport(checks)
