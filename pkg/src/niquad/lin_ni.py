"""Frequency-domain and state-space negative-imaginary tests for LTI systems.

The frequency tests sample ``H(w) = j (G(jw) - G(jw)^H)`` on a finite grid,
which is reported with every result. Systems with imaginary-axis poles are
flagged; their residue condition is not checked.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import EmptyGrid, NotSymmetric, SingularA, SingularResolvent

ALGEBRAIC_TOL = 1e-9
SPECTRAL_TOL = 1e-7
RESOLVENT_COND_LIMIT = 1e12


@dataclass(frozen=True)
class LtiStateSpace:
    """Square (m inputs, m outputs) state-space realization."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or n < 1:
            raise ValueError(f"A must be square and nonempty, got {A.shape}")
        if B.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got {B.shape}")
        m = B.shape[1]
        if m < 1 or C.shape != (m, n):
            raise ValueError(f"C must be {m}x{n}, got {C.shape}")
        D = np.zeros((m, m)) if self.D is None else np.atleast_2d(np.asarray(self.D, dtype=float))
        if D.shape != (m, m):
            raise ValueError(f"D must be {m}x{m}, got {D.shape}")
        for name, value in zip("ABCD", (A, B, C, D)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def poles(self):
        return np.linalg.eigvals(self.A)


@dataclass(frozen=True)
class FrequencyGrid:
    points: np.ndarray
    scale: str = "logarithmic"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise EmptyGrid("frequency grid is empty")
        if np.any(pts <= 0) or np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be positive and strictly increasing")
        if self.scale not in ("linear", "logarithmic"):
            raise ValueError(f"unknown grid scale {self.scale!r}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def log(cls, lo, hi, num):
        return cls(np.logspace(np.log10(lo), np.log10(hi), num), "logarithmic")

    @classmethod
    def linear(cls, lo, hi, num):
        return cls(np.linspace(lo, hi, num), "linear")

    def __len__(self):
        return self.points.size

    def describe(self):
        return f"{len(self)} {self.scale} points over [{self.points[0]:g}, {self.points[-1]:g}] rad/s"


def default_grid():
    """400 log-spaced points over [1e-4, 1e4] rad/s."""
    return FrequencyGrid.log(1e-4, 1e4, 400)


@dataclass
class CheckReport:
    """Outcome of a check, with the worst case encountered and where."""

    name: str
    passed: bool
    worst_margin: float
    witness: Any
    tolerance: float
    details: dict = field(default_factory=dict)

    def summary(self):
        lines = [
            f"check: {self.name}",
            f"passed: {str(self.passed).lower()}",
            f"worst_margin: {self.worst_margin!r}",
            f"witness: {_fmt(self.witness)}",
            f"tolerance: {self.tolerance!r}",
        ]
        for key, value in self.details.items():
            lines.append(f"{key}: {_fmt(value)}")
        return "\n".join(lines)


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, np.ndarray):
        return np.array2string(value, separator=",", max_line_width=10_000)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}={_fmt(v)}" for k, v in value.items()) + "}"
    return repr(value) if isinstance(value, float) else str(value)


def _scalar(value):
    return float(value) if isinstance(value, np.floating) else value


def transfer_at(sys, omega):
    """``G(jw) = C (jw I - A)^{-1} B + D``."""
    R = 1j * omega * np.eye(sys.n) - sys.A
    cond = np.linalg.cond(R)
    if not np.isfinite(cond) or cond > RESOLVENT_COND_LIMIT:
        raise SingularResolvent(omega, cond)
    X = np.linalg.solve(R, sys.B.astype(complex))
    return sys.C @ X + sys.D


def ni_matrix(G):
    """``j (G - G^H)``; Hermitian by construction."""
    H = 1j * (G - G.conj().T)
    scale = np.linalg.norm(H)
    assert np.linalg.norm(H - H.conj().T) <= 1e-12 * scale
    return H


def _pole_screen(sys, tol):
    poles = sys.poles()
    origin = poles[np.abs(poles) <= tol]
    rhp = poles[poles.real > tol]
    axis = poles[(np.abs(poles.real) <= tol) & (np.abs(poles.imag) > tol)]
    return poles, origin, rhp, axis


def _grid_sweep(sys, grid):
    """Yield (omega, H or None) in grid order; None marks a singular resolvent."""
    for omega in grid.points:
        try:
            yield omega, ni_matrix(transfer_at(sys, omega))
        except SingularResolvent:
            yield omega, None


def ni_frequency_test(sys, grid=None, tol=SPECTRAL_TOL):
    """Negative-imaginary test: no poles at 0 or in Re s > 0, and
    ``lambda_min(H(w)) >= -tol`` on every grid point."""
    grid = default_grid() if grid is None else grid
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    poles, origin, rhp, axis = _pole_screen(sys, tol)
    worst, witness, singular = np.inf, None, []
    for omega, H in _grid_sweep(sys, grid):
        if H is None:
            singular.append(omega)
            continue
        lam = np.linalg.eigvalsh(H)[0]
        if lam < worst:
            worst, witness = lam, omega
    poles_ok = origin.size == 0 and rhp.size == 0
    details = {
        "grid": grid.describe(),
        "pole_condition": poles_ok,
        "max_pole_real": float(poles.real.max()),
        "singular_points": singular,
        "minimality": "unchecked",
    }
    if axis.size:
        details["imaginary_axis_poles"] = "present; residue condition not checked"
    if origin.size:
        details["pole_at_origin"] = True
    passed = bool(poles_ok and worst >= -tol)
    return CheckReport("ni", passed, float(worst), _scalar(witness), tol, details)


def sni_frequency_test(sys, grid=None, tol=SPECTRAL_TOL):
    """Strict negative-imaginary test.

    Passes iff every eigenvalue of A has real part below ``-tol`` and
    ``lambda_min(H(w)) > tol * ||H(w)||`` at every grid point. The reported
    margin is ``min_w (lambda_min(H) - tol ||H||)``.
    """
    grid = default_grid() if grid is None else grid
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    poles = sys.poles()
    poles_ok = bool(np.all(poles.real < -tol))
    worst, witness, singular, worst_lambda = np.inf, None, [], np.inf
    for omega, H in _grid_sweep(sys, grid):
        if H is None:
            singular.append(omega)
            continue
        lam = np.linalg.eigvalsh(H)
        margin = lam[0] - tol * np.max(np.abs(lam))
        if margin < worst:
            worst, witness, worst_lambda = margin, omega, lam[0]
    details = {
        "grid": grid.describe(),
        "pole_condition": poles_ok,
        "max_pole_real": float(poles.real.max()),
        "min_eigenvalue_at_witness": float(worst_lambda),
        "singular_points": singular,
        "minimality": "unchecked",
    }
    passed = bool(poles_ok and not singular and worst > 0)
    return CheckReport("sni", passed, float(worst), _scalar(witness), tol, details)


def sni_state_space_test(sys, P, grid=None, tol=ALGEBRAIC_TOL):
    """Check the state-space SNI conditions for a supplied ``P``.

    (i)   det(A) != 0 and D = D^T;
    (ii)  P > 0, A P^-1 + P^-1 A^T <= 0 and B + A P^-1 C^T = 0;
    (iii) with L^T L = -A P^-1 - P^-1 A^T, the system (A, B, L P A^-1, 0)
          has full column rank m at every grid frequency.

    Raises SingularA when det(A) vanishes, since (iii) cannot be formed.
    The realization is assumed minimal; that is not verified.
    """
    grid = default_grid() if grid is None else grid
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape != (sys.n, sys.n):
        raise ValueError(f"P must be {sys.n}x{sys.n}")
    if np.linalg.norm(P - P.T) > tol * max(1.0, np.linalg.norm(P)):
        raise NotSymmetric("P must be symmetric")
    A, B, C, D = sys.A, sys.B, sys.C, sys.D

    det = np.linalg.det(A)
    det_scale = max(1.0, np.linalg.norm(A, 2)) ** sys.n
    if abs(det) <= tol * det_scale:
        raise SingularA(det)
    d_asym = float(np.linalg.norm(D - D.T))
    cond_i = {"passed": bool(d_asym <= tol), "det_A": float(det), "D_asymmetry": d_asym}

    p_min = float(np.linalg.eigvalsh(P)[0])
    Pinv = np.linalg.inv(P)
    S = A @ Pinv + Pinv @ A.T
    s_max = float(np.linalg.eigvalsh(S)[-1])
    eq_res = float(np.linalg.norm(B + A @ Pinv @ C.T))
    eq_tol = tol * max(1.0, np.linalg.norm(B))
    cond_ii = {
        "passed": bool(p_min > tol and s_max <= tol and eq_res <= eq_tol),
        "P_min_eigenvalue": p_min,
        "lyapunov_max_eigenvalue": s_max,
        "equality_residual": eq_res,
    }

    lam, Q = np.linalg.eigh(-S)
    lam = np.where(lam < 0, 0.0, lam)
    L = np.sqrt(lam)[:, None] * Q.T
    Cm = L @ P @ np.linalg.inv(A)
    worst_ratio, witness = np.inf, None
    for omega in grid.points:
        R = 1j * omega * np.eye(sys.n) - A
        Mw = Cm @ np.linalg.solve(R, B.astype(complex))
        sv = np.linalg.svd(Mw, compute_uv=False)
        # n < m rows can never reach column rank m
        full = sv.size == sys.m and sv[0] > 0
        ratio = sv[-1] / sv[0] if full else 0.0
        if ratio < worst_ratio:
            worst_ratio, witness = ratio, omega
    cond_iii = {"passed": bool(worst_ratio > tol), "min_singular_ratio": float(worst_ratio),
                "witness": _scalar(witness)}

    margins = {
        "i": tol - d_asym,
        "ii": min(p_min - tol, tol - s_max, eq_tol - eq_res),
        "iii": worst_ratio - tol,
    }
    worst_key = min(margins, key=margins.get)
    details = {
        "condition_i": cond_i,
        "condition_ii": cond_ii,
        "condition_iii": cond_iii,
        "grid": grid.describe(),
        "minimality": "unchecked",
    }
    passed = bool(cond_i["passed"] and cond_ii["passed"] and cond_iii["passed"])
    return CheckReport("lemma1", passed, float(margins[worst_key]), worst_key, tol, details)
