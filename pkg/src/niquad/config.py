"""Sectioned key-value run configuration (INI syntax, strict schema).

Every section is optional; missing keys take the defaults below. Unknown
sections or keys are rejected. Units: SI throughout (kg, m, s, rad, N m).

    [params]       m g l b d jx jy jz jr
    [gains]        kp_phi kp_theta kp_psi phi gamma
    [initial]      phi phi_dot theta theta_dot psi psi_dot xc1 xc2 xc3
    [reference]    phi theta psi
    [integration]  dt t_end record_every g_u
    [check]        seed grid_min grid_max grid_points p
    [outputs]      trajectory report summary

``gamma`` is either three comma-separated diagonal entries or a full 3x3
matrix with rows separated by ``;``. ``p`` (needed by ``check lemma1``)
uses the same matrix syntax.
"""

import configparser
from dataclasses import dataclass, field, fields

import numpy as np

from .controllers import InnerGains, is_positive_definite
from .errors import ConfigError
from .lin_ni import FrequencyGrid
from .quadrotor import QuadrotorParams
from .sim import Scenario

_PARAM_KEYS = {"m": "m", "g": "g", "l": "l", "b": "b", "d": "d",
               "jx": "Jx", "jy": "Jy", "jz": "Jz", "jr": "Jr"}
_STATE_KEYS = ("phi", "phi_dot", "theta", "theta_dot", "psi", "psi_dot")

SCHEMA = {
    "params": tuple(_PARAM_KEYS),
    "gains": ("kp_phi", "kp_theta", "kp_psi", "phi", "gamma"),
    "initial": _STATE_KEYS + ("xc1", "xc2", "xc3"),
    "reference": ("phi", "theta", "psi"),
    "integration": ("dt", "t_end", "record_every", "g_u"),
    "check": ("seed", "grid_min", "grid_max", "grid_points", "p"),
    "outputs": ("trajectory", "report", "summary"),
}


@dataclass
class RunConfig:
    params: QuadrotorParams = field(default_factory=QuadrotorParams)
    kp: InnerGains = field(default_factory=lambda: InnerGains(2.0, 2.0, 2.0))
    phi: float = 1.0
    gamma: np.ndarray = field(default_factory=lambda: 2.0 * np.eye(3))
    x0: np.ndarray = field(default_factory=lambda: np.array([0.2, 0.0, -0.1, 0.0, 0.15, 0.0]))
    xc0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    eta_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dt: float = 1e-3
    t_end: float = 20.0
    record_every: int = 1
    g_u: float = 0.0
    seed: int = 42
    grid_min: float = 1e-3
    grid_max: float = 1e3
    grid_points: int = 400
    P: np.ndarray = None
    trajectory: str = "trajectory.csv"
    report: str = "report.txt"
    summary: str = "sweep.csv"

    def scenario(self, **overrides):
        kw = dict(params=self.params, kp=self.kp, gamma=self.gamma, phi=self.phi, x0=self.x0,
                  xc0=self.xc0, eta_d=self.eta_d, g_u=self.g_u, dt=self.dt, t_end=self.t_end,
                  record_every=self.record_every)
        kw.update(overrides)
        return Scenario(**kw)

    def grid(self):
        return FrequencyGrid.log(self.grid_min, self.grid_max, self.grid_points)

    def as_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                value = value.tolist()
            elif isinstance(value, (QuadrotorParams, InnerGains)):
                value = {g.name: getattr(value, g.name) for g in fields(value)}
            out[f.name] = value
        return out

    def to_text(self):
        """Serialize; ``parse_config(c.to_text())`` reproduces ``c`` exactly."""
        def num(x):
            return repr(float(x))

        def mat(M):
            return ";".join(",".join(num(v) for v in row) for row in np.asarray(M))

        lines = ["[params]"]
        lines += [f"{key} = {num(getattr(self.params, attr))}" for key, attr in _PARAM_KEYS.items()]
        lines += ["", "[gains]",
                  f"kp_phi = {num(self.kp.phi)}", f"kp_theta = {num(self.kp.theta)}",
                  f"kp_psi = {num(self.kp.psi)}", f"phi = {num(self.phi)}", f"gamma = {mat(self.gamma)}"]
        lines += ["", "[initial]"]
        lines += [f"{key} = {num(v)}" for key, v in zip(_STATE_KEYS, self.x0)]
        lines += [f"xc{i + 1} = {num(v)}" for i, v in enumerate(self.xc0)]
        lines += ["", "[reference]"]
        lines += [f"{key} = {num(v)}" for key, v in zip(("phi", "theta", "psi"), self.eta_d)]
        lines += ["", "[integration]", f"dt = {num(self.dt)}", f"t_end = {num(self.t_end)}",
                  f"record_every = {self.record_every}", f"g_u = {num(self.g_u)}"]
        lines += ["", "[check]", f"seed = {self.seed}", f"grid_min = {num(self.grid_min)}",
                  f"grid_max = {num(self.grid_max)}", f"grid_points = {self.grid_points}"]
        if self.P is not None:
            lines.append(f"p = {mat(self.P)}")
        lines += ["", "[outputs]", f"trajectory = {self.trajectory}", f"report = {self.report}",
                  f"summary = {self.summary}", ""]
        return "\n".join(lines)


def _float(key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(key, f"not a number: {text!r}") from None
    if not np.isfinite(value):
        raise ConfigError(key, "must be finite")
    return value


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"not an integer: {text!r}") from None


def _positive(key, text):
    value = _float(key, text)
    if value <= 0:
        raise ConfigError(key, f"must be positive, got {value!r}")
    return value


def _matrix(key, text, diagonal_ok):
    rows = [r for r in text.split(";")]
    try:
        values = [[float(v) for v in row.split(",")] for row in rows]
    except ValueError:
        raise ConfigError(key, f"malformed matrix {text!r}") from None
    if len(values) == 1 and len(values[0]) == 3 and diagonal_ok:
        return np.diag(values[0])
    M = np.array(values, dtype=float) if all(len(r) == 3 for r in values) else None
    if M is None or M.shape != (3, 3):
        raise ConfigError(key, "expected 3 diagonal entries or a 3x3 matrix 'a,b,c;d,e,f;g,h,i'")
    return M


def parse_config(text):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(section, "unknown section")
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")

    cfg = RunConfig()

    def get(section, key):
        if parser.has_option(section, key):
            return parser.get(section, key).strip()
        return None

    params = {}
    for key, attr in _PARAM_KEYS.items():
        raw = get("params", key)
        params[attr] = getattr(cfg.params, attr) if raw is None else _positive(f"params.{key}", raw)
    cfg.params = QuadrotorParams(**params)

    gains = {}
    for key in ("kp_phi", "kp_theta", "kp_psi"):
        raw = get("gains", key)
        gains[key] = 2.0 if raw is None else _positive(f"gains.{key}", raw)
    cfg.kp = InnerGains(gains["kp_phi"], gains["kp_theta"], gains["kp_psi"])
    if (raw := get("gains", "phi")) is not None:
        cfg.phi = _positive("gains.phi", raw)
    if (raw := get("gains", "gamma")) is not None:
        cfg.gamma = _matrix("gains.gamma", raw, diagonal_ok=True)
        if not is_positive_definite(cfg.gamma):
            raise ConfigError("gains.gamma", "must be positive definite")

    x0 = cfg.x0.copy()
    for i, key in enumerate(_STATE_KEYS):
        if (raw := get("initial", key)) is not None:
            x0[i] = _float(f"initial.{key}", raw)
    cfg.x0 = x0
    xc0 = cfg.xc0.copy()
    for i in range(3):
        if (raw := get("initial", f"xc{i + 1}")) is not None:
            xc0[i] = _float(f"initial.xc{i + 1}", raw)
    cfg.xc0 = xc0
    eta_d = cfg.eta_d.copy()
    for i, key in enumerate(("phi", "theta", "psi")):
        if (raw := get("reference", key)) is not None:
            eta_d[i] = _float(f"reference.{key}", raw)
    cfg.eta_d = eta_d

    if (raw := get("integration", "dt")) is not None:
        cfg.dt = _positive("integration.dt", raw)
    if (raw := get("integration", "t_end")) is not None:
        cfg.t_end = _positive("integration.t_end", raw)
    if cfg.t_end <= cfg.dt:
        raise ConfigError("integration.t_end", "must exceed dt")
    if (raw := get("integration", "record_every")) is not None:
        cfg.record_every = _int("integration.record_every", raw)
        if cfg.record_every < 1:
            raise ConfigError("integration.record_every", "must be >= 1")
    if (raw := get("integration", "g_u")) is not None:
        cfg.g_u = _float("integration.g_u", raw)

    if (raw := get("check", "seed")) is not None:
        cfg.seed = _int("check.seed", raw)
    if (raw := get("check", "grid_min")) is not None:
        cfg.grid_min = _positive("check.grid_min", raw)
    if (raw := get("check", "grid_max")) is not None:
        cfg.grid_max = _positive("check.grid_max", raw)
    if cfg.grid_max <= cfg.grid_min:
        raise ConfigError("check.grid_max", "must exceed grid_min")
    if (raw := get("check", "grid_points")) is not None:
        cfg.grid_points = _int("check.grid_points", raw)
        if cfg.grid_points < 1:
            raise ConfigError("check.grid_points", "must be >= 1")
    if (raw := get("check", "p")) is not None:
        cfg.P = _matrix("check.p", raw, diagonal_ok=True)

    for key in SCHEMA["outputs"]:
        if (raw := get("outputs", key)) is not None:
            if not raw or "/" in raw or "\\" in raw:
                raise ConfigError(f"outputs.{key}", "must be a plain file name")
            setattr(cfg, key, raw)
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
