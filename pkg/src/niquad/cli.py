"""Command-line front end.

    niquad simulate <config> --out <dir>
    niquad check {ni,sni,lemma1,gain-bound,sector,dissipation,theorem} <config>
    niquad sweep <config> --axis {phi,kp} --values v1,v2,... [--out <dir>]

Exit codes: 0 success/pass, 1 usage or config error, 2 check failed,
3 simulation diverged. ``NIQUAD_LOG=debug|info`` sets log verbosity only.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import load_config
from .controllers import InnerGains, gain_bound_check, irc_realization, sector_bound_verify, theorem_hypotheses_report
from .errors import ConfigError, SimulationDiverged, SingularA
from .lin_ni import ni_frequency_test, sni_frequency_test, sni_state_space_test
from .sim import convergence_metrics, simulate
from .storage_ni import StorageFunction, StorageKind, dissipation_check

EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_DIVERGED = 0, 1, 2, 3

TRAJECTORY_HEADER = "t,phi,phi_dot,theta,theta_dot,psi,psi_dot,xc1,xc2,xc3,u2,u3,u4,v1,v2,v3,V"

# finite-difference dissipation residual is O(dt^2); checks run at least this fine
DISSIPATION_DT = 1e-4
DISSIPATION_HORIZON = 5.0

log = logging.getLogger("niquad")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    return repr(value) if isinstance(value, float) else str(value)


def write_trajectory_csv(path, traj):
    cols = [traj.t[:, None], traj.x, traj.x_c, traj.u, traj.v, traj.V[:, None]]
    data = np.hstack(cols)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",", newline="\n")


def _run_report(cfg, metrics, gain, diverged=None):
    lines = [
        "command: simulate",
        f"completed: {str(diverged is None).lower()}",
    ]
    if diverged is not None:
        lines.append(f"diverged_at: {diverged!r}")
    lines += [f"{k}: {_fmt(v)}" for k, v in metrics.items()]
    lines += [
        f"gamma_sq: {gain.gamma_sq!r}",
        f"gain_bound_satisfied: {str(gain.satisfied).lower()}",
        f"dt: {cfg.dt!r}",
        f"t_end: {cfg.t_end!r}",
    ]
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gain = gain_bound_check(cfg.kp, cfg.phi)
    try:
        traj = simulate(cfg.scenario())
        code, diverged = EXIT_OK, None
    except SimulationDiverged as exc:
        traj, code, diverged = exc.trajectory, EXIT_DIVERGED, exc.t
        log.error("simulation diverged at t=%g", exc.t)
    write_trajectory_csv(out / cfg.trajectory, traj)
    metrics = convergence_metrics(traj, cfg.eta_d)
    (out / cfg.report).write_text(_run_report(cfg, metrics, gain, diverged), encoding="ascii", newline="\n")
    print(f"trajectory: {out / cfg.trajectory}")
    print(f"report: {out / cfg.report}")
    print(f"final_error_rad: {_fmt(metrics['final_error_rad'])}")
    return code


def _check_dissipation(cfg):
    dt = min(cfg.dt, DISSIPATION_DT)
    t_end = min(cfg.t_end, DISSIPATION_HORIZON)
    traj = simulate(cfg.scenario(dt=dt, t_end=t_end, record_every=1))
    storage = StorageFunction(StorageKind.INNER_LOOP_STATE_SPACE, cfg.params, tuple(cfg.kp), tuple(cfg.eta_d))
    return dissipation_check(traj, storage)


def cmd_check(cfg, which):
    realization = irc_realization(cfg.gamma, cfg.phi)
    if which == "ni":
        report = ni_frequency_test(realization, cfg.grid())
    elif which == "sni":
        report = sni_frequency_test(realization, cfg.grid())
    elif which == "lemma1":
        if cfg.P is None:
            raise ConfigError("check.p", "required by 'check lemma1'")
        try:
            report = sni_state_space_test(realization, cfg.P, cfg.grid())
        except SingularA as exc:
            print(f"check: lemma1\npassed: false\nfailed_condition: {exc.condition}\nreason: {exc}")
            return EXIT_FAILED
    elif which == "gain-bound":
        report = gain_bound_check(cfg.kp, cfg.phi)
        print(report.summary())
        return EXIT_OK if report.satisfied else EXIT_FAILED
    elif which == "sector":
        rng = np.random.default_rng(cfg.seed)
        report = sector_bound_verify(cfg.kp, cfg.phi, rng.normal(size=(1000, 3)))
    elif which == "dissipation":
        report = _check_dissipation(cfg)
    elif which == "theorem":
        report = theorem_hypotheses_report(cfg.kp, cfg.phi, cfg.gamma, cfg.grid(), cfg.params, cfg.seed)
    else:
        raise ValueError(which)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAILED


def _parse_values(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--values", f"not a list of numbers: {text!r}") from None
    if not values or any(not np.isfinite(v) or v <= 0 for v in values):
        raise ConfigError("--values", "need one or more positive values")
    return values


def cmd_sweep(cfg, axis, values, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = ["value,gamma_sq,satisfied,settling_time,final_error"]
    for value in values:
        run = replace(cfg, phi=value) if axis == "phi" else replace(cfg, kp=InnerGains.uniform(value))
        gain = gain_bound_check(run.kp, run.phi)
        try:
            metrics = convergence_metrics(simulate(run.scenario()), run.eta_d)
            settling, final = metrics["settling_time_s"], metrics["final_error_rad"]
        except SimulationDiverged as exc:
            log.warning("%s=%g diverged at t=%g", axis, value, exc.t)
            settling, final = None, float("inf")
        rows.append(",".join([repr(value), repr(gain.gamma_sq), str(gain.satisfied).lower(),
                              "" if settling is None else repr(settling), repr(final)]))
        log.info("%s=%g gamma_sq=%g final_error=%g", axis, value, gain.gamma_sq, final)
    path = out / cfg.summary
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"summary: {path}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="niquad", description="NI attitude control toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run the closed loop and write CSV + report")
    p.add_argument("config")
    p.add_argument("--out", required=True)

    p = sub.add_parser("check", help="run one verification")
    p.add_argument("which", choices=["ni", "sni", "lemma1", "gain-bound", "sector", "dissipation", "theorem"])
    p.add_argument("config")

    p = sub.add_parser("sweep", help="simulate across values of phi or a uniform Kp")
    p.add_argument("config")
    p.add_argument("--axis", required=True, choices=["phi", "kp"])
    p.add_argument("--values", required=True)
    p.add_argument("--out", default=".")
    return parser


def main(argv=None):
    level = os.environ.get("NIQUAD_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out)
        if args.command == "check":
            return cmd_check(cfg, args.which)
        return cmd_sweep(cfg, args.axis, _parse_values(args.values), args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
