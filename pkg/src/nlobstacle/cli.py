"""Command-line entry point.

Subcommands: ``run``, ``lambda``, ``continuity``, ``jump``, ``growth``,
``classical`` and ``selftest``.  Exit codes: 0 success, 1 a check failed,
2 bad configuration.

A configuration file is INI-style and must define every key below; ``auto``
picks the built-in default for ``dt``, ``T``, ``theta`` and ``L0``::

    [grid]
    n = 128
    [solver]
    eps = 1e-3
    dt = auto
    T = auto
    theta = auto
    L0 = auto
    scheme = imex
    [experiment]
    scenario = continuity
    eta_list = 0.1, 0.08
    eps_list = 1e-2, 1e-3, 1e-4
    [io]
    outdir = out

Command-line flags override the file.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from pathlib import Path

from .errors import ConfigError, ObstacleError, UnknownScenario, WrongRegime
from .experiments import EXPERIMENTS, RUNNERS, ExperimentConfig, initial_field
from .initdata import SCENARIOS, preset_scenario
from .selfcheck import run_selfcheck
from .solver import SCHEMES, default_L0, run_regularized
from .variational import VariationalReport, report

log = logging.getLogger("nlobstacle")

REQUIRED_KEYS = {
    "grid": ("n",),
    "solver": ("eps", "dt", "T", "theta", "L0", "scheme"),
    "experiment": ("scenario", "eta_list", "eps_list"),
    "io": ("outdir",),
}
OPTIONAL_KEYS = {"solver": ("record_every",)}
DEFAULT_OUTDIR = "nlobstacle-out"


def read_config(path) -> dict:
    """Parse and validate a configuration file into ``{(section, key): str}``."""
    parser = configparser.ConfigParser()
    # keys are case sensitive (T vs t)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    raw = {}
    for section, keys in REQUIRED_KEYS.items():
        for key in keys:
            if not parser.has_option(section, key):
                raise ConfigError(f"missing key [{section}] {key}")
            raw[section, key] = parser.get(section, key).strip()
    for section, keys in OPTIONAL_KEYS.items():
        for key in keys:
            if parser.has_option(section, key):
                raw[section, key] = parser.get(section, key).strip()
    return raw


def _number(raw, section, key, kind=float, auto_ok=False):
    text = raw[section, key]
    if auto_ok and text.lower() == "auto":
        return None
    try:
        value = kind(text)
    except ValueError:
        raise ConfigError(f"bad value for [{section}] {key}: {text!r}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"bad value for [{section}] {key}: {text!r}")
    return value


def _float_list(text, what) -> tuple:
    try:
        values = tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"bad list for {what}: {text!r}") from None
    if not values:
        raise ConfigError(f"empty list for {what}")
    return values


def build_config(experiment: str, args, raw: dict | None = None) -> ExperimentConfig:
    """Defaults for ``experiment``, then the config file, then command-line flags."""
    raw = raw or {}
    n = args.n
    if n is None and raw:
        n = _number(raw, "grid", "n", int)
    cfg = ExperimentConfig.default(experiment, n=n)
    solver = cfg.solver
    scenario = cfg.scenario
    eta_list, eps_list = cfg.eta_list, cfg.eps_list
    outdir = Path(DEFAULT_OUTDIR)
    L0 = None
    if raw:
        dt = _number(raw, "solver", "dt", auto_ok=True)
        T = _number(raw, "solver", "T", auto_ok=True)
        steps = solver.nsteps
        dt = solver.dt if dt is None else dt
        T = steps * dt if T is None else T
        theta = _number(raw, "solver", "theta", auto_ok=True)
        L0 = _number(raw, "solver", "L0", auto_ok=True)
        scheme = raw["solver", "scheme"]
        if scheme not in SCHEMES:
            raise ConfigError(f"bad value for [solver] scheme: {scheme!r}; expected one of {SCHEMES}")
        every = solver.record_every
        if ("solver", "record_every") in raw:
            every = _number(raw, "solver", "record_every", int)
        try:
            solver = solver.with_(eps=_number(raw, "solver", "eps"), dt=dt, T=T,
                                  theta=math.nan if theta is None else theta, scheme=scheme,
                                  record_every=every)
        except ValueError as exc:
            raise ConfigError(f"bad [solver] section: {exc}") from None
        scenario = raw["experiment", "scenario"]
        eta_list = _float_list(raw["experiment", "eta_list"], "[experiment] eta_list")
        eps_list = _float_list(raw["experiment", "eps_list"], "[experiment] eps_list")
        outdir = Path(raw["io", "outdir"])
    if args.scenario:
        scenario = args.scenario
    if args.eps:
        eps_list = _float_list(args.eps, "--eps")
        solver = solver.with_(eps=eps_list[0])
    if args.outdir:
        outdir = Path(args.outdir)
    if scenario not in SCENARIOS:
        raise UnknownScenario(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    return cfg.with_(scenario=scenario, solver=solver, eta_list=eta_list, eps_list=eps_list,
                     outdir=outdir, seed=args.seed, L0=L0)


# --------------------------------------------------------------------------
# subcommands


def cmd_experiment(name, args, raw) -> int:
    cfg = build_config(name, args, raw)
    rep = RUNNERS[name](cfg)
    paths = rep.write(cfg.outdir)
    sys.stdout.write(rep.summary_text())
    for p in paths:
        log.info("wrote %s", p)
    return 0 if rep.passed else 1


def cmd_lambda(args, raw) -> int:
    cfg = build_config("continuity", args, raw)
    g, data = preset_scenario(cfg.scenario, cfg.n)
    row = report(g, data).as_row()
    for key in VariationalReport.COLUMNS:
        print(f"{key:<14} {row[key]}")
    if args.outdir or raw:
        path = cfg.outdir / "lambda" / f"{cfg.scenario}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        cols = VariationalReport.COLUMNS
        vals = [repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols]
        path.write_text(",".join(cols) + "\n" + ",".join(vals) + "\n")
        log.info("wrote %s", path)
    return 0


def cmd_run(args, raw) -> int:
    cfg = build_config("continuity", args, raw)
    g, data = preset_scenario(cfg.scenario, cfg.n)
    eps = cfg.solver.eps
    u0e, m, theta = initial_field(g, data, eps, cfg.solver.theta)
    L0 = cfg.L0 or default_L0(g.g0, theta, m)
    p = cfg.solver.with_(eps=eps, theta=theta, L0=L0)
    tr = run_regularized(u0e, g, p)
    run_dir = cfg.outdir / "run" / cfg.scenario
    tr.write_csv(run_dir / "trajectory.csv")
    snaps = tr.write_snapshots(run_dir)
    print(f"scenario {cfg.scenario}: {len(tr)} records, lambda {tr.lambdas[0]:.6g} -> "
          f"{tr.lambdas[-1]:.6g}, mass {tr.masses[0]:.6g} -> {tr.masses[-1]:.6g}")
    print(f"wrote {run_dir / 'trajectory.csv'} and {len(snaps)} snapshots")
    return 0


def cmd_selftest(args, raw) -> int:
    results = run_selfcheck(args.seed)
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI configuration file")
    common.add_argument("--scenario", help=f"one of {', '.join(SCENARIOS)}")
    common.add_argument("--n", type=int, help="cells per side")
    common.add_argument("--eps", help="comma-separated regularization parameters")
    common.add_argument("--outdir", type=Path, help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(
        prog="nlobstacle",
        description="Mass-conserving nonlocal obstacle problem on the flat torus.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one regularized trajectory with snapshots")
    sub.add_parser("lambda", parents=[common], help="lambda0, Lambda and the regime of a scenario")
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=f"the {name} experiment")
    sub.add_parser("selftest", parents=[common], help="fast property checks of every module")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        raw = read_config(args.config) if args.config else None
        if args.command == "selftest":
            return cmd_selftest(args, raw)
        if args.command == "lambda":
            return cmd_lambda(args, raw)
        if args.command == "run":
            return cmd_run(args, raw)
        return cmd_experiment(args.command, args, raw)
    except (ConfigError, UnknownScenario) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except WrongRegime as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except ObstacleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
