"""Command-line entry point.

Exit codes: 0 all checks pass, 2 a numeric check failed, 3 configuration
error, 4 solver non-convergence.
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys
import warnings

from . import gauge, moser
from .config import DEFAULT_CONFIG_TEXT, ConfigError, RunConfig, load_config, parse_config
from .fields import Grid2D, read_field_csv, write_field_csv
from .functional import PotentialSpec, energy_report
from .nonlinearity import SaturationError, check_all
from .report import RunManifest, emit_report, utc_timestamp, verdict, write_report
from .solver import NoBracketError, compare_potentials, ground_state

EXIT_OK = 0
EXIT_NUMERIC = 2
EXIT_CONFIG = 3
EXIT_NONCONVERGENCE = 4

# flag name -> (section, key)
OVERRIDES = {
    "p": ("problem", "p"),
    "a_inf": ("problem", "a_inf"),
    "b": ("problem", "b"),
    "sigma": ("problem", "sigma"),
    "alpha0": ("nonlinearity", "alpha0"),
    "lam": ("nonlinearity", "lambda"),
    "qf": ("nonlinearity", "qf"),
    "family": ("nonlinearity", "family"),
    "L": ("discretization", "L"),
    "n": ("discretization", "n"),
    "radial_m": ("discretization", "radial_m"),
    "r_max": ("discretization", "r_max"),
    "tol": ("solver", "tol"),
    "max_iter": ("solver", "max_iter"),
    "eta0": ("solver", "eta0"),
}


def _float_or_pi(text: str) -> float:
    """Accept plain floats or multiples of pi such as ``4.4pi``."""
    m = re.fullmatch(r"\s*([-+0-9.eE]*)\s*pi\s*", text)
    try:
        if m:
            return (float(m.group(1)) if m.group(1) not in ("", "+") else 1.0) * math.pi
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _list(conv):
    def parse(text):
        return [conv(x) for x in text.replace(",", " ").split()]
    return parse


def _add_common(sp, problem=True):
    sp.add_argument("--config", help="run.cfg file; flags override its values")
    sp.add_argument("--report", help="report path ('-' for stdout)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--timestamp", action="store_true",
                    help="stamp the report with the current UTC time (breaks byte-stability)")
    if problem:
        sp.add_argument("--p", type=float)
        sp.add_argument("--a-inf", dest="a_inf", type=float)
        sp.add_argument("--alpha0", type=float)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--qf", type=float)
        sp.add_argument("--family")


def _add_solver(sp):
    sp.add_argument("--L", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-iter", dest="max_iter", type=int)
    sp.add_argument("--eta0", type=float)
    sp.add_argument("--seed-offset", dest="seed_offset", type=float, nargs=2,
                    metavar=("X1", "X2"))
    sp.add_argument("--field-csv", dest="field_csv", help="write the final field here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zmcss", description=(
        "Ground states and diagnostics for the zero-mass Chern-Simons-Schroedinger system"))
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="Nehari ground state of J_a or J_inf")
    _add_common(sp)
    _add_solver(sp)
    sp.add_argument("--b", type=float)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--constant-potential", dest="constant_potential", action="store_true",
                    help="use a = a_inf (the limit problem)")

    sp = sub.add_parser("compare-potentials", help="m_a versus m_inf with fiber certificate")
    _add_common(sp)
    _add_solver(sp)
    sp.add_argument("--b", type=float, default=0.5)
    sp.add_argument("--sigma", type=float, default=2.0)

    sp = sub.add_parser("moser", help="norms of the Moser profiles")
    _add_common(sp, problem=False)
    sp.add_argument("--p", type=float)
    sp.add_argument("--n-list", dest="n_list", type=_list(int), default=[2, 4, 8, 16, 32])
    sp.add_argument("--r-max", dest="r_max", type=float)
    sp.add_argument("--radial-m", dest="radial_m", type=int)
    sp.add_argument("--rtol", type=float, default=1e-3)

    sp = sub.add_parser("tm-probe", help="Trudinger-Moser integrals along the Moser sequence")
    _add_common(sp, problem=False)
    sp.add_argument("--p", type=float)
    sp.add_argument("--alphas", type=_list(_float_or_pi), default=[3.6 * math.pi, 4.4 * math.pi],
                    help="comma list, multiples of pi allowed (e.g. 3.6pi,4.4pi)")
    sp.add_argument("--n-list", dest="n_list", type=_list(int), default=[4, 8, 16, 32, 64])
    sp.add_argument("--r-max", dest="r_max", type=float)
    sp.add_argument("--radial-m", dest="radial_m", type=int)
    sp.add_argument("--min-ratio", dest="min_ratio", type=float, default=1.2)
    sp.add_argument("--max-spread", dest="max_spread", type=float, default=10.0)

    sp = sub.add_parser("gauge-check", help="gauge residuals of a field CSV")
    _add_common(sp, problem=False)
    sp.add_argument("--field", help="field CSV (default: Gaussian on the configured grid)")
    sp.add_argument("--curl-tol", dest="curl_tol", type=float, default=5e-3)
    sp.add_argument("--div-tol", dest="div_tol", type=float, default=5e-3)
    sp.add_argument("--gauge0-tol", dest="gauge0_tol", type=float, default=1e-2)

    sp = sub.add_parser("energy", help="energy decomposition of a field CSV")
    _add_common(sp)
    sp.add_argument("--field", required=True)
    sp.add_argument("--b", type=float)
    sp.add_argument("--sigma", type=float)

    sp = sub.add_parser("check-f", help="hypothesis verdicts for the nonlinearity")
    _add_common(sp)

    sub.add_parser("default-config", help="print the default run.cfg")
    return ap


def _config(args) -> RunConfig:
    ov = {}
    for name, target in OVERRIDES.items():
        v = getattr(args, name, None)
        if v is not None:
            ov[target] = v
    if getattr(args, "seed_offset", None) is not None:
        ov[("solver", "seed_offset")] = f"{args.seed_offset[0]!r}, {args.seed_offset[1]!r}"
    if getattr(args, "constant_potential", False):
        ov[("problem", "constant_potential")] = "true"
    if args.config:
        return load_config(args.config, ov)
    return parse_config(DEFAULT_CONFIG_TEXT, ov)


def _emit(args, cfg: RunConfig, manifest: RunManifest) -> None:
    if args.timestamp:
        manifest.timestamp = utc_timestamp()
    payload = emit_report(manifest, args.format)
    path = args.report if args.report is not None else cfg.output.report
    if path in (None, "-"):
        sys.stdout.write(payload.decode("utf-8"))
    else:
        write_report(path, payload)


def _exit_code(manifest: RunManifest) -> int:
    return EXIT_OK if manifest.all_pass else EXIT_NUMERIC


def cmd_solve(args, cfg: RunConfig) -> int:
    pot = cfg.potential
    if args.constant_potential:
        pot = pot.limit()
    rep = ground_state(pot, cfg.nonlinearity, cfg.p, cfg.solver)
    tol = cfg.solver.tol
    res = rep.to_dict()
    verdicts = {
        "converged": verdict(rep.converged),
        "nonnegative": verdict(rep.min_value >= 0.0),
        "energy_below_2pi_over_alpha0": verdict(rep.bound_2pi_alpha0),
        "nehari_residual": verdict(abs(rep.nehari_residual) / rep.e_norm**2 < 10 * tol),
        "energy_trace_monotone": verdict(all(b <= a + 1e-12 * max(1.0, abs(a)) for a, b in
                                             zip(rep.energy_trace, rep.energy_trace[1:]))),
    }
    if args.field_csv:
        write_field_csv(rep.field, args.field_csv)
        res["field_csv"] = args.field_csv
    m = RunManifest("solve", cfg.to_dict(), res, verdicts)
    _emit(args, cfg, m)
    if not rep.converged:
        return EXIT_NONCONVERGENCE
    return _exit_code(m)


def cmd_compare(args, cfg: RunConfig) -> int:
    pot = PotentialSpec(cfg.potential.a_inf, args.b, args.sigma)
    rep = compare_potentials(cfg.nonlinearity, cfg.p, pot, cfg.solver)
    conf = cfg.to_dict()
    conf["problem"].update(b=args.b, sigma=args.sigma)
    verdicts = {"ordered": verdict(rep.ordered),
                "fiber_certificate": verdict(rep.certificate_holds),
                "converged": verdict(rep.arm_a.converged and rep.arm_inf.converged)}
    if args.field_csv:
        root, ext = os.path.splitext(args.field_csv)
        write_field_csv(rep.arm_a.field, f"{root}_a{ext or '.csv'}")
        write_field_csv(rep.arm_inf.field, f"{root}_inf{ext or '.csv'}")
    m = RunManifest("compare-potentials", conf, rep.to_dict(), verdicts)
    _emit(args, cfg, m)
    if not (rep.arm_a.converged and rep.arm_inf.converged):
        return EXIT_NONCONVERGENCE
    return _exit_code(m)


def _radial(args, cfg: RunConfig):
    from .fields import RadialGrid
    return RadialGrid(args.r_max or cfg.radial.r_max, args.radial_m or cfg.radial.m)


def cmd_moser(args, cfg: RunConfig) -> int:
    p = args.p or cfg.p
    grid = _radial(args, cfg)
    rows, verdicts = [], {}
    for n in args.n_list:
        pr = moser.moser_sequence(n, p, grid)
        rows.append(pr.to_dict())
        verdicts[f"grad_sq_n{n}"] = verdict(abs(pr.grad_sq - 1.0) < args.rtol)
        verdicts[f"l1_norm_n{n}"] = verdict(abs(pr.l1_norm / pr.l1_exact - 1.0) < args.rtol)
    conf = {"p": p, "r_max": grid.r_max, "radial_m": grid.m, "n_list": args.n_list}
    m = RunManifest("moser", conf, {"probes": rows}, verdicts)
    _emit(args, cfg, m)
    return _exit_code(m)


def cmd_tm_probe(args, cfg: RunConfig) -> int:
    p = args.p or cfg.p
    grid = _radial(args, cfg)
    table = moser.tm_probe(p, args.alphas, args.n_list, grid)
    verdicts = {}
    for a in args.alphas:
        s = table["series"][repr(float(a))]
        key = f"alpha={a / math.pi:.6g}pi"
        if any(v is None for v in s["integrals"]):
            verdicts[key] = "saturated"
        elif a > 4 * math.pi:
            verdicts[key] = verdict(s["increasing"] and all(r > args.min_ratio for r in s["ratios"]))
        elif a > 0:
            verdicts[key] = verdict(s["max_over_min"] is not None
                                    and s["max_over_min"] < args.max_spread)
        else:
            verdicts[key] = verdict(all(v == 0.0 for v in s["integrals"]))
    conf = {"p": p, "r_max": grid.r_max, "radial_m": grid.m, "n_list": args.n_list,
            "alphas": [float(a) for a in args.alphas], "min_ratio": args.min_ratio,
            "max_spread": args.max_spread}
    m = RunManifest("tm-probe", conf, table, verdicts)
    _emit(args, cfg, m)
    return _exit_code(m)


def _field_or_gaussian(args, cfg: RunConfig):
    if args.field:
        return read_field_csv(args.field), args.field
    from .fields import Field2D
    return Field2D.gaussian(Grid2D(12.0, 256), 1.0, 1.0), "gaussian(L=12,n=256)"


def cmd_gauge_check(args, cfg: RunConfig) -> int:
    u, src = _field_or_gaussian(args, cfg)
    g = gauge.compute_gauge(u)
    res = {"curl_residual": g.curl_residual, "div_residual": g.div_residual,
           "gauge0_residual": gauge.gauge_identity_check(u), "cs_energy": gauge.cs_energy(u)}
    verdicts = {"curl_residual": verdict(res["curl_residual"] < args.curl_tol),
                "div_residual": verdict(res["div_residual"] < args.div_tol),
                "gauge0_residual": verdict(res["gauge0_residual"] < args.gauge0_tol)}
    conf = {"field": src, "L": u.grid.half_width, "n": u.grid.n}
    m = RunManifest("gauge-check", conf, res, verdicts)
    _emit(args, cfg, m)
    return _exit_code(m)


def cmd_energy(args, cfg: RunConfig) -> int:
    u = read_field_csv(args.field)
    pot = cfg.potential
    if args.b is not None or args.sigma is not None:
        pot = PotentialSpec(pot.a_inf, args.b if args.b is not None else pot.b,
                            args.sigma if args.sigma is not None else pot.sigma)
    res = energy_report(u, pot, cfg.nonlinearity, cfg.p)
    conf = cfg.to_dict()
    conf["problem"].update(b=pot.b, sigma=pot.sigma)
    conf["field"] = args.field
    m = RunManifest("energy", conf, res, {})
    _emit(args, cfg, m)
    return EXIT_OK


def cmd_check_f(args, cfg: RunConfig) -> int:
    reports = check_all(cfg.nonlinearity)
    res = {k: r.to_dict() for k, r in reports.items()}
    verdicts = {k: r.verdict for k, r in reports.items()}
    m = RunManifest("check-f", cfg.to_dict()["nonlinearity"], res, verdicts)
    _emit(args, cfg, m)
    return _exit_code(m)


COMMANDS = {
    "solve": cmd_solve,
    "compare-potentials": cmd_compare,
    "moser": cmd_moser,
    "tm-probe": cmd_tm_probe,
    "gauge-check": cmd_gauge_check,
    "energy": cmd_energy,
    "check-f": cmd_check_f,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2; map them to the config code
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.command == "default-config":
        sys.stdout.write(DEFAULT_CONFIG_TEXT)
        return EXIT_OK
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            if cfg.output.verbosity == 0:
                warnings.simplefilter("ignore")
            return COMMANDS[args.command](args, cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoBracketError as exc:
        print(f"no Nehari bracket: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SaturationError as exc:
        print(f"saturation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
