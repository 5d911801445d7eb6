"""``thermo`` command-line interface.

Exit codes: 0 ok, 1 golden-value mismatch, 2 malformed input or I/O
failure, 3 domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bath import BathModel, load_bath, parse_ohmicity
from .errors import DomainError, ThermoError
from .estimate import EstimationConfig, crb_benchmark, mle
from .fisher import (
    EMPIRICAL,
    MONITORED,
    dimensional_fi,
    empirical_fi_rate,
    equilibrium_fi,
    equilibrium_optimum,
    fi_rate_exact,
)
from .optimize import optimize_asymptotic, optimize_global, optimize_two_level
from .robustness import linear_slope, robustness_sweep
from .spectrum import TwoLevelAnsatz, load_spectrum
from .tables import compute_tables
from .trajectory import (
    read_stats,
    read_trajectory,
    simulate_gillespie,
    simulate_stats,
    sufficient_stats,
    write_stats,
    write_trajectory,
)

EXIT_OK = 0
EXIT_GOLDEN = 1
EXIT_IO = 2
EXIT_DOMAIN = 3

COMMANDS = ("fisher", "tables", "scaling", "optimize", "simulate", "estimate", "crb", "robustness")


class GoldenMismatch(Exception):
    pass


def _git_hash():
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return None
    return out.stdout.strip() or None


def _provenance(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "config", "command")}
    return {"command": args.command, "config": cfg, "version": __version__, "git": _git_hash()}


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit_json(args, payload: dict):
    payload = {**payload, "provenance": _provenance(args)}
    fh, close = _open_out(args.output)
    try:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit_table(args, rows: list[dict], summary: dict | None = None):
    if getattr(args, "format", "csv") == "json":
        _emit_json(args, {"rows": rows, **({"summary": summary} if summary else {})})
        return
    buf = io.StringIO()
    meta = _provenance(args)
    if summary:
        meta["summary"] = summary
    buf.write("# " + json.dumps(meta, sort_keys=True, default=_json_default) + "\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _fmt(v) for k, v in r.items()})
    fh, close = _open_out(args.output)
    try:
        fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _bath(args) -> BathModel:
    spec = args.bath
    if spec in (None, "fermionic"):
        bath = BathModel.fermionic(args.gamma if args.gamma is not None else 1.0)
    elif spec == "bosonic":
        if args.s is None:
            raise DomainError("--s is required for a bosonic bath")
        bath = BathModel.bosonic(args.s, args.gamma if args.gamma is not None else 1.0)
    else:
        bath = load_bath(spec)
        if args.s is not None or args.gamma is not None:
            gamma = bath.gamma if args.gamma is None else args.gamma
            bath = BathModel.bosonic(args.s, gamma) if args.s is not None else BathModel(bath.kind, gamma, bath.s)
    return bath


# --- commands -------------------------------------------------------------


def cmd_fisher(args):
    spec = load_spectrum(args.spectrum)
    bath = _bath(args)
    fi = fi_rate_exact(spec, bath)
    out = {"n": spec.n, "bath": bath.to_json(), "fi_rate": fi, "fi_rate_per_level": fi / spec.n}
    if args.temperature is not None and args.tau is not None:
        out["fisher_information"] = dimensional_fi(fi, bath, args.temperature, args.tau)
    if args.empirical:
        k = empirical_fi_rate(spec, bath)
        out["empirical_fi_rate"] = k
        out["empirical_fi_rate_per_level"] = k / spec.n
    if args.equilibrium:
        out["equilibrium_fi"] = equilibrium_fi(spec)
    _emit_json(args, out)


def cmd_tables(args):
    rows = compute_tables()
    _emit_table(args, [r.as_dict() for r in rows])
    bad = [r for r in rows if not r.ok]
    if bad:
        raise GoldenMismatch(f"{len(bad)} table rows differ from reference values")


def _scaling_row(mode, n, bath, args):
    big_n = 2 ** n
    if mode in ("two_level", "empirical"):
        variant = MONITORED if mode == "two_level" else EMPIRICAL
        r = optimize_two_level(big_n, bath, variant)
        return {"n": n, "N": big_n, "fi": r.fi_rate, "fi_per_level": r.fi_rate / big_n,
                "x_star": r.x_star, "n0_star": r.n0_star}
    if mode == "global":
        r = optimize_global(big_n, bath, args.restarts, seed=args.seed, workers=args.workers)
        return {"n": n, "N": big_n, "fi": r.fi_rate, "fi_per_level": r.fi_rate / big_n,
                "x_star": r.x_star, "n0_star": "",
                "two_level_fi": r.extra["two_level_fi_rate"]}
    if mode == "equilibrium":
        r = equilibrium_optimum(big_n)
        return {"n": n, "N": big_n, "fi": r.fi, "fi_per_level": r.fi / big_n,
                "x_star": r.x, "n0_star": r.n0, "x_clamped": r.x_clamped, "fi_clamped": r.fi_clamped}
    raise DomainError(f"unknown mode {mode!r}")


def cmd_scaling(args):
    if args.mode == "global" and args.n_max > 8:
        raise DomainError("global mode is limited to n <= 8")
    if args.n_min > args.n_max:
        raise DomainError("need n_min <= n_max")
    bath = _bath(args)
    rows = [_scaling_row(args.mode, n, bath, args) for n in range(args.n_min, args.n_max + 1)]
    summary = {}
    top = rows[len(rows) // 2:]
    if len(top) >= 2:
        summary["slope_top_half"] = linear_slope([r["N"] for r in top], [r["fi"] for r in top])
    if args.mode == "equilibrium" and len(rows) >= 2:
        lx = np.log([math.log(r["N"]) ** 2 for r in rows])
        ly = np.log([r["fi"] for r in rows])
        fit = np.polyfit(lx, ly, 1)
        resid = ly - np.polyval(fit, lx)
        summary["power_vs_logN_squared"] = float(fit[0])
        summary["power_fit_r2"] = float(1.0 - resid.var() / ly.var())
    _emit_table(args, rows, summary)


def cmd_optimize(args):
    bath = _bath(args)
    if args.method != "asymptotic" and args.n is None:
        raise DomainError("--n is required for this method")
    if args.method == "asymptotic":
        res = optimize_asymptotic(bath, args.variant)
    elif args.method == "two_level":
        res = optimize_two_level(args.n, bath, args.variant)
    else:
        res = optimize_global(args.n, bath, args.restarts, seed=args.seed, workers=args.workers)
    _emit_json(args, res.to_json())


def cmd_simulate(args):
    spec = load_spectrum(args.spectrum)
    bath = _bath(args)
    initial = args.initial if args.initial == "thermal" else int(args.initial)
    if args.stats_only:
        st = simulate_stats(spec, bath, args.temperature, args.tau, args.seed, initial)
        if args.output in (None, "-"):
            json.dump(st.to_json(), sys.stdout, sort_keys=True)
            sys.stdout.write("\n")
        else:
            write_stats(st, args.output, _provenance(args))
        return
    traj = simulate_gillespie(spec, bath, args.temperature, args.tau, args.seed, initial)
    meta = _provenance(args)
    meta.update({"bath": bath.to_json(), "temperature": args.temperature, "seed": args.seed})
    if args.output in (None, "-"):
        raise DomainError("--output is required for trajectory files")
    write_trajectory(traj, args.output, meta)


def _estimation_config(args, n=None, n0=None, gap=None):
    n = args.n if args.n is not None else n
    n0 = args.n0 if args.n0 is not None else n0
    eps = args.epsilon if args.epsilon is not None else gap
    if n is None or n0 is None or eps is None:
        raise DomainError("need --n, --n0 and --epsilon (or a trajectory file)")
    return EstimationConfig(TwoLevelAnsatz(int(n), int(n0), float(eps)), _bath(args), float(eps))


def cmd_estimate(args):
    if args.trajectory:
        traj, _ = read_trajectory(args.trajectory)
        u, counts = traj.spectrum.grouped()
        cfg = _estimation_config(args, traj.spectrum.n, int(counts[0]),
                                 float(u[-1] - u[0]) if u.size == 2 else None)
        stats = sufficient_stats(traj, cfg.ansatz)
    elif args.stats:
        stats = read_stats(args.stats)
        cfg = _estimation_config(args)
    else:
        raise DomainError("need --stats or --trajectory")
    res = mle(stats, cfg)
    _emit_json(args, {**res.to_json(), "stats": stats.to_json()})


def cmd_crb(args):
    cfg = _estimation_config(args)
    rep = crb_benchmark(cfg, args.temperature, args.tau, args.replicas, args.seed,
                        method=args.method, workers=args.workers)
    _emit_json(args, rep.to_json())


def cmd_robustness(args):
    bath = _bath(args)
    rows = []
    for n in args.n:
        rows.extend(r.as_dict() for r in robustness_sweep(bath, 2 ** n, args.sigma, args.trials, args.seed))
    summary = {}
    if len(args.n) >= 2:
        for sigma in args.sigma:
            sel = [r for r in rows if r["sigma"] == sigma]
            summary[f"slope_sigma_{sigma:g}"] = linear_slope(
                [r["n"] for r in sel], [r["mean_per_level"] * r["n"] for r in sel]
            )
    _emit_table(args, rows, summary)


# --- parser -----------------------------------------------------------------


def _default_seed():
    try:
        return int(os.environ.get("THERMO_SEED", "0"))
    except ValueError:
        return 0


def _add_common(p, table=False):
    p.add_argument("--output", default=None, help="output path (default: stdout)")
    p.add_argument("--config", default=None, help="JSON file with option overrides")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--workers", type=int, default=1)
    if table:
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_bath(p):
    p.add_argument("--bath", default="fermionic",
                   help="'fermionic', 'bosonic', a bath JSON file or an inline JSON object")
    p.add_argument("--s", type=parse_ohmicity, default=None, help="ohmicity; '1+' for the right limit at 1")
    p.add_argument("--gamma", type=float, default=None)


def _add_probe(p):
    p.add_argument("--n", type=int, default=None, help="number of levels")
    p.add_argument("--n0", type=int, default=None, help="ground-manifold degeneracy")
    p.add_argument("--epsilon", type=float, default=None, help="energy gap (k_B = 1)")


def build_parser():
    parser = argparse.ArgumentParser(prog="thermo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["fisher"] = sub.add_parser("fisher", help="FI rate of a spectrum")
    p.add_argument("--spectrum", required=True)
    _add_bath(p)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--empirical", action="store_true")
    p.add_argument("--equilibrium", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_fisher)

    p = subs["tables"] = sub.add_parser("tables", help="optimal constants vs reference values")
    _add_common(p, table=True)
    p.set_defaults(func=cmd_tables)

    p = subs["scaling"] = sub.add_parser("scaling", help="optimum against N = 2^n")
    _add_bath(p)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--mode", choices=("two_level", "global", "equilibrium", "empirical"), default="two_level")
    p.add_argument("--restarts", type=int, default=None)
    _add_common(p, table=True)
    p.set_defaults(func=cmd_scaling)

    p = subs["optimize"] = sub.add_parser("optimize", help="optimize a probe spectrum")
    _add_bath(p)
    p.add_argument("--method", choices=("asymptotic", "two_level", "global"), default="asymptotic")
    p.add_argument("--variant", choices=(MONITORED, EMPIRICAL), default=MONITORED)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_optimize)

    p = subs["simulate"] = sub.add_parser("simulate", help="simulate a monitored trajectory")
    p.add_argument("--spectrum", required=True)
    _add_bath(p)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--initial", default="thermal")
    p.add_argument("--stats-only", action="store_true", help="stream to sufficient statistics")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = subs["estimate"] = sub.add_parser("estimate", help="closed-form temperature MLE")
    p.add_argument("--stats", default=None)
    p.add_argument("--trajectory", default=None)
    _add_bath(p)
    _add_probe(p)
    _add_common(p)
    p.set_defaults(func=cmd_estimate)

    p = subs["crb"] = sub.add_parser("crb", help="MLE error vs Cramer-Rao bound")
    _add_bath(p)
    _add_probe(p)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--method", choices=("coarse", "full"), default="coarse")
    _add_common(p)
    p.set_defaults(func=cmd_crb)

    p = subs["robustness"] = sub.add_parser("robustness", help="FI under Gaussian level disorder")
    _add_bath(p)
    p.add_argument("--n", type=int, nargs="+", default=[10])
    p.add_argument("--sigma", type=float, nargs="+", default=[0.0, 0.25, 0.5])
    p.add_argument("--trials", type=int, default=100)
    _add_common(p, table=True)
    p.set_defaults(func=cmd_robustness)

    return parser, subs


def _parse(argv):
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        sp = subs[args.command]
        known = {a.dest for a in sp._actions}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        if "s" in overrides:
            overrides["s"] = parse_ohmicity(overrides["s"])
        sp.set_defaults(**overrides)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_IO
    except (OSError, ValueError, KeyError) as exc:
        print(f"thermo: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        args.func(args)
    except GoldenMismatch as exc:
        print(f"thermo: {exc}", file=sys.stderr)
        return EXIT_GOLDEN
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"thermo: malformed input: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ThermoError, ValueError) as exc:
        print(f"thermo: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK
