"""Command line front end.

Subcommands::

    radial-check   identity check and sharper constant for a radial profile
    ma-solve       envelope solve with capped boundary data, writes field and fiber
    bergman        minimal extension norm with its degree ladder
    bounds         the full (m, S, O) report for one config
    sweep-c        S(C) over several caps

Exit codes: 0 all flags ok, 2 chain violation, 3 solver non-convergence,
4 config error, 1 any other failure.  ``L2EXT_THREADS`` sets the thread count.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

from . import config as cf
from . import radial_weights as rw
from . import report
from .envelope import io as eio
from .errors import ConfigError, L2ExtError, NonConvergence

EXIT_OK, EXIT_FAIL, EXIT_CHAIN, EXIT_NONCONV, EXIT_CONFIG = 0, 1, 2, 3, 4


def corpus():
    """The packaged example configurations."""
    return json.loads(resources.files("l2ext").joinpath("data/corpus.json").read_text())


def preset(name):
    for cfg in corpus():
        if cfg["name"] == name:
            return cfg
    raise ConfigError(f"unknown preset {name!r}; choose from "
                      + ", ".join(c["name"] for c in corpus()))


# (flag, section, key, type)
SOLVER_FLAGS = [("--n-xy", "solver", "n_xy", int), ("--n-t", "solver", "n_t", int),
                ("--t-min", "solver", "t_min", float), ("--C", "solver", "C", float),
                ("--stencil-dirs", "solver", "stencil_dirs", int),
                ("--tol", "solver", "tol", float), ("--max-sweeps", "solver", "max_sweeps", int),
                ("--method", "solver", "method", str)]
BERGMAN_FLAGS = [("--N0", "bergman", "N0", int), ("--N-max", "bergman", "N_max", int),
                 ("--bergman-tol", "bergman", "tol", float)]


def _dest(flag):
    return flag.lstrip("-").replace("-", "_")


def _add_flags(p, flags):
    for flag, _, _, typ in flags:
        kw = {"choices": ["legendre", "sweep"]} if flag == "--method" else {}
        p.add_argument(flag, dest=_dest(flag), type=typ, default=None, **kw)


def _common(p, solver=True, bergman=True):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="JSON run configuration")
    src.add_argument("--preset", help="name of a packaged example configuration")
    p.add_argument("--out", help="output directory (overrides output.path)")
    p.add_argument("--formats", help="comma list from json,csv,plots,field")
    p.add_argument("--no-refine", action="store_true",
                   help="skip the half-resolution solve used for the uncertainty")
    if solver:
        _add_flags(p, SOLVER_FLAGS)
        p.add_argument("--pipeline", choices=["auto", "radial", "ma", "both", "pullback"])
    if bergman:
        _add_flags(p, BERGMAN_FLAGS)


def _load(args, default_preset):
    if args.config:
        cfg = json.loads(_read(args.config))
    else:
        cfg = preset(args.preset or default_preset)
    for flag, section, key, _ in SOLVER_FLAGS + BERGMAN_FLAGS:
        cf.override(cfg, section, key, getattr(args, _dest(flag), None))
    cf.override(cfg, None, "pipeline", getattr(args, "pipeline", None))
    if args.no_refine:
        cf.override(cfg, "solver", "refine_check", False)
    cf.override(cfg, "output", "path", args.out)
    if args.formats:
        cf.override(cfg, "output", "formats", [f.strip() for f in args.formats.split(",")])
    return cf.with_defaults(cfg)


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _print(obj):
    print(json.dumps(report._clean(obj), sort_keys=True, indent=2))


def cmd_radial_check(args):
    if args.p is not None:
        prof = rw.Power(args.p)
    else:
        cfg = _load(args, "radial_p1")
        w = rw.weight_from_config(cfg["weight"], report.domain_from_config(cfg["domain"]))
        if not w.is_radial:
            raise ConfigError("radial-check needs a radial weight")
        prof = w.profile
    lhs, rhs, rel = rw.prop31_check(prof)
    S, info = rw.sharper_constant_radial(prof, return_info=True)
    ok = rel <= 1e-8
    _print({"profile": prof.describe(), "lhs": lhs, "rhs": rhs, "rel_err": rel, "S": S,
            "quadrature": info, "identity_ok": ok})
    return EXIT_OK if ok else EXIT_CHAIN


def cmd_ma_solve(args):
    cfg = _load(args, "quadratic_c0.4")
    domain, weight, hd = report._build(cfg)
    C = cfg["solver"]["C"]
    S, unc, det, sol = report.ma_stage(cfg, domain, hd, C, report.thread_count())
    out = cfg["output"]["path"]
    files = [eio.write_fiber_csv(sol, f"{out}/fiber_{cfg['name']}.csv", n_fine=200)]
    if "field" in cfg["output"]["formats"]:
        files.extend(eio.write_field(sol, f"{out}/field_{cfg['name']}"))
    _print({"name": cfg["name"], "C": C, "S": S, "S_err": unc, "details": det,
            "files": [str(f) for f in files]})
    return EXIT_OK


def cmd_bergman(args):
    cfg = _load(args, "quadratic_c0.4")
    domain, weight, _ = report._build(cfg)
    ext, err = report.bergman_stage(cfg, domain, weight)
    _print({"name": cfg["name"], "m": ext.norm_sq, "ladder_error": err,
            "degree": ext.degree, "ladder": ext.ladder, "method": ext.method,
            "conditioning": ext.conditioning})
    return EXIT_OK


def cmd_bounds(args):
    cfg = _load(args, "quadratic_c0.4")
    rep = report.run(cfg)
    files = report.emit(rep, cfg["output"]["formats"], cfg["output"]["path"])
    _print({"name": rep.name, "m": rep.m, "S": rep.S, "S_err": rep.S_err, "O": rep.O,
            "chain_ok": rep.chain_ok, "strict_status": rep.strict_status,
            "files": [str(f) for f in files]})
    return EXIT_OK if rep.chain_ok else EXIT_CHAIN


def cmd_sweep_c(args):
    cfg = _load(args, "quadratic_c0.4")
    Cs = ([float(c) for c in args.Cs.split(",") if c.strip()] if args.Cs is not None
          else cfg["sweep"]["Cs"])
    sw = report.sweep_C(cfg, Cs)
    files = report.emit(sw, cfg["output"]["formats"], cfg["output"]["path"])
    _print({"C": [r.C for r in sw], "S": [r.S for r in sw], "S_err": [r.S_err for r in sw],
            "m": [r.m for r in sw], "O": [r.O for r in sw], "warnings": sw.warnings,
            "monotone_ok": sw.monotone_ok, "lower_ok": sw.lower_ok,
            "files": [str(f) for f in files]})
    ok = sw.monotone_ok and sw.lower_ok and all(r.chain_ok for r in sw)
    return EXIT_OK if ok else EXIT_CHAIN


def build_parser():
    ap = argparse.ArgumentParser(prog="l2ext", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radial-check", help="radial identity and sharper constant")
    _common(p, solver=False, bergman=False)
    p.add_argument("--p", type=float, help="use the power profile (-t)^(-p) directly")
    p.set_defaults(fn=cmd_radial_check)

    p = sub.add_parser("ma-solve", help="envelope solve with capped boundary data")
    _common(p, bergman=False)
    p.set_defaults(fn=cmd_ma_solve)

    p = sub.add_parser("bergman", help="minimal extension norm")
    _common(p, solver=False)
    p.set_defaults(fn=cmd_bergman)

    p = sub.add_parser("bounds", help="(m, S, O) report with files")
    _common(p)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("sweep-c", help="S(C) over several caps")
    _common(p)
    p.add_argument("--Cs", help="comma list of caps, e.g. --Cs=-2,-4,-8")
    p.set_defaults(fn=cmd_sweep_c)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except L2ExtError as exc:
        stage = getattr(exc, "stage", None)
        where = f" [{stage}]" if stage else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
