"""Config-driven runs comparing the three extension constants.

For a domain and weight the report collects

    m   the minimal extension norm (least-norm polynomial extension),
    S   the sharper constant from a Green-type function on the lift,
    O   π e^{B(0)},

and checks the chain ``m ≤ S ≤ O``.  Where the hypotheses for a strict gap
are verified (positive Levi proxy, valid cap ``C``) it also decides whether
``S + uncertainty < O``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bergman_extension as be
from . import config as cf
from . import hartogs as hg
from . import plotting
from . import quadrature as qd
from . import radial_weights as rw
from .envelope import io as eio
from .envelope.boundary import MaxCap, RadialOracle
from .envelope.grid import make_grid
from .envelope.solution import (check_C, harmonic_minorant_check, sharper_constant_ma,
                                solve_envelope)
from .envelope.stencil import StencilSpec
from .errors import L2ExtError, PreconditionError, UnsupportedError
from .planar_domain import domain_from_config

THREADS_ENV = "L2EXT_THREADS"


def thread_count():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except L2ExtError as exc:
        exc.stage = name
        raise


def _clean(obj):
    """JSON-safe copy: non-finite floats become None, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


@dataclass
class BoundsReport:
    name: str
    m: float
    S: float
    S_err: float
    O: float
    provenance: str
    chain_ok: bool
    strict_status: str
    tol_chain: float
    config_hash: str
    C: float = None
    details: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict, repr=False)

    @property
    def margins(self):
        return {"S_minus_m": self.S - self.m, "O_minus_S": self.O - self.S}

    @property
    def strict_ok(self):
        return self.strict_status == "strict"

    def to_dict(self):
        return _clean({"name": self.name, "m": self.m, "S": self.S, "S_err": self.S_err,
                       "O": self.O, "C": self.C, "provenance": self.provenance,
                       "margins": self.margins, "chain_ok": self.chain_ok,
                       "strict_ok": self.strict_ok, "strict_status": self.strict_status,
                       "tol_chain": self.tol_chain, "config_hash": self.config_hash,
                       "details": self.details})


# ----------------------------------------------------------------------
# stages
# ----------------------------------------------------------------------

def _quad(cfg):
    q = cfg["bergman"].get("quad", {})
    return qd.QuadratureSpec(q.get("scheme", "adaptive_radial"), q.get("n_r", 0),
                             q.get("n_theta", 0), q.get("target_err", 1e-12))


def bergman_stage(cfg, domain, weight):
    b = cfg["bergman"]
    ext = be.min_extension_auto(domain, weight, _quad(cfg), N0=min(b["N0"], b["N_max"]),
                                N_max=b["N_max"], tol=b["tol"])
    # the ladder's last step bounds the truncation in N
    ladder = ext.ladder
    err = abs(ladder[-1][1] - ladder[-2][1]) if len(ladder) > 1 else 0.0
    return ext, err


def radial_stage(weight):
    prof = weight.profile
    lhs, rhs, rel = rw.prop31_check(prof)
    S, info = rw.sharper_constant_radial(prof, return_info=True)
    unc = info["tail_bound"] + info["quad_error"]
    return S, unc, {"identity": {"lhs": lhs, "rhs": rhs, "rel_err": rel}, "quadrature": info}


def pullback_stage(domain, hd):
    cert = hg.GreenTypeCertificate.pullback(domain)
    S = hg.certificate_constant(cert)
    rep = hg.verify_certificate(cert, hd, n=400)
    return S, 1e-9 * S, {"certificate": rep.to_dict()}


def _solve(cfg, hd, bd, n_xy, n_t, threads):
    s = cfg["solver"]
    grid = make_grid(hd, n_xy, n_t, s["t_min"])
    return solve_envelope(grid, bd, StencilSpec(n_dirs=s["stencil_dirs"]), tol=s["tol"],
                          max_sweeps=s["max_sweeps"], method=s["method"],
                          diagnose=s["diagnose"], max_nodes=s["max_nodes"], threads=threads)


def ma_stage(cfg, domain, hd, C, threads=1, bd=None):
    """Envelope solve with cap ``C`` (or the given data); returns ``(S, unc, details, sol)``."""
    s = cfg["solver"]
    if bd is None:
        margin = check_C(domain, C)
        bd = MaxCap(C)
    else:
        margin = None
    sol = _solve(cfg, hd, bd, s["n_xy"], s["n_t"], threads)
    est = sharper_constant_ma(sol)
    unc = est.uncertainty
    det = {"solver": _clean(sol.summary()), "S_estimate": est.to_dict(), "C_margin": margin}
    if s["refine_check"]:
        coarse = _solve(cfg, hd, bd, max(16, s["n_xy"] // 2), max(16, s["n_t"] // 2), threads)
        Sc = sharper_constant_ma(coarse).value
        det["S_coarse"] = Sc
        unc += abs(est.value - Sc)
    if isinstance(bd, MaxCap):
        det["harmonic_minorant_margin"] = harmonic_minorant_check(sol, domain)
    return est.value, unc, det, sol


def _levi(hd):
    try:
        return hg.levi_sample(hd)
    except UnsupportedError:
        return None


def resolve_pipeline(cfg, weight):
    p = cfg["pipeline"]
    if p != "auto":
        return p
    if isinstance(weight, rw.ParametricWeight) and weight.family == "zero":
        return "pullback"
    return "radial" if weight.is_radial else "ma"


def _build(cfg):
    domain = _stage("domain", domain_from_config, cfg["domain"])
    weight = _stage("weight", rw.weight_from_config, cfg["weight"], domain)
    hd = _stage("hartogs", hg.HartogsDomain, domain, weight)
    return domain, weight, hd


def _assemble(cfg, name, m, m_err, S, S_err, O, provenance, strict_status, details, C=None,
              artifacts=None):
    tol = cfg["tol_chain"] + S_err + m_err
    chain_ok = bool(m <= S + tol and S <= O + tol)
    return BoundsReport(name, float(m), float(S), float(S_err), float(O), provenance, chain_ok,
                        strict_status, float(tol), cf.config_hash(cfg), C, details,
                        artifacts or {})


def _strict(levi, S, S_err, O):
    if levi is None or not levi.min_eig > 0:
        return "not-applicable"
    return "strict" if S + S_err < O else "inconclusive"


def run(cfg, threads=None):
    """Run one configuration; returns a ``BoundsReport``."""
    cfg = cf.with_defaults(cfg)
    threads = thread_count() if threads is None else threads
    domain, weight, hd = _build(cfg)
    pipeline = resolve_pipeline(cfg, weight)
    ext, m_err = _stage("bergman", bergman_stage, cfg, domain, weight)
    O = domain.optimal_constant()
    details = {"pipeline": pipeline, "domain": domain.describe(), "weight": weight.describe(),
               "bergman": ext.to_dict()}
    artifacts = {"ladder": ext.ladder}
    C = None
    if pipeline == "pullback":
        S, S_err, det = _stage("pullback", pullback_stage, domain, hd)
        status = "not-applicable"
        prov = "Pullback"
    elif pipeline in ("radial", "both"):
        if not weight.is_radial:
            raise _tagged(UnsupportedError("radial pipeline needs a radial weight"), "radial")
        S, S_err, det = _stage("radial", radial_stage, weight)
        prov = "RadialClosedForm"
        status = "not-applicable"
        if pipeline == "both":
            S_ma, unc_ma, det_ma, sol = _stage("ma", ma_stage, cfg, domain, hd, None, threads,
                                               bd=RadialOracle(weight.profile))
            det_ma["S"] = S_ma
            det_ma["S_err"] = unc_ma
            det_ma["S_minus_radial"] = S_ma - S
            det["ma_cross_check"] = det_ma
            artifacts["solution"] = sol
    else:
        C = float(cfg["solver"]["C"])
        levi = _levi(hd)
        S, S_err, det, sol = _stage("ma", ma_stage, cfg, domain, hd, C, threads)
        det["levi"] = None if levi is None else levi.to_dict()
        status = _strict(levi, S, S_err, O)
        prov = "MASolution"
        artifacts["solution"] = sol
    details.update(det)
    return _assemble(cfg, cfg["name"], ext.norm_sq, m_err, S, S_err, O, prov, status, details,
                     C, artifacts)


def _tagged(exc, stage):
    exc.stage = stage
    return exc


@dataclass
class SweepReport:
    reports: list
    warnings: list
    monotone_ok: bool
    lower_ok: bool

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)

    def to_dict(self):
        return _clean({"reports": [r.to_dict() for r in self.reports],
                       "warnings": self.warnings, "monotone_ok": self.monotone_ok,
                       "lower_ok": self.lower_ok})


def sweep_C(cfg, Cs, threads=None):
    """MaxCap runs for several caps ``C``, ordered from the largest ``C`` down.

    Invalid caps are skipped with a warning record.  ``monotone_ok`` checks
    that ``S`` does not increase as ``C`` decreases, within the summed
    uncertainties plus ``tol_chain``.
    """
    cfg = cf.with_defaults(cfg)
    threads = thread_count() if threads is None else threads
    Cs = sorted((float(c) for c in Cs), reverse=True)
    if not Cs:
        return SweepReport([], [], True, True)
    domain, weight, hd = _build(cfg)
    warnings = []
    valid = []
    for C in Cs:
        try:
            check_C(domain, C)
            valid.append(C)
        except PreconditionError as exc:
            w = exc.witness
            warnings.append(_clean({"C": C, "warning": str(exc),
                                    "witness": complex(w) if w is not None else None}))
    if not valid:
        return SweepReport([], warnings, True, True)
    ext, m_err = _stage("bergman", bergman_stage, cfg, domain, weight)
    O = domain.optimal_constant()
    levi = _levi(hd)

    def one(C):
        sub = dict(cfg)
        sub["solver"] = dict(cfg["solver"], C=C)
        S, S_err, det, sol = _stage("ma", ma_stage, sub, domain, hd, C, 1)
        det["levi"] = None if levi is None else levi.to_dict()
        det["pipeline"] = "ma"
        return _assemble(sub, f"{cfg['name']}@C={C:g}", ext.norm_sq, m_err, S, S_err, O,
                         "MASolution", _strict(levi, S, S_err, O), det, C,
                         {"solution": sol, "ladder": ext.ladder})

    if threads > 1 and len(valid) > 1:
        with ThreadPoolExecutor(threads) as pool:
            reports = list(pool.map(one, valid))
    else:
        reports = [one(C) for C in valid]
    mono = all(a.S + a.S_err + cfg["tol_chain"] >= b.S - b.S_err
               for a, b in zip(reports[:-1], reports[1:]))
    lower = all(r.S >= r.m - r.tol_chain for r in reports)
    return SweepReport(reports, warnings, bool(mono), bool(lower))


# ----------------------------------------------------------------------
# output
# ----------------------------------------------------------------------

SUMMARY_FIELDS = ["name", "domain", "weight", "C", "m", "S", "S_err", "O", "S_minus_m",
                  "O_minus_S", "chain_ok", "strict_status"]


def report_json(obj):
    """Deterministic JSON text for a report, a sweep, or a list of reports."""
    if isinstance(obj, (list, tuple)):
        data = {"reports": [r.to_dict() for r in obj]}
    else:
        data = obj.to_dict()
    return json.dumps(_clean(data), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _summary_row(r):
    d = r.details
    return {"name": r.name, "domain": d.get("domain", {}).get("kind", ""),
            "weight": json.dumps(d.get("weight", {}), sort_keys=True),
            "C": "" if r.C is None else repr(r.C), "m": repr(r.m), "S": repr(r.S),
            "S_err": repr(r.S_err), "O": repr(r.O), "S_minus_m": repr(r.S - r.m),
            "O_minus_S": repr(r.O - r.S), "chain_ok": r.chain_ok,
            "strict_status": r.strict_status}


def _safe(name):
    return "".join(c if c.isalnum() or c in "-_.=" else "_" for c in name)


def emit(obj, formats, path):
    """Write JSON, CSV summaries, plot-data CSVs and PNG figures under ``path``.

    Returns the list of written files.
    """
    path = Path(path)
    reports = list(obj) if isinstance(obj, (SweepReport, list, tuple)) else [obj]
    written = []
    try:
        path.mkdir(parents=True, exist_ok=True)
        if "json" in formats:
            p = path / "report.json"
            p.write_text(report_json(obj))
            written.append(p)
        if "csv" in formats:
            p = path / "summary.csv"
            with p.open("w", newline="") as fh:
                w = csv.DictWriter(fh, SUMMARY_FIELDS)
                w.writeheader()
                for r in reports:
                    w.writerow(_summary_row(r))
            written.append(p)
            for r in reports:
                lad = r.artifacts.get("ladder")
                if lad:
                    p = path / f"ladder_{_safe(r.name)}.csv"
                    with p.open("w", newline="") as fh:
                        w = csv.writer(fh)
                        w.writerow(["N", "m"])
                        w.writerows([[int(n), repr(float(m))] for n, m in lad])
                    written.append(p)
                sol = r.artifacts.get("solution")
                if sol is not None:
                    written.append(eio.write_fiber_csv(sol, path / f"fiber_{_safe(r.name)}.csv",
                                                       n_fine=200))
            if isinstance(obj, SweepReport) and reports:
                p = path / "sweep_C.csv"
                with p.open("w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["C", "S", "S_err", "m", "O"])
                    for r in reports:
                        w.writerow([repr(r.C), repr(r.S), repr(r.S_err), repr(r.m), repr(r.O)])
                written.append(p)
        if "field" in formats:
            for r in reports:
                sol = r.artifacts.get("solution")
                if sol is not None:
                    written.extend(eio.write_field(sol, path / f"field_{_safe(r.name)}"))
        if "plots" in formats:
            written.extend(_plots(obj, reports, path))
    except OSError as exc:
        raise L2ExtError(f"cannot write output under {path}: {exc}") from exc
    return written


def _plots(obj, reports, path):
    out = []
    for r in reports:
        sol = r.artifacts.get("solution")
        if sol is not None:
            prof = sol.slice_fiber(0.0)
            top = float(sol.grid.hd.fiber_top(0.0))
            t = np.linspace(prof.t[0], top, 400, endpoint=False)
            out.append(plotting.fiber_plot(t, prof(t), path / f"fiber_{_safe(r.name)}.png",
                                           C=r.C, title=f"fiber profile: {r.name}"))
        lad = r.artifacts.get("ladder")
        if lad and not isinstance(obj, SweepReport):
            out.append(plotting.ladder_plot(lad, path / f"ladder_{_safe(r.name)}.png",
                                            title=f"minimal norm: {r.name}"))
    if isinstance(obj, SweepReport) and reports:
        out.append(plotting.sweep_plot([r.C for r in reports], [r.S for r in reports],
                                       [r.S_err for r in reports], reports[0].m, reports[0].O,
                                       path / "sweep_C.png"))
    if reports:
        out.append(plotting.bounds_plot([r.name for r in reports], [r.m for r in reports],
                                        [r.S for r in reports], [r.O for r in reports],
                                        path / "bounds.png"))
    return out
