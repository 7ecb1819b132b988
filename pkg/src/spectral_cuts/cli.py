"""Command-line front end.

Every command reads operator / cycle / cover / region files, runs one
computation and writes deterministic JSON (sorted keys, 17 significant
digits, complex numbers as ``[re, im]``) plus CSV plot data into ``--out``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .calculus import calculus_integral, calculus_restrict, parse_function, route_agreement
from .contour import Cycle, Region
from .cuts import opnorm, plain_spectral_cut, resolvent_norm_samples, verify_projection
from .decompose import CoverPair, super_decompose
from .errors import ParseError, SpectralCutsError
from .operators import OperatorModel, operator_from_json, operator_to_json
from .quadrature import QuadratureConfig

# ---------------------------------------------------------------------------
# deterministic serialisation


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if s in ("-0", "0"):
        return "0"
    return s


def _plain(obj):
    """Convert numpy and complex values into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    return str(obj)


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed float format, two-space indent."""
    out = io.StringIO()

    def emit(v, ind):
        pad = "  " * ind
        if isinstance(v, dict):
            if not v:
                out.write("{}")
                return
            out.write("{\n")
            keys = sorted(v)
            for i, k in enumerate(keys):
                out.write(pad + "  " + json.dumps(k) + ": ")
                emit(v[k], ind + 1)
                out.write(",\n" if i < len(keys) - 1 else "\n")
            out.write(pad + "}")
        elif isinstance(v, list):
            if not v:
                out.write("[]")
                return
            if all(not isinstance(u, (dict, list)) for u in v):
                out.write("[" + ", ".join(_scalar(u) for u in v) + "]")
                return
            out.write("[\n")
            for i, u in enumerate(v):
                out.write(pad + "  ")
                emit(u, ind + 1)
                out.write(",\n" if i < len(v) - 1 else "\n")
            out.write(pad + "]")
        else:
            out.write(_scalar(v))

    emit(_plain(obj), 0)
    out.write("\n")
    return out.getvalue()


def _scalar(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return _fmt_float(v)
    return json.dumps(v)


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt_float(float(v)).strip('"') for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# inputs


def _load_json(path: str, what: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {what} file {path!r}: {exc.strerror}") from None
    try:
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{what} file {path!r} is not valid JSON: {exc}") from None


class Run:
    """Collects inputs and settings; its manifest hash is embedded in every report."""

    def __init__(self, args):
        self.args = args
        self.inputs = []
        self.out = Path(args.out)
        self.cfg = QuadratureConfig(panel_order=args.panel_order, tol=args.tol,
                                    max_depth=args.max_depth, grading_ratio=args.grading)

    def load(self, path: str, what: str):
        obj, digest = _load_json(path, what)
        self.inputs.append({"role": what, "name": os.path.basename(path), "sha256": digest})
        return obj

    def operator(self, path: str) -> OperatorModel:
        return operator_from_json(self.load(path, "operator"))

    def cycle(self, path: str) -> Cycle:
        return Cycle.from_json(self.load(path, "cycle"))

    def manifest(self) -> dict:
        a = self.args
        flags = {k: v for k, v in sorted(vars(a).items())
                 if k not in ("out", "func", "operator", "cycle", "cover", "domain") and not callable(v)}
        return {"command": a.command + (f" {a.action}" if getattr(a, "action", None) else ""),
                "inputs": self.inputs, "flags": flags, "seed": a.seed}

    def header(self) -> dict:
        m = self.manifest()
        digest = hashlib.sha256(dumps(m).encode()).hexdigest()
        return {"tool": "spectral-cuts", "version": __version__, "manifest": m, "manifest_sha256": digest,
                "tolerances": self.cfg.to_json()}

    def write_json(self, name: str, payload: dict) -> None:
        atomic_write(self.out / name, dumps({**self.header(), **payload}))

    def write_csv(self, name: str, header, rows) -> None:
        atomic_write(self.out / name, _csv_text(header, rows))


def _singular(text: str):
    if text in ("auto", None):
        return "auto"
    if text == "none":
        return []
    pts = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        try:
            re_, im_ = (float(v) for v in item.split(","))
        except ValueError:
            raise ParseError(f"--singular expects 'auto', 'none' or 're,im;re,im', got {item!r}") from None
        pts.append(complex(re_, im_))
    return pts


def _matrix_json(P: np.ndarray, diagonal: bool) -> dict:
    return {"diagonal": diagonal, "entries": P}


def _projection_payload(R) -> dict:
    return {"P": _matrix_json(R.P, R.diagonal), "rank": R.rank, "error_estimate": R.error_estimate,
            "idempotency_defect": R.idempotency_defect, "commutator_defect": R.commutator_defect,
            "interior_spectrum": R.interior_spectrum, "exterior_spectrum": R.exterior_spectrum}


def _multiplicities(eig: np.ndarray, scale: float) -> list:
    order = np.lexsort((eig.imag, eig.real))
    groups = []
    tol = 1e-8 * scale
    for z in eig[order]:
        for g in groups:
            if abs(g[0] - z) <= tol:
                g[1] += 1
                break
        else:
            groups.append([complex(z), 1])
    return [{"value": z, "multiplicity": m} for z, m in groups]


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(run: Run) -> None:
    T = run.operator(run.args.operator)
    eig = T.eigenvalues
    run.write_json("spectrum.json", {"n": T.n, "eigenvalues": eig, "multiplicities": _multiplicities(eig, T.scale)})
    run.write_csv("scatter.csv", ["re", "im"], zip(eig.real, eig.imag))


def cmd_cut(run: Run) -> None:
    a = run.args
    T = run.operator(a.operator)
    cycle = run.cycle(a.cycle)
    R = plain_spectral_cut(T, cycle, run.cfg, singular=_singular(a.singular))
    report = verify_projection(T, R, cycle)
    run.write_json("projection.json", _projection_payload(R))
    run.write_json("report.json", {"checks": report, "all_pass": all(v["pass"] for v in report.values()),
                                   "complement_defect": R.extra.get("complement_defect"),
                                   "singular_points": R.extra.get("singular_points", []),
                                   "growth_exponents": R.extra.get("growth_exponents", [])})
    zs, norms = resolvent_norm_samples(T, cycle, a.samples)
    run.write_csv("resolvent_norm.csv", ["re", "im", "resolvent_norm"], zip(zs.real, zs.imag, norms))


def _function(run: Run):
    a = run.args
    domain = Region.from_json(run.load(a.domain, "domain")) if a.domain else None
    return parse_function(a.f, domain, a.branch_angle)


def cmd_calculus(run: Run) -> None:
    a = run.args
    T = run.operator(a.operator)
    cycle = run.cycle(a.cycle)
    f = _function(run)
    sing = _singular(a.singular)
    out = {"function": a.f, "route": a.route}
    P = plain_spectral_cut(T, cycle, run.cfg, singular=sing, complement=False)
    results = {}
    if a.route in ("restrict", "both"):
        results["restrict"] = calculus_restrict(T, P, f, run.cfg)
    if a.route in ("integral", "both"):
        results["integral"] = calculus_integral(T, cycle, f, run.cfg, singular=sing, P=P)
    for name, r in results.items():
        out[name] = {"F": _matrix_json(r.F, r.diagonal), "diagnostics": r.diagnostics}
    if len(results) == 2:
        out["agreement"] = route_agreement(results["restrict"], results["integral"])
        out["agreement_pass"] = out["agreement"] <= 1e-7
    run.write_json("calculus.json", out)


def cmd_decompose(run: Run) -> None:
    a = run.args
    T = run.operator(a.operator)
    cover = CoverPair.from_json(run.load(a.cover, "cover"))
    from .perturbation import PerturbedDiagonal

    w = super_decompose(T, cover, run.cfg, route=a.route, compare_dense=isinstance(T, PerturbedDiagonal))
    tol = 1e-8 * T.norm
    rep = dict(w.report)
    rep["commutator_pass"] = w.R.commutator_defect * T.norm <= tol if not w.R.diagonal else True
    rep["idempotent_pass"] = w.R.idempotency_defect <= 1e-7
    rep["witness_pass"] = bool(rep["commutator_pass"] and rep["idempotent_pass"]
                               and rep["interior_spec_in_U"] and rep["exterior_spec_in_V"])
    run.write_json("witness.json", {"cycle": w.cycle, "R": _projection_payload(w.R), "report": rep})


def cmd_perturb(run: Run) -> None:
    from .perturbation import (PerturbedDiagonal, build_appropriate_grid, check_appropriate, densify,
                               series_calculus, series_projection)

    a = run.args
    T = run.operator(a.operator)
    if not isinstance(T, PerturbedDiagonal):
        raise ParseError("perturb commands need an operator of kind 'diag_plus_series'")
    cap = a.cap
    if a.action == "grid":
        g = build_appropriate_grid(T, a.nx, a.ny, cap)
        run.write_json("grid.json", {**g.to_json(), "cap": T.default_cap if cap is None else cap,
                                     "summability": float(T.summability)})
        return
    if not a.cycle:
        raise ParseError(f"perturb {a.action} needs a cycle file")
    cycle = run.cycle(a.cycle)
    if a.action == "curve-check":
        scores = check_appropriate(T, cycle, None, cap)
        run.write_json("report.json", {"appropriate": True, "coordinate_scores": scores})
        return
    D = densify(T)
    if a.action == "project":
        R = series_projection(T, cycle, run.cfg, None, cap)
        Rd = plain_spectral_cut(D, cycle, run.cfg, singular=[], complement=False)
        run.write_json("projection.json", _projection_payload(R))
        run.write_json("report.json", {
            "series_vs_dense": opnorm(R.P - Rd.P),
            "complement_defect": R.extra.get("complement_defect"),
            "max_cond_M": R.extra.get("max_cond_M"), "max_norm_A": R.extra.get("max_norm_A"),
            "N_F": R.extra.get("N_F"), "coordinate_scores": R.extra.get("coordinate_scores")})
        return
    f = _function(run)
    S = series_calculus(T, cycle, f, run.cfg, None, cap)
    Pd = plain_spectral_cut(D, cycle, run.cfg, singular=[], complement=False)
    Fr = calculus_restrict(D, Pd, f, run.cfg)
    Fi = calculus_integral(D, cycle, f, run.cfg, singular=[], P=Pd)
    run.write_json("calculus.json", {
        "function": a.f, "F": _matrix_json(S.F, False), "diagnostics": S.diagnostics,
        "series_vs_dense_restrict": route_agreement(S, Fr),
        "series_vs_dense_integral": route_agreement(S, Fi),
        "dense_route_agreement": route_agreement(Fr, Fi)})


def cmd_fixture(run: Run) -> None:
    """Write one of the bundled fixtures (operator and, where natural, its cycle)."""
    from . import fixtures
    from .contour import circle

    a = run.args
    name = a.name
    cyc = None
    if name == "diagonal":
        from .operators import Diagonal

        T = Diagonal([0, 2])
        cyc = Cycle([circle(0, 1)])
    elif name == "tangent-discs":
        T = fixtures.tangent_discs(a.n or 10_000, a.seed)
        cyc = fixtures.tangent_disc_curve()
    elif name == "perturbed":
        T = fixtures.perturbed_fixture(a.n or 12, a.k, a.seed)
    elif name == "random-dense":
        T = fixtures.random_dense(a.n or 8, a.seed)
    else:
        T = fixtures.clustered_dense([0, 3], (a.n or 6) // 2, a.seed)
        cyc = Cycle([circle(0, 1)])
    atomic_write(run.out / "operator.json", dumps(operator_to_json(T)))
    if cyc is not None:
        atomic_write(run.out / "cycle.json", dumps(cyc.to_json()))


# ---------------------------------------------------------------------------
# argument parsing


def _grading(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("--grading must lie in (0, 1)")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("--seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
    common.add_argument("--panel-order", type=int, default=16, help="Gauss-Legendre nodes per panel")
    common.add_argument("--max-depth", type=int, default=30, help="maximum panel bisection depth")
    common.add_argument("--grading", type=_grading, default=0.5, help="panel grading ratio near singular points")
    common.add_argument("--seed", type=_seed, default=0, help="seed for random fixtures")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--singular", default="auto", help="'auto', 'none' or 're,im;re,im'")

    p = argparse.ArgumentParser(prog="spectral-cuts", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues and scatter data")
    s.add_argument("operator")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("cut", parents=[common], help="projection along a cycle with verification report")
    s.add_argument("operator")
    s.add_argument("cycle")
    s.add_argument("--samples", type=int, default=256, help="resolvent-norm samples along the cycle")
    s.set_defaults(func=cmd_cut)

    s = sub.add_parser("calculus", parents=[common], help="f_gamma(T) by one or both routes")
    s.add_argument("operator")
    s.add_argument("cycle")
    s.add_argument("--f", required=True, help='expression in z, e.g. "exp(z)*(z-1)/(z+3)"')
    s.add_argument("--domain", help="region JSON for the domain of f")
    s.add_argument("--branch-angle", type=float, default=0.0, help="direction of log/sqrt branch cuts")
    s.add_argument("--route", choices=["both", "restrict", "integral"], default="both")
    s.set_defaults(func=cmd_calculus)

    s = sub.add_parser("decompose", parents=[common], help="witness subordinate to an open cover")
    s.add_argument("operator")
    s.add_argument("cover")
    s.add_argument("--route", choices=["auto", "series", "contour"], default="auto")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("perturb", parents=[common], help="series machinery for diagonal-plus-series models")
    s.add_argument("action", choices=["grid", "curve-check", "project", "calculus"])
    s.add_argument("operator")
    s.add_argument("cycle", nargs="?")
    s.add_argument("--nx", type=int, default=8)
    s.add_argument("--ny", type=int, default=8)
    s.add_argument("--cap", type=float, default=None, help="decomposability score cap")
    s.add_argument("--f", default="1")
    s.add_argument("--domain")
    s.add_argument("--branch-angle", type=float, default=0.0)
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("fixture", parents=[common], help="write a bundled fixture")
    s.add_argument("name", choices=["diagonal", "tangent-discs", "perturbed", "random-dense", "clustered"])
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--k", type=int, default=2)
    s.set_defaults(func=cmd_fixture)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(Run(args))
    except SpectralCutsError as exc:
        print(f"spectral-cuts: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
