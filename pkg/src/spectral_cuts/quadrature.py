"""Adaptive Gauss-Legendre integration along cycles.

Panels are refined by comparing the rule on a panel against the rule on its
two halves.  Near declared singular points (places where the curve touches
the spectrum) the mesh is graded geometrically, and a sliver of the curve
around each such point is only kept when the integrand is integrable there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .contour import Curve, Cycle, Segment
from .errors import EvaluationFailure

_EVAL_CHUNK = 4_000_000
DIVERGENCE_EXPONENT = 0.95


@dataclass(frozen=True)
class QuadratureConfig:
    panel_order: int = 16
    tol: float = 1e-10
    max_depth: int = 30
    grading_ratio: float = 0.5
    singular_points: tuple = field(default=())
    default_radius_rel: float = 1e-8

    def __post_init__(self):
        if self.panel_order < 2:
            raise ValueError("panel_order must be at least 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.grading_ratio < 1:
            raise ValueError("grading_ratio must lie in (0, 1)")
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")
        pts = []
        for sp in self.singular_points:
            if isinstance(sp, (tuple, list)) and len(sp) == 2:
                pts.append((complex(sp[0]), None if sp[1] is None else float(sp[1])))
            else:
                pts.append((complex(sp), None))
        object.__setattr__(self, "singular_points", tuple(pts))

    def with_singular(self, points) -> "QuadratureConfig":
        return replace(self, singular_points=tuple(points))

    def to_json(self) -> dict:
        return {"panel_order": self.panel_order, "tol": self.tol, "max_depth": self.max_depth,
                "grading_ratio": self.grading_ratio,
                "singular_points": [[p.real, p.imag, r] for p, r in self.singular_points]}


@dataclass(frozen=True)
class IntegralResult:
    value: np.ndarray
    error_estimate: float
    panels_used: int
    diverged: bool = False
    max_depth_hit: bool = False
    exponents: tuple = ()


def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _vnorm(a) -> np.ndarray:
    """Max-norm over all but the first axis."""
    a = np.abs(a)
    return a.reshape(a.shape[0], -1).max(axis=1) if a.ndim > 1 else a


class _Evaluator:
    def __init__(self, f: Callable):
        self.f = f
        self.calls = 0
        self.shape = None

    def __call__(self, z: np.ndarray) -> np.ndarray:
        out = []
        step = _EVAL_CHUNK
        if self.shape is not None:
            step = max(1, _EVAL_CHUNK // max(1, int(np.prod(self.shape))))
        for s in range(0, z.size, step):
            zz = z[s:s + step]
            try:
                v = np.asarray(self.f(zz), dtype=complex)
            except EvaluationFailure:
                raise
            except Exception as exc:
                raise EvaluationFailure(f"integrand failed near z = {zz[0]}: {exc}", node=complex(zz[0])) from exc
            if v.shape[:1] != zz.shape:
                raise EvaluationFailure("integrand must return one value per node", node=complex(zz[0]))
            if not np.all(np.isfinite(v)):
                bad = np.argmax(~np.isfinite(v.reshape(v.shape[0], -1)).all(axis=1))
                raise EvaluationFailure(f"non-finite integrand value at z = {zz[bad]}", node=complex(zz[bad]))
            self.shape = v.shape[1:]
            out.append(v)
            self.calls += zz.size
        return np.concatenate(out, axis=0)


def _panel_rule(seg: Segment, ta, tb, x, w, arclength=False):
    """Nodes and weights (including dz/dt) of the Gauss rule on panels [ta, tb]."""
    ta = np.asarray(ta)[:, None]
    tb = np.asarray(tb)[:, None]
    t = ta + (tb - ta) * (x[None, :] + 1) / 2
    z = seg.point(t)
    dz = seg.derivative(t)
    wz = w[None, :] * (tb - ta) / 2 * (np.abs(dz) if arclength else dz)
    return z, wz


def _apply_rule(F: np.ndarray, wz: np.ndarray) -> np.ndarray:
    P, q = wz.shape
    F = F.reshape((P, q) + F.shape[1:])
    return np.einsum("pq,pq...->p...", wz, F)


def _singular_params(seg: Segment, points, seg_len_total: float, cfg: QuadratureConfig):
    """(t*, half-width in t) for the singular points sitting on this segment."""
    out = []
    for p, r in points:
        rad = r if r is not None else cfg.default_radius_rel * seg_len_total
        if float(seg.distance(p)[0]) <= 4 * rad:
            t = seg.param_of(p)
            out.append((t, rad / seg.length))
    return sorted(out)


def _graded_breaks(t_star: float, e: float, q: float, lo: float, hi: float):
    """Geometric breakpoints t* +- e / q^k inside [lo, hi]."""
    pts = []
    d = e
    while True:
        moved = False
        if t_star + d < hi:
            pts.append(t_star + d)
            moved = True
        if t_star - d > lo:
            pts.append(t_star - d)
            moved = True
        if not moved:
            break
        d = d / q
    return pts


def _jacobi_sliver(seg: Segment, ta: float, tb: float, t_star: float, e: float, order: int,
                   arclength: bool, ev) -> tuple:
    """Sliver panel with an endpoint on a singular point, product rule for s^(-e).

    With s the parameter distance to t*, the integrand is written as
    s^(-e) g(s) and g is integrated by Gauss-Jacobi; two orders give the
    error estimate.  Never refined: bisection cannot resolve an endpoint
    singularity below the parameter resolution.
    """
    H = tb - ta
    sign = 1.0 if t_star == ta else -1.0
    e = min(max(e, 0.0), DIVERGENCE_EXPONENT)
    vals = []
    for n in (order, 2 * order):
        xj, wj = roots_jacobi(n, 0.0, -e)
        sj = H * (xj + 1) / 2
        t = t_star + sign * sj
        z = seg.point(t)
        dz = seg.derivative(t)
        meas = np.abs(dz) if arclength else dz
        F = ev(z)
        wt = wj * (2 * sj / H) ** e * H / 2 * meas
        vals.append(np.einsum("q,q...->...", wt, F))
    return vals[1], float(np.abs(vals[1] - vals[0]).max())


def fit_exponent(dists: np.ndarray, norms: np.ndarray, inner: int = 6) -> float:
    """Exponent e of a power law norm ~ dist^(-e) fitted on the smallest distances."""
    dists = np.asarray(dists, dtype=float)
    norms = np.asarray(norms, dtype=float)
    keep = (norms > 0) & np.isfinite(norms) & (dists > 0)
    dists, norms = dists[keep], norms[keep]
    if dists.size < 2:
        return 0.0
    order = np.argsort(dists)[:inner]
    slope = np.polyfit(np.log(dists[order]), np.log(norms[order]), 1)[0]
    return float(-slope)


def integrate(f: Callable, cycle, cfg: QuadratureConfig | None = None,
              arclength: bool = False) -> IntegralResult:
    """Integral of ``f`` along the oriented cycle (or single curve).

    ``f`` maps a 1-D array of nodes to an array whose first axis runs over the
    nodes.  With ``arclength=True`` the measure is |dz| instead of dz.
    Summation order is fixed by the adaptive schedule, which depends only on
    ``f`` and ``cfg``.
    """
    cfg = cfg or QuadratureConfig()
    if isinstance(cycle, Curve):
        cycle = Cycle([cycle])
    x, w = _gauss(cfg.panel_order)
    ev = _Evaluator(f)
    total_len = cycle.length
    # positively oriented segments with a sign per curve: reversing a cycle
    # then negates every panel value exactly and keeps the summation order
    segs = [seg for c in cycle.curves for seg in c.segments]
    sg = [1.0 if arclength else float(c.orientation) for c in cycle.curves for _ in c.segments]
    q = cfg.grading_ratio

    # initial panels
    init = []          # (seg index, ta, tb)
    slivers = []       # (seg index, ta, tb, t_star, e)
    for si, seg in enumerate(segs):
        breaks = {0.0, 1.0}
        sing = _singular_params(seg, cfg.singular_points, total_len, cfg)
        for t_star, e in sing:
            breaks.add(t_star)
            for tb in _graded_breaks(t_star, e, q, 0.0, 1.0):
                breaks.add(tb)
        if seg.kind == "arc":
            n_arc = max(1, int(math.ceil(abs(seg.span) / (math.pi / 4))))
            breaks.update(np.linspace(0, 1, n_arc + 1)[1:-1].tolist())
        else:
            n_lin = max(1, int(math.ceil(8 * seg.length / max(total_len, 1e-300))))
            breaks.update(np.linspace(0, 1, n_lin + 1)[1:-1].tolist())
        bs = sorted(breaks)
        for ta, tb in zip(bs[:-1], bs[1:]):
            sl = next(((ts, e) for ts, e in sing
                       if (ta == ts or tb == ts) and tb - ta <= e + 8 * np.finfo(float).eps), None)
            if sl is not None:
                slivers.append((si, ta, tb, sl[0], sl[1]))
            init.append((si, ta, tb, sl is not None))

    # exponent fit per on-curve singular point
    exponents = []
    drop = set()
    ex_at = {}
    for si, seg in enumerate(segs):
        for t_star, e in _singular_params(seg, cfg.singular_points, total_len, cfg):
            ds, ns = [], []
            for side in (1.0, -1.0):
                d = e
                ts = []
                while 0.0 < t_star + side * d < 1.0 and d < 0.5:
                    ts.append(t_star + side * d)
                    d *= 2
                if ts:
                    vals = ev(seg.point(np.array(ts)))
                    ns.extend(_vnorm(vals).tolist())
                    ds.extend((np.abs(np.array(ts) - t_star) * seg.length).tolist())
            if ds:
                ex = fit_exponent(np.array(ds), np.array(ns))
                exponents.append((complex(seg.point(t_star)), ex))
                ex_at[(si, t_star)] = ex
                if ex >= DIVERGENCE_EXPONENT:
                    drop.add((si, t_star))

    # coarse pass on the initial panels to fix the absolute tolerance
    by_seg = {}
    for si, ta, tb, is_sliver in init:
        by_seg.setdefault(si, []).append((ta, tb, is_sliver))
    active = []  # (si, ta, tb, depth, value)
    coarse_total = None
    diverged = False
    sliver_bound = 0.0
    settled = []       # sliver values, added to the total in a fixed order
    for si, lst in by_seg.items():
        seg = segs[si]
        ta = np.array([a for a, _, _ in lst])
        tb = np.array([b for _, b, _ in lst])
        z, wz = _panel_rule(seg, ta, tb, x, w, arclength)
        vals = sg[si] * _apply_rule(ev(z.ravel()), wz)
        for k, (a, b, is_sliver) in enumerate(lst):
            if is_sliver:
                t_star = next(ts for s2, a2, b2, ts, _ in slivers if s2 == si and a2 == a and b2 == b)
                if (si, t_star) in drop:
                    diverged = True
                    sliver_bound += float(np.abs(vals[k]).max())
                    continue
                v, e_sl = _jacobi_sliver(seg, a, b, t_star, ex_at.get((si, t_star), 0.0), cfg.panel_order,
                                         arclength, ev)
                v = sg[si] * v
                settled.append(v)
                sliver_bound += e_sl
                coarse_total = v if coarse_total is None else coarse_total + v
                continue
            active.append((si, a, b, 0, vals[k]))
            coarse_total = vals[k] if coarse_total is None else coarse_total + vals[k]
    if coarse_total is None:
        return IntegralResult(np.zeros(ev.shape or ()), sliver_bound, 0, diverged, False, tuple(exponents))
    scale = max(1.0, float(np.abs(coarse_total).max()))
    abs_tol = cfg.tol * scale
    eps = np.finfo(float).eps

    total = np.zeros_like(coarse_total)
    for v in settled:
        total = total + v
    err = sliver_bound
    panels = 0
    depth_hit = False
    while active:
        # evaluate both halves of every active panel in one batch per segment
        groups = {}
        for idx, item in enumerate(active):
            groups.setdefault(item[0], []).append(idx)
        halves = [None] * len(active)
        for si, idxs in groups.items():
            seg = segs[si]
            ta = np.array([active[i][1] for i in idxs])
            tb = np.array([active[i][2] for i in idxs])
            tm = 0.5 * (ta + tb)
            z, wz = _panel_rule(seg, np.concatenate([ta, tm]), np.concatenate([tm, tb]), x, w, arclength)
            vals = sg[si] * _apply_rule(ev(z.ravel()), wz)
            m = len(idxs)
            absvals = _vnorm(np.abs(vals))
            for j, i in enumerate(idxs):
                halves[i] = (vals[j], vals[m + j], tm[j], max(absvals[j], absvals[m + j]))
        nxt = []
        for item, (left, right, tm, mag) in zip(active, halves):
            si, ta, tb, depth, whole = item
            both = left + right
            e_panel = float(np.abs(both - whole).max())
            frac = segs[si].length * (tb - ta) / total_len
            ok = e_panel <= max(abs_tol * frac, 64 * eps * mag)
            if ok or depth + 1 >= cfg.max_depth:
                if not ok:
                    depth_hit = True
                total = total + both
                err += e_panel
                panels += 2
            else:
                nxt.append((si, ta, tm, depth + 1, left))
                nxt.append((si, tm, tb, depth + 1, right))
        active = nxt
    return IntegralResult(total, float(err), panels, diverged, depth_hit, tuple(exponents))


# ---------------------------------------------------------------------------
# integrability probe


def _locate(curve: Curve, p: complex):
    segs = curve.traversal()
    d = [float(s.distance(p)[0]) for s in segs]
    i = int(np.argmin(d))
    return segs, i, segs[i].param_of(p)


def points_along(curve: Curve, p: complex, dists: np.ndarray, direction: int) -> np.ndarray:
    """Points on the curve at arclength ``dists`` from ``p`` in one direction."""
    segs, i, t = _locate(curve, p)
    out = []
    for d in dists:
        j, tt, rem = i, t, float(d)
        for _ in range(len(segs) + 1):
            seg = segs[j]
            avail = (1 - tt) * seg.length if direction > 0 else tt * seg.length
            if rem <= avail:
                tt = tt + direction * rem / seg.length
                break
            rem -= avail
            j = (j + direction) % len(segs)
            tt = 0.0 if direction > 0 else 1.0
        out.append(complex(segs[j].point(tt)))
    return np.array(out)


def _resolvent_norms(T, x):
    """zs -> ||(zI - T)^{-1} x|| for each z, restricted to the support of x for diagonal models."""
    if not T.is_diagonal:
        return lambda zs: np.array([T.vector_norm(r) for r in T.resolvent_many(zs, x)])
    idx = np.flatnonzero(x)
    lam = T.eigenvalues[idx]
    w = getattr(T, "weights", None)
    w = np.ones(idx.size) if w is None else np.asarray(w)[idx]
    xs = x[idx]

    def norms(zs):
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        T.check_off_spectrum(zs)
        r = xs[None, :] / (zs[:, None] - lam[None, :])
        return np.sqrt((w[None, :] * np.abs(r) ** 2).sum(axis=1))

    return norms


def integrability_probe(T, x, curve: Curve, singular_points: Sequence,
                        cfg: QuadratureConfig | None = None) -> dict:
    """Check that z -> ||(zI - T)^{-1} x|| is integrable along ``curve``.

    A power law ``dist(z, p)^(-e)`` is fitted near every singular point p;
    the integral is deemed finite when every exponent is below 0.95.
    """
    x = np.asarray(x, dtype=complex)
    if not np.any(x):
        raise ValueError("probe vector must be non-zero")
    resolvent_norms = _resolvent_norms(T, x)
    L = curve.length
    dists = L * 2.0 ** -np.arange(4, 34)
    report = {"finite": True, "estimate": 0.0, "growth_exponent": 0.0, "points": []}
    worst = 0.0
    pts = [complex(p[0]) if isinstance(p, (tuple, list)) else complex(p) for p in singular_points]
    for p in pts:
        if float(curve.distance(p)[0]) > 1e-9 * L:
            continue
        ds, ns = [], []
        for direction in (1, -1):
            zs = points_along(curve, p, dists, direction)
            try:
                ns.extend(resolvent_norms(zs).tolist())
            except Exception:
                # a sample landed on the spectrum: treat as non-integrable
                report["points"].append({"point": p, "exponent": math.inf})
                worst = math.inf
                break
            ds.extend(dists.tolist())
        else:
            e = fit_exponent(np.array(ds), np.array(ns))
            report["points"].append({"point": p, "exponent": e})
            worst = max(worst, e)
    report["growth_exponent"] = worst
    report["finite"] = worst < DIVERGENCE_EXPONENT
    if report["finite"]:
        qcfg = replace(cfg or QuadratureConfig(), tol=1e-6, singular_points=tuple((p, None) for p in pts))

        report["estimate"] = float(abs(integrate(resolvent_norms, curve, qcfg, arclength=True).value))
    else:
        report["estimate"] = math.inf
    return report
