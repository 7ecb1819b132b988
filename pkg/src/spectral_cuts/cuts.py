"""Spectral-cut projections by contour integration and their algebra.

``riesz_projection`` handles cycles that keep away from the spectrum;
``plain_spectral_cut`` also accepts cycles that touch the spectral region at
isolated points, where the quadrature is graded and the integrability of the
resolvent is probed first.  Results carry their own diagnostics and can be
checked against the Schur-based oracle with ``verify_projection``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .contour import Curve, Cycle, classify_many, cycle_union, probe_points
from .errors import (
    BoundaryEigenvalue,
    EigenvalueOnContour,
    EmptyIntersection,
    GeometryError,
    InteriorsOverlap,
    NonIntegrableResolvent,
    ProductNotZero,
    QuadratureDiverged,
    SpectrumMissesIntersection,
)
from .operators import OperatorModel, spectral_subspace_oracle
from .quadrature import QuadratureConfig, integrate, integrability_probe

RANK_CUTOFF = 1e-8
INCLUSION_REL = 1e-7
GAP_REL = 1e-7
PRODUCT_TOL = 1e-8
TWO_PI_I = 2j * np.pi


def opnorm(A: np.ndarray) -> float:
    """Spectral norm; for a 1-D array the norm of the diagonal matrix it represents."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    if A.ndim == 1:
        return float(np.abs(A).max())
    return float(np.linalg.norm(A, 2))


def _side_function(where) -> Callable:
    """Map a cycle (or list of curves) to a classifier returning 1 / 0 / -1."""
    if where is None:
        return None
    if isinstance(where, Cycle):
        return lambda p, tol: classify_many(where, p, tol)
    if isinstance(where, Curve):
        return _side_function(Cycle([where.with_orientation(1)]))
    if isinstance(where, (list, tuple)):
        cycles = [c if isinstance(c, Cycle) else Cycle([c.with_orientation(1)]) for c in where]

        def side(p, tol):
            cls = np.array([classify_many(c, p, tol) for c in cycles])
            inside = (cls == 1).any(axis=0)
            on = (cls == -1).any(axis=0)
            return np.where(inside, 1, np.where(on, -1, 0))

        return side
    if callable(where):
        return where
    raise TypeError(f"cannot classify against {type(where).__name__}")


@dataclass
class ProjectionResult:
    """A computed candidate projection with diagnostics.

    For diagonal models ``P`` is stored as its diagonal (``diagonal=True``).
    """

    P: np.ndarray
    diagonal: bool
    error_estimate: float
    idempotency_defect: float
    commutator_defect: float
    rank: int
    interior_spectrum: np.ndarray
    exterior_spectrum: np.ndarray
    inclusion_ok: bool
    cycle: object = None
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.P) if self.diagonal else self.P

    def range_basis(self) -> np.ndarray:
        if self.diagonal:
            return np.eye(self.n, dtype=complex)[:, np.abs(self.P) > 0.5]
        U, s, _ = np.linalg.svd(self.P)
        return U[:, s > RANK_CUTOFF]

    def kernel_basis(self) -> np.ndarray:
        if self.diagonal:
            return np.eye(self.n, dtype=complex)[:, np.abs(self.P) <= 0.5]
        _, s, Vh = np.linalg.svd(self.P)
        return Vh[(s > RANK_CUTOFF).sum():].conj().T

    @classmethod
    def from_matrix(cls, T: OperatorModel, P, where=None, error_estimate: float = 0.0,
                    extra: dict | None = None) -> "ProjectionResult":
        P = np.asarray(P, dtype=complex)
        diagonal = P.ndim == 1
        tol = INCLUSION_REL * T.scale
        eig = T.eigenvalues
        if diagonal:
            lam = T.eigenvalues
            idem = float(np.abs(P * P - P).max()) if P.size else 0.0
            comm = 0.0
            rank = int((np.abs(P) > RANK_CUTOFF).sum())
            on = np.abs(P) > 0.5
            interior, exterior = lam[on], lam[~on]
        else:
            A = np.asarray(T.dense())
            idem = opnorm(P @ P - P)
            comm = opnorm(P @ A - A @ P) / max(T.norm, 1e-300)
            U, s, Vh = np.linalg.svd(P)
            r = int((s > RANK_CUTOFF).sum())
            rank = r
            B = U[:, :r]
            N = Vh[r:].conj().T
            interior = np.linalg.eigvals(B.conj().T @ A @ B) if r else np.zeros(0, complex)
            exterior = np.linalg.eigvals(N.conj().T @ A @ N) if r < P.shape[0] else np.zeros(0, complex)
        side = _side_function(where)
        ok = True

        def near_spectrum(mu):
            return np.abs(mu[:, None] - eig[None, :]).min(axis=1) <= tol if mu.size else np.zeros(0, bool)

        if side is not None:
            if interior.size:
                s_in = side(interior, tol)
                ok &= bool(np.all(near_spectrum(interior)) and np.all(s_in != 0))
            if exterior.size:
                s_out = side(exterior, tol)
                ok &= bool(np.all(near_spectrum(exterior)) and np.all(s_out != 1))
        return cls(P, diagonal, float(error_estimate), float(idem), float(comm), rank,
                   interior, exterior, bool(ok), where, dict(extra or {}))


# ---------------------------------------------------------------------------
# helpers


def _resolvent_integrand(T: OperatorModel, X=None, weight: Callable | None = None):
    """z -> (1/2 pi i) f(z) (zI - T)^{-1} X; diagonal models return only the diagonal."""
    if X is None and T.is_diagonal:
        lam = T.eigenvalues

        def f(z):
            vals = 1.0 / (z[:, None] - lam[None, :])
            if weight is not None:
                vals = vals * weight(z)[:, None]
            return vals / TWO_PI_I
    else:
        rhs = np.eye(T.n, dtype=complex) if X is None else X

        def f(z):
            vals = T.resolvent_many(z, rhs)
            if weight is not None:
                vals = vals * weight(z).reshape((-1,) + (1,) * (vals.ndim - 1))
            return vals / TWO_PI_I
    return f


def spectrum_gap(T: OperatorModel, cycle) -> float:
    if isinstance(cycle, Curve):
        cycle = Cycle([cycle])
    eig = T.eigenvalues
    return float(cycle.distance(eig).min()) if eig.size else np.inf


def outer_circle_radius(T: OperatorModel, cycle: Cycle) -> float:
    """Radius of the big circle tau: ||T|| + 1, enlarged if the cycle sticks out."""
    x0, x1, y0, y1 = cycle.bounding_box
    reach = max(abs(complex(x, y)) for x in (x0, x1) for y in (y0, y1))
    r = T.norm + 1.0
    return r if r > reach * (1 + 1e-9) else 1.25 * reach


def complement_cycle(T: OperatorModel, cycle: Cycle) -> Cycle:
    """tau together with the reversed cycle (tau a circle about 0 enclosing everything)."""
    from .contour import circle

    tau = circle(0j, outer_circle_radius(T, cycle))
    return Cycle([tau] + [c.reversed() for c in cycle.curves])


def auto_singular_points(T: OperatorModel, cycle: Cycle, rel: float = 1e-2, max_points: int = 16):
    """Cycle points closest to the spectrum, one per cluster of nearby eigenvalues."""
    eig = T.eigenvalues
    scale = T.scale
    d = cycle.distance(eig)
    idx = np.nonzero(d <= rel * scale)[0]
    if idx.size == 0:
        return []
    idx = idx[np.argsort(d[idx], kind="stable")]
    segs = cycle.traversal()
    chosen = []
    for i in idx:
        lam = eig[i]
        ds = [float(s.distance(lam)[0]) for s in segs]
        s = segs[int(np.argmin(ds))]
        p = complex(s.point(s.param_of(lam)))
        if all(abs(p - q) > rel * scale for q in chosen):
            chosen.append(p)
        if len(chosen) >= max_points:
            break
    return chosen


def _resolve_singular(T, cycle, singular, cfg):
    if isinstance(singular, str):
        if singular != "auto":
            raise ValueError("singular must be 'auto' or a list of points")
        pts = auto_singular_points(T, cycle)
    else:
        pts = [complex(p[0]) if isinstance(p, (tuple, list)) else complex(p) for p in singular]
    keep = {complex(p) for p, _ in cfg.singular_points}
    merged = list(cfg.singular_points) + [(p, None) for p in pts if p not in keep]
    return cfg.with_singular(merged), pts


# ---------------------------------------------------------------------------
# projections


def riesz_projection(T: OperatorModel, cycle, cfg: QuadratureConfig | None = None) -> ProjectionResult:
    """P = (1/2 pi i) closed integral of (zI - T)^{-1} dz along a cycle off the spectrum."""
    cfg = cfg or QuadratureConfig()
    if isinstance(cycle, Curve):
        cycle = Cycle([cycle.with_orientation(1)])
    gap = spectrum_gap(T, cycle)
    if gap <= GAP_REL * T.scale:
        raise EigenvalueOnContour(f"an eigenvalue lies within {gap:.3g} of the cycle")
    res = integrate(_resolvent_integrand(T), cycle, cfg)
    if res.diverged:
        raise QuadratureDiverged("contour integral diverged")
    out = ProjectionResult.from_matrix(T, res.value, cycle, res.error_estimate,
                                       {"panels": res.panels_used, "max_depth_hit": res.max_depth_hit,
                                        "gap": gap})
    return out


def prepare_cut(T: OperatorModel, cycle, cfg: QuadratureConfig | None, singular="auto"):
    """Shared preconditions of cuts along touching cycles.

    Rejects eigenvalues on the cycle, declares the touching points as
    singular points of the quadrature and probes the resolvent there.
    Returns ``(cycle, cfg, points, exponents, gap)``.
    """
    cfg = cfg or QuadratureConfig()
    if isinstance(cycle, Curve):
        cycle = Cycle([cycle.with_orientation(1)])
    gap = spectrum_gap(T, cycle)
    radius = cfg.default_radius_rel * cycle.length
    if gap <= max(radius, GAP_REL * T.scale * 1e-6):
        raise EigenvalueOnContour(f"an eigenvalue lies on the cycle (distance {gap:.3g})")
    cfg, pts = _resolve_singular(T, cycle, singular, cfg)
    exponents = []
    for p in pts:
        curve = next(c for c in cycle.curves if float(c.distance(p)[0]) <= 1e-9 * max(cycle.length, 1))
        if T.is_diagonal:
            # the resolvent is diagonal: the worst test vector is the nearest coordinate
            k = int(np.argmin(np.abs(T.eigenvalues - p)))
            probes = [np.eye(1, T.n, k, dtype=complex).ravel()]
        else:
            probes = list(np.eye(T.n, dtype=complex))
        worst = 0.0
        for x in probes:
            rep = integrability_probe(T, x, curve, [p], cfg)
            worst = max(worst, rep["growth_exponent"])
            if not rep["finite"]:
                raise NonIntegrableResolvent(
                    f"resolvent is not integrable near {p} (growth exponent {rep['growth_exponent']:.3f})",
                    point=p, exponent=rep["growth_exponent"])
        exponents.append((p, worst))
    return cycle, cfg, pts, exponents, gap


def plain_spectral_cut(T: OperatorModel, cycle, cfg: QuadratureConfig | None = None,
                       singular="auto", complement: bool = True) -> ProjectionResult:
    """Projection along a cycle that may touch the spectral region at isolated points.

    The touching points (``singular``) get graded panels; the resolvent must
    be integrable near each of them on a basis of test vectors.  When
    ``complement`` is set, Q is computed independently over tau joined with
    the reversed cycle and ||P + Q - I|| is recorded.
    """
    cycle, cfg, pts, exponents, gap = prepare_cut(T, cycle, cfg, singular)
    res = integrate(_resolvent_integrand(T), cycle, cfg)
    if res.diverged:
        bad = max(res.exponents, key=lambda t: t[1])
        raise QuadratureDiverged(f"integral diverged near {bad[0]}", point=bad[0], exponent=bad[1])
    extra = {"panels": res.panels_used, "max_depth_hit": res.max_depth_hit, "gap": gap,
             "singular_points": pts, "growth_exponents": exponents}
    if complement:
        ccyc = complement_cycle(T, cycle)
        qres = integrate(_resolvent_integrand(T), ccyc, cfg)
        Q = qres.value
        I = np.ones(T.n) if T.is_diagonal else np.eye(T.n)
        extra["Q"] = Q
        extra["complement_defect"] = opnorm(res.value + Q - I)
        extra["complement_product"] = opnorm(res.value * Q if T.is_diagonal else res.value @ Q)
        extra["complement_error_estimate"] = qres.error_estimate
    return ProjectionResult.from_matrix(T, res.value, cycle, res.error_estimate, extra)


# ---------------------------------------------------------------------------
# verification


def principal_angle(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal angle between column spans (pi/2 if dimensions differ)."""
    if A.shape[1] != B.shape[1]:
        return float(np.pi / 2)
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(scipy.linalg.subspace_angles(A, B)))


def verify_projection(T: OperatorModel, result: ProjectionResult, cycle=None) -> dict:
    """Pass/fail report ``{check: {pass, measured, threshold}}``."""
    cycle = cycle if cycle is not None else result.cycle
    n = result.n
    report = {}

    def put(name, measured, threshold, passed=None):
        if passed is None:
            passed = measured <= threshold
        report[name] = {"pass": bool(passed), "measured": measured, "threshold": threshold}

    idem_thr = max(1e-8, 100 * result.error_estimate)
    put("idempotent", result.idempotency_defect, idem_thr)
    put("commutes", result.commutator_defect, 1e-8)
    put("nontrivial", result.rank, [1, n - 1], 0 < result.rank < n)
    if result.diagonal:
        # range and kernel are complementary coordinate subspaces
        B = N = None
        cond = 1.0 if n else float("inf")
    else:
        B = result.range_basis()
        N = result.kernel_basis()
    if B is None:
        pass
    elif B.shape[1] + N.shape[1] == n and n:
        cond = float(np.linalg.cond(np.hstack([B, N])))
    else:
        cond = float("inf")
    put("direct_sum", cond, 1e12)
    if cycle is not None:
        try:
            side = _side_function(cycle)
            eig = T.eigenvalues
            s = side(eig, 1e-9 * T.scale)
            if np.any(s == -1):
                raise BoundaryEigenvalue("eigenvalue on the cycle")
            inside = s == 1
            if T.is_diagonal:
                ang_r = 0.0 if np.array_equal(np.abs(result.P) > 0.5, inside) else float(np.pi / 2)
                ang_k = ang_r
            else:
                Oin = spectral_subspace_oracle(T, lambda e: side(e, 0.0) == 1)
                Oout = spectral_subspace_oracle(T, lambda e: side(e, 0.0) != 1)
                ang_r = principal_angle(B, Oin)
                ang_k = principal_angle(N, Oout)
            put("range_matches_oracle", ang_r, 1e-6)
            put("kernel_matches_oracle", ang_k, 1e-6)
        except BoundaryEigenvalue as exc:
            put("range_matches_oracle", float("inf"), 1e-6, False)
            report["range_matches_oracle"]["note"] = str(exc)
        put("spectral_inclusion", 0.0 if result.inclusion_ok else 1.0, 0.0)
    if "complement_defect" in result.extra:
        put("complement_sum", result.extra["complement_defect"],
            max(1e-8, 100 * (result.error_estimate + result.extra.get("complement_error_estimate", 0.0))))
    return report


def report_passed(report: dict) -> bool:
    return all(v["pass"] for v in report.values())


# ---------------------------------------------------------------------------
# cycle algebra


def _product(a: ProjectionResult, b: ProjectionResult) -> np.ndarray:
    if a.diagonal and b.diagonal:
        return a.P * b.P
    return a.matrix @ b.matrix


def cut_sum(T: OperatorModel, r1: ProjectionResult, r2: ProjectionResult,
            c1: Cycle, c2: Cycle) -> ProjectionResult:
    """P_{G1 u G2} = P_G1 + P_G2 for cycles with disjoint closed interiors."""
    union = cycle_union(c1, c2)
    prod = opnorm(_product(r1, r2))
    if prod > PRODUCT_TOL:
        raise ProductNotZero(f"||P1 P2|| = {prod:.3g} exceeds {PRODUCT_TOL:g}")
    P = r1.P + r2.P if r1.diagonal == r2.diagonal else r1.matrix + r2.matrix
    return ProjectionResult.from_matrix(T, P, union, r1.error_estimate + r2.error_estimate,
                                        {"product_norm": prod})


def _probe_overlap(cycles: Sequence[Cycle]) -> np.ndarray:
    x0 = min(c.bounding_box[0] for c in cycles)
    x1 = max(c.bounding_box[1] for c in cycles)
    y0 = min(c.bounding_box[2] for c in cycles)
    y1 = max(c.bounding_box[3] for c in cycles)
    p = probe_points((x0, x1, y0, y1), 64)
    far = np.all([c.distance(p) > 1e-9 * max(c.diameter, 1.0) for c in cycles], axis=0)
    return p[far]


def cut_overlapping_sum(T: OperatorModel, results: Sequence[ProjectionResult],
                        curves: Sequence) -> ProjectionResult:
    """P_beta = sum_k P_{gamma_k} for curves with disjoint interiors that may share boundary."""
    results = list(results)
    cycles = [c if isinstance(c, Cycle) else Cycle([c.with_orientation(1)]) for c in curves]
    if len(results) != len(cycles):
        raise ValueError("need one projection per curve")
    if len(results) == 1:
        return results[0]
    probes = _probe_overlap(cycles)
    inside = np.array([c.winding_many(probes) == 1 for c in cycles])
    if np.any(inside.sum(axis=0) > 1):
        raise InteriorsOverlap("curve interiors overlap")
    worst = 0.0
    for i in range(len(results)):
        for j in range(len(results)):
            if i != j:
                worst = max(worst, opnorm(_product(results[i], results[j])))
    if worst > PRODUCT_TOL:
        raise ProductNotZero(f"max ||P_i P_j|| = {worst:.3g} exceeds {PRODUCT_TOL:g}")
    diag = all(r.diagonal for r in results)
    P = sum((r.P if diag else r.matrix) for r in results)
    out = ProjectionResult.from_matrix(T, P, list(cycles), sum(r.error_estimate for r in results),
                                       {"max_pairwise_product": worst})
    side = _side_function(list(cycles))
    if not T.is_diagonal:
        try:
            O = spectral_subspace_oracle(T, lambda e: side(e, 0.0) != 1)
            out.extra["kernel_angle"] = principal_angle(out.kernel_basis(), O)
        except BoundaryEigenvalue:
            out.extra["kernel_angle"] = float("nan")
    return out


def cut_product(T: OperatorModel, r1: ProjectionResult, r2: ProjectionResult, c1: Cycle, c2: Cycle,
                c_intersection: Cycle, cfg: QuadratureConfig | None = None,
                direct: bool = True) -> ProjectionResult:
    """P_{G1 n G2} = P_G1 P_G2, checked against the intersection cycle."""
    probes = _probe_overlap([c1, c2, c_intersection])
    w1 = c1.winding_many(probes) == 1
    w2 = c2.winding_many(probes) == 1
    wi = c_intersection.winding_many(probes) == 1
    if not np.any(w1 & w2):
        raise EmptyIntersection("the interiors do not intersect")
    if np.any(wi != (w1 & w2)):
        raise GeometryError("the intersection cycle does not bound int(c1) n int(c2)")
    eig = T.eigenvalues
    s = classify_many(c_intersection, eig, 0.0)
    if not np.any(s == 1) or not np.any(s == 0):
        raise SpectrumMissesIntersection("the intersection interior or exterior misses the spectrum")
    P12 = _product(r1, r2)
    P21 = _product(r2, r1)
    extra = {"factor_commutator": opnorm(P12 - P21)}
    if direct:
        d = plain_spectral_cut(T, c_intersection, cfg, complement=False)
        extra["direct_delta"] = opnorm(P12 - d.P)
    return ProjectionResult.from_matrix(T, P12, c_intersection, r1.error_estimate + r2.error_estimate, extra)


# ---------------------------------------------------------------------------
# local split


@dataclass
class LocalSplit:
    x_plus: np.ndarray
    x_minus: np.ndarray
    report: dict

    def __iter__(self):
        return iter((self.x_plus, self.x_minus))


def local_split(T: OperatorModel, curve, x, cfg: QuadratureConfig | None = None,
                singular="auto") -> LocalSplit:
    """Split x = x+ + x- along a curve, x+ from the curve, x- from tau and the reversed curve."""
    cfg = cfg or QuadratureConfig()
    cycle = curve if isinstance(curve, Cycle) else Cycle([curve.with_orientation(1)])
    x = np.asarray(T._check_vec(x), dtype=complex)
    cfg, pts = _resolve_singular(T, cycle, singular, cfg)
    eig = T.eigenvalues
    # eigenvalues sitting on the curve are declared singular as well
    on = eig[cycle.distance(eig) <= 1e-9 * max(cycle.length, 1.0)]
    for lam in on:
        if all(abs(lam - p) > 1e-12 for p in pts):
            pts.append(complex(lam))
    cfg = cfg.with_singular(list(cfg.singular_points) + [(p, None) for p in on
                                                        if all(abs(p - q) > 1e-12 for q, _ in cfg.singular_points)])
    exps = []
    for p in pts:
        c = next(c for c in cycle.curves if float(c.distance(p)[0]) <= 1e-9 * max(cycle.length, 1.0))
        rep = integrability_probe(T, x, c, [p], cfg)
        exps.append((p, rep["growth_exponent"]))
        if not rep["finite"]:
            raise NonIntegrableResolvent(
                f"(zI - T)^-1 x is not integrable near {p} (growth exponent {rep['growth_exponent']:.3f})",
                point=p, exponent=rep["growth_exponent"])
    f = _resolvent_integrand(T, x)
    plus = integrate(f, cycle, cfg)
    minus = integrate(f, complement_cycle(T, cycle), cfg)
    if plus.diverged or minus.diverged:
        raise QuadratureDiverged("local split integral diverged")
    xp, xm = plus.value, minus.value
    nx = max(T.vector_norm(x), 1e-300)
    report = {"reconstruction_error": T.vector_norm(xp + xm - x),
              "error_estimate": plus.error_estimate + minus.error_estimate,
              "growth_exponents": exps}
    side = lambda e: classify_many(cycle, e, 1e-9 * T.scale)
    Oin = spectral_subspace_oracle(T, lambda e: side(e) == 1)
    Oout = spectral_subspace_oracle(T, lambda e: side(e) == 0)
    report["plus_residual"] = _residual(xp, Oin) / nx
    report["minus_residual"] = _residual(xm, Oout) / nx
    return LocalSplit(xp, xm, report)


def _residual(v: np.ndarray, B: np.ndarray) -> float:
    if B.shape[1] == 0:
        return float(np.linalg.norm(v))
    coef, *_ = np.linalg.lstsq(B, v, rcond=None)
    return float(np.linalg.norm(v - B @ coef))


def resolvent_norm_samples(T: OperatorModel, cycle: Cycle, n: int = 256):
    """(z, ||(zI - T)^{-1}||) at points spread along the cycle by arclength."""
    segs = cycle.traversal()
    lengths = np.array([s.length for s in segs])
    cum = np.concatenate([[0], np.cumsum(lengths)])
    s_vals = (np.arange(n) + 0.5) * cum[-1] / n
    zs = []
    for s in s_vals:
        k = min(int(np.searchsorted(cum, s, side="right")) - 1, len(segs) - 1)
        zs.append(complex(segs[k].point((s - cum[k]) / lengths[k])))
    zs = np.array(zs)
    if T.is_diagonal:
        norms = 1.0 / np.abs(zs[:, None] - T.eigenvalues[None, :]).min(axis=1)
    else:
        norms = np.array([T.resolvent_norm(z) for z in zs])
    return zs, norms


def contour_apply(T: OperatorModel, cycle, x, cfg: QuadratureConfig | None = None,
                  singular="auto") -> tuple[np.ndarray, float]:
    """(1/2 pi i) closed integral of (zI - T)^{-1} x dz after probing integrability."""
    cfg = cfg or QuadratureConfig()
    cycle = cycle if isinstance(cycle, Cycle) else Cycle([cycle.with_orientation(1)])
    x = np.asarray(T._check_vec(x), dtype=complex)
    cfg, pts = _resolve_singular(T, cycle, singular, cfg)
    for p in pts:
        c = next(c for c in cycle.curves if float(c.distance(p)[0]) <= 1e-9 * max(cycle.length, 1.0))
        rep = integrability_probe(T, x, c, [p], cfg)
        if not rep["finite"]:
            raise NonIntegrableResolvent(
                f"(zI - T)^-1 x is not integrable near {p} (growth exponent {rep['growth_exponent']:.3f})",
                point=p, exponent=rep["growth_exponent"])
    if T.is_diagonal:
        # the integral acts entrywise, so integrate the diagonal once and scale
        res = integrate(_resolvent_integrand(T), cycle, cfg)
        if res.diverged:
            raise QuadratureDiverged("contour integral diverged")
        return res.value * x, res.error_estimate * float(np.abs(x).max(initial=0.0))
    res = integrate(_resolvent_integrand(T, x), cycle, cfg)
    if res.diverged:
        raise QuadratureDiverged("contour integral diverged")
    return res.value, res.error_estimate
