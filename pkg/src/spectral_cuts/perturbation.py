"""Diagonal operators with a finite-rank series perturbation.

For T = D_lambda + sum_k u_k (x) v_k the resolvent along suitable axis-parallel
curves is expressed through the K x K matrices

    F[i, j](z) = sum_n alpha[n, i] conj(beta[n, j]) / (lambda_n - z),
    M(z)       = I + Y(z) X(z) = I + F(z)^T,
    A(z)       = M(z)^{-1},

which turns the spectral projection into a diagonal part plus a contour
integral of rank-K corrections.  Coordinates for the curves are drawn from a
truncated decomposability set: reals whose weighted inverse distances to the
real and imaginary parts of the eigenvalues stay below a cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .calculus import CalculusResult, FunctionExpr, _check_singularities_outside, cycle_closure_sample
from .contour import Cycle, classify_many, rectangle
from .cuts import ProjectionResult, opnorm
from .errors import (
    GeometryError,
    GridUnavailable,
    InsufficientCandidates,
    NotAppropriateCurve,
    OnEigenvalueLine,
    PoleHit,
    SingularM,
)
from .operators import DenseMatrix, DiagonalPlusSeries
from .quadrature import QuadratureConfig, integrate

LINE_TOL = 1e-12
POLE_REL = 1e-13
COND_MAX = 1e12
TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class Summability:
    score: float
    square_sum: float
    log_sum: float

    def __float__(self):
        return self.score


@dataclass(frozen=True, eq=False)
class PerturbedDiagonal(DiagonalPlusSeries):
    """T = D_lambda + alpha beta^H with the eigenvalues not all on one axis-parallel line."""

    kind = "diag_plus_series"

    def __post_init__(self):
        super().__post_init__()
        lam = self.lam
        if lam.size > 1 and (np.ptp(lam.real) <= LINE_TOL or np.ptp(lam.imag) <= LINE_TOL):
            raise GeometryError("the eigenvalues lie on a single horizontal or vertical line")
        if lam.size == 1:
            raise GeometryError("need at least two eigenvalues off a common axis-parallel line")

    @cached_property
    def summability(self) -> Summability:
        return summability_score(self)

    @cached_property
    def box(self):
        """[a, b] x [c, d]: the densified spectrum padded by 1."""
        eig = self.eigenvalues
        return (float(eig.real.min() - 1), float(eig.real.max() + 1),
                float(eig.imag.min() - 1), float(eig.imag.max() + 1))

    @property
    def default_cap(self) -> float:
        return 1e3 * self.summability.score + 1e3


def summability_score(Pd: DiagonalPlusSeries) -> Summability:
    """sum |alpha|^2 log(1 + 1/|alpha|) + sum |beta|^2 log(1 + 1/|beta|) over non-zero entries."""
    total = sq = lg = 0.0
    for c in (Pd.alpha, Pd.beta):
        a = np.abs(c[c != 0])
        total += float(np.sum(a ** 2 * np.log1p(1.0 / a)))
        sq += float(np.sum(a ** 2))
        lg += float(np.sum(a ** 2 * np.log(1.0 / a)))
    return Summability(total, sq, lg)


def _weights(Pd) -> np.ndarray:
    return (np.abs(Pd.alpha) ** 2 + np.abs(Pd.beta) ** 2).sum(axis=1)


def delta_score(Pd, x) -> np.ndarray:
    """Vectorised score without the precondition check (inf on an eigenvalue line)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = _weights(Pd)
    dr = np.abs(Pd.lam.real[None, :] - x[:, None])
    di = np.abs(Pd.lam.imag[None, :] - x[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (w[None, :] * (1.0 / dr + 1.0 / di)).sum(axis=1)
    on = (dr.min(axis=1) <= LINE_TOL) | (di.min(axis=1) <= LINE_TOL)
    return np.where(on, np.inf, s)


def delta_membership(Pd, x: float, cap: float | None = None) -> dict:
    """Score of x against the decomposability set and membership under ``cap``."""
    x = float(x)
    dr = np.abs(Pd.lam.real - x).min()
    di = np.abs(Pd.lam.imag - x).min()
    if dr <= LINE_TOL or di <= LINE_TOL:
        raise OnEigenvalueLine(f"x = {x} lies on the real or imaginary part of an eigenvalue")
    cap = Pd.default_cap if cap is None else cap
    score = float(delta_score(Pd, x)[0])
    return {"member": score <= cap, "score": score}


@dataclass(frozen=True)
class AppropriateGrid:
    xs: np.ndarray
    ys: np.ndarray
    box: tuple
    scores: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"xs": [float(v) for v in self.xs], "ys": [float(v) for v in self.ys],
                "box": [float(v) for v in self.box],
                "scores": {"xs": [float(v) for v in self.scores.get("xs", [])],
                           "ys": [float(v) for v in self.scores.get("ys", [])]}}


def _candidates(parts: np.ndarray, lo: float, hi: float, fill: int) -> np.ndarray:
    u = np.unique(parts)
    mids = 0.5 * (u[:-1] + u[1:])
    uni = np.linspace(lo, hi, fill + 2)[1:-1]
    c = np.unique(np.concatenate([mids, uni]))
    return c[(c > lo) & (c < hi)]


def _pick(Pd, parts, lo, hi, n, cap, axis):
    if n < 2:
        raise ValueError("need at least two grid coordinates per axis")
    ends = np.array([lo, hi])
    end_scores = delta_score(Pd, ends)
    if n == 2:
        return ends, end_scores
    cand = _candidates(parts, lo, hi, 4 * n)
    sc = delta_score(Pd, cand)
    ok = sc <= cap
    if ok.sum() < n - 2:
        raise InsufficientCandidates(f"only {int(ok.sum())} {axis}-candidates pass the cap {cap:g}; need {n - 2}")
    # best-scoring candidate in each of n - 2 equal bins, so the lines spread over the box
    edges = np.linspace(lo, hi, n - 1)
    bins = np.clip(np.searchsorted(edges, cand, side="right") - 1, 0, n - 3)
    best = []
    for k in range(n - 2):
        idx = np.nonzero(ok & (bins == k))[0]
        if idx.size:
            best.append(idx[np.argmin(sc[idx])])
    if len(best) < n - 2:
        rest = [i for i in np.nonzero(ok)[0][np.argsort(sc[ok], kind="stable")] if i not in best]
        best += rest[: n - 2 - len(best)]
    best = np.array(best, dtype=int)
    xs = np.concatenate([ends, cand[best]])
    scores = np.concatenate([end_scores, sc[best]])
    order = np.argsort(xs)
    return xs[order], scores[order]


def build_appropriate_grid(Pd: PerturbedDiagonal, nx: int, ny: int, cap: float | None = None) -> AppropriateGrid:
    """Grid coordinates with the smallest decomposability scores, box corners always included."""
    cap = Pd.default_cap if cap is None else cap
    a, b, c, d = Pd.box
    xs, sx = _pick(Pd, Pd.lam.real, a, b, nx, cap, "x")
    ys, sy = _pick(Pd, Pd.lam.imag, c, d, ny, cap, "y")
    return AppropriateGrid(xs, ys, (a, b, c, d), {"xs": sx, "ys": sy})


def grid_with_mesh(Pd: PerturbedDiagonal, lo: float, hi: float, h: float, cap: float | None = None) -> np.ndarray:
    """Coordinates from lo to hi with spacing below h, each nudged into the decomposability set."""
    cap = Pd.default_cap if cap is None else cap
    m = max(1, int(math.ceil((hi - lo) / (0.9 * h))))
    base = np.linspace(lo, hi, m + 1)
    step = (hi - lo) / m
    out = [lo]
    for x in base[1:-1]:
        shifts = x + step * np.array([0, 1, -1, 2, -2, 3, -3, 4, -4]) / 32.0
        sc = delta_score(Pd, shifts)
        k = int(np.argmin(np.where(sc <= cap, np.arange(shifts.size), np.inf)))
        if not sc[k] <= cap:
            best = float(np.min(sc))
            raise GridUnavailable(f"no coordinate near {x:.6g} passes the cap (best score {best:.3g}); "
                                  f"densest achievable mesh is coarser than {h:.3g}")
        out.append(float(shifts[k]))
    out.append(hi)
    out = np.array(out)
    if np.any(np.diff(out) <= 0) or np.diff(out).max() >= h:
        raise GridUnavailable(f"cannot build a mesh finer than {h:.3g} from admissible coordinates")
    return out


# ---------------------------------------------------------------------------
# kernel, X / Y and the coefficients a


def _check_pole(Pd, z):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = np.abs(z[:, None] - Pd.lam[None, :]).min(axis=1)
    if np.any(d <= POLE_REL * Pd.scale):
        raise PoleHit(f"z = {z[np.argmax(d <= POLE_REL * Pd.scale)]} coincides with a diagonal entry")


def f_kernel(Pd, i: int, j: int, z: complex) -> complex:
    """f^{(i,j)}(z) = sum_n alpha[n, i] conj(beta[n, j]) / (lambda_n - z)."""
    _check_pole(Pd, z)
    return complex(np.sum(Pd.alpha[:, i] * np.conj(Pd.beta[:, j]) / (Pd.lam - z)))


def f_kernel_matrix(Pd, z: complex) -> np.ndarray:
    _check_pole(Pd, z)
    r = 1.0 / (Pd.lam - z)
    return Pd.alpha.T @ (r[:, None] * Pd.beta.conj())


@dataclass(frozen=True)
class XY:
    X: np.ndarray      # N x K
    Y: np.ndarray      # K x N
    M: np.ndarray      # K x K, I + Y X
    kernel_defect: float


def xy_operators(Pd, z: complex) -> XY:
    """X = (D - z)^{-1/2} [u_1 .. u_K], Y = rows conj(v_k)^T (D - z)^{-1/2}, M = I + Y X.

    Both factors use the same square root s_n = sqrt(lambda_n - z), so that
    (Y X)[i, j] = f^{(j, i)}(z) on every branch.
    """
    _check_pole(Pd, z)
    s = np.sqrt(Pd.lam - z)
    X = Pd.alpha / s[:, None]
    Y = (Pd.beta.conj() / s[:, None]).T
    YX = Y @ X
    Fk = f_kernel_matrix(Pd, z)
    defect = float(np.abs(YX - Fk.T).max())
    return XY(X, Y, np.eye(Pd.rank_terms) + YX, defect)


@dataclass(frozen=True)
class Coefficients:
    A: np.ndarray
    cond: float
    master_residual: float
    norm: float


def a_coefficients(Pd, z: complex, n_checks: int = 5, seed: int = 0) -> Coefficients:
    """a_{i,j}(z) = <M(z)^{-1} e_j, e_i> with the master identity checked on random x."""
    xy = xy_operators(Pd, z)
    M = xy.M
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > COND_MAX:
        raise SingularM(f"I + Y X is numerically singular at z = {z} (condition {cond:.3g})")
    A = np.linalg.solve(M, np.eye(M.shape[0]))
    Fk = f_kernel_matrix(Pd, z)
    K = M.shape[0]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_checks):
        x = rng.normal(size=K) + 1j * rng.normal(size=K)
        w = A @ x                                   # w_k = sum_j x_j a_{k,j}
        lhs = (np.eye(K) + Fk).T @ w                # sum_k w_k (delta_{k,n} + f^{(k,n)})
        worst = max(worst, float(np.linalg.norm(lhs - x) / np.linalg.norm(x)))
    return Coefficients(A, cond, worst, float(np.linalg.norm(A, 2)))


# ---------------------------------------------------------------------------
# appropriate curves and the series formulas


def _as_cycle(curve) -> Cycle:
    if isinstance(curve, Cycle):
        return curve
    return Cycle([curve.with_orientation(1)])


def check_appropriate(Pd: PerturbedDiagonal, curve, grid: AppropriateGrid | None = None,
                      cap: float | None = None) -> dict:
    """Axis-parallel polyline whose coordinates are admissible; both sides meet the spectrum."""
    cycle = _as_cycle(curve)
    cap = Pd.default_cap if cap is None else cap
    for c in cycle.curves:
        if not c.is_axis_parallel():
            raise NotAppropriateCurve("the curve is not an axis-parallel polyline")
    verts = np.array([v for c in cycle.curves for v in c.vertices()])
    xs = np.unique(verts.real)
    ys = np.unique(verts.imag)
    scores = {}
    for label, coords, allowed in (("x", xs, None if grid is None else grid.xs),
                                   ("y", ys, None if grid is None else grid.ys)):
        for v in coords:
            if allowed is not None and np.abs(allowed - v).min() > 1e-12 * max(1.0, abs(v)):
                raise NotAppropriateCurve(f"{label} = {v} is not a grid coordinate")
            try:
                m = delta_membership(Pd, v, cap)
            except OnEigenvalueLine as exc:
                raise NotAppropriateCurve(str(exc)) from None
            if not m["member"]:
                raise NotAppropriateCurve(f"{label} = {v} has score {m['score']:.3g} above the cap {cap:.3g}")
            scores[f"{label}={v!r}"] = m["score"]
    eig = Pd.eigenvalues
    side = classify_many(cycle, eig, 0.0)
    if not np.any(side == 1) or not np.any(side == 0):
        raise NotAppropriateCurve("the interior and the exterior must both meet the spectrum")
    return scores


def _series_integrand(Pd, weight=None, state=None):
    """z -> (1/2 pi i) w(z) diag(r) alpha A(z) beta^H diag(r), r = 1/(lambda - z)."""
    lam, al, bH = Pd.lam, Pd.alpha, Pd.beta.conj().T
    K = Pd.rank_terms

    def f(z):
        r = 1.0 / (lam[None, :] - z[:, None])                      # m x N
        M = np.eye(K)[None] + np.einsum("kn,mn,nl->mkl", bH, r, al)
        cond = np.linalg.cond(M)
        if np.any(~np.isfinite(cond) | (cond > COND_MAX)):
            bad = z[np.argmax(~np.isfinite(cond) | (cond > COND_MAX))]
            raise SingularM(f"I + Y X is numerically singular at node {bad}")
        A = np.linalg.inv(M)
        if state is not None:
            state["max_cond"] = max(state.get("max_cond", 0.0), float(cond.max()))
            state["max_norm_A"] = max(state.get("max_norm_A", 0.0), float(np.linalg.norm(A, 2, axis=(1, 2)).max()))
        G = al[None] @ A                                           # m x N x K
        H = bH[None] * r[:, None, :]                               # m x K x N
        vals = r[:, :, None] * (G @ H)
        if weight is not None:
            vals = vals * weight(z)[:, None, None]
        return vals / TWO_PI_I

    return f


def series_projection(Pd: PerturbedDiagonal, curve, cfg: QuadratureConfig | None = None,
                      grid: AppropriateGrid | None = None, cap: float | None = None,
                      complement: bool = True) -> ProjectionResult:
    """P = diag(chi_{N_F}) + (1/2 pi i) closed integral of the rank-K correction.

    The complement I - P is computed independently over the boundary of the
    padded box joined with the reversed curve.
    """
    cfg = cfg or QuadratureConfig()
    cycle = _as_cycle(curve)
    scores = check_appropriate(Pd, cycle, grid, cap)
    chi = (classify_many(cycle, Pd.lam, 0.0) == 1).astype(complex)
    state = {}
    res = integrate(_series_integrand(Pd, state=state), cycle, cfg.with_singular(()))
    P = np.diag(chi) + res.value
    extra = {"N_F": np.nonzero(chi.real > 0)[0].tolist(), "coordinate_scores": scores,
             "max_cond_M": state.get("max_cond", 0.0), "max_norm_A": state.get("max_norm_A", 0.0),
             "panels": res.panels_used}
    if complement:
        a, b, c, d = Pd.box
        tau = Cycle([rectangle(a, b, c, d)] + [cu.reversed() for cu in cycle.curves])
        qres = integrate(_series_integrand(Pd), tau, cfg.with_singular(()))
        Q = np.diag(1 - chi) + qres.value
        extra["Q"] = Q
        extra["complement_defect"] = opnorm(P + Q - np.eye(Pd.n))
        extra["complement_error_estimate"] = qres.error_estimate
    return ProjectionResult.from_matrix(Pd, P, cycle, res.error_estimate, extra)


def series_calculus(Pd: PerturbedDiagonal, curve, f: FunctionExpr, cfg: QuadratureConfig | None = None,
                    grid: AppropriateGrid | None = None, cap: float | None = None) -> CalculusResult:
    """f_gamma(T) = diag(chi_{N_F} f(lambda)) + (1/2 pi i) closed integral of f times the correction."""
    cfg = cfg or QuadratureConfig()
    cycle = _as_cycle(curve)
    check_appropriate(Pd, cycle, grid, cap)
    _check_singularities_outside(f, cycle)
    f.check_contains(cycle_closure_sample(cycle), "closed interior of the curve")
    inside = classify_many(cycle, Pd.lam, 0.0) == 1
    first = np.zeros(Pd.n, dtype=complex)
    first[inside] = f(Pd.lam[inside])
    res = integrate(_series_integrand(Pd, weight=f), cycle, cfg.with_singular(()))
    F = np.diag(first) + res.value
    return CalculusResult(F, False, "series", {"error_estimate": res.error_estimate, "panels": res.panels_used})


def densify(Pd: DiagonalPlusSeries) -> DenseMatrix:
    """D_lambda + sum_k u_k v_k^H as an explicit matrix."""
    return DenseMatrix(np.diag(Pd.lam) + Pd.alpha @ Pd.beta.conj().T)
