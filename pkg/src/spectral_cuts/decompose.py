"""Splittings subordinate to open covers of the spectrum.

``cover_split`` builds a grid cycle separating the parts of the spectrum
assigned to the two members of a cover, ``super_decompose`` turns it into a
commuting projection R, ``line_family_decompose`` assembles rectangle
projections from half-plane cuts, and ``hyperinvariant_witness`` produces the
pair of vectors whose pairing certifies a non-trivial invariant subspace.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .contour import (
    Curve,
    Cycle,
    Region,
    Segment,
    cycle_union,
    grid_cover_cycle,
    rectangle,
)
from .cuts import (
    ProjectionResult,
    contour_apply,
    opnorm,
    riesz_projection,
)
from .errors import (
    AllMarked,
    CellProductNotCommuting,
    CoverInvalid,
    CoverTooTight,
    GridUnavailable,
    LineHitsEigenvalue,
    NoneMarked,
    NotAppropriateCurve,
    ParseError,
    ZeroWitness,
)
from .operators import OperatorModel, spectral_subspace_oracle
from .quadrature import QuadratureConfig

MAX_CELLS_PER_AXIS = 1024
LINE_GAP_REL = 1e-9


def _threads() -> int:
    env = os.environ.get("SPECTRAL_CUTS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def parallel_map(fn, items):
    """Map in a thread pool; results come back in input order."""
    items = list(items)
    n = min(_threads(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# covers


@dataclass(frozen=True)
class CoverPair:
    """Two open sets, each the interior of a finite union of rectangles and discs."""

    U: Region
    V: Region

    def in_U(self, p) -> np.ndarray:
        return self.U.contains(p, closed=False)

    def in_V(self, p) -> np.ndarray:
        return self.V.contains(p, closed=False)

    def check(self, eig: np.ndarray) -> None:
        covered = self.in_U(eig) | self.in_V(eig)
        if not np.all(covered):
            raise CoverInvalid(f"eigenvalue {eig[np.argmin(covered)]} is in neither U nor V")

    @classmethod
    def from_json(cls, obj) -> "CoverPair":
        if not isinstance(obj, dict) or "U" not in obj or "V" not in obj:
            raise ParseError("cover JSON needs fields 'U' and 'V'")
        return cls(Region.from_json(obj["U"]), Region.from_json(obj["V"]))

    def to_json(self) -> dict:
        return {"U": self.U.to_json(), "V": self.V.to_json()}


@dataclass
class CoverSplit:
    cycle: Cycle
    xs: np.ndarray
    ys: np.ndarray
    delta: float
    mesh: float
    degenerate: str = ""
    interior_in_U: bool = True
    exterior_in_V: bool = True


def _dyadic_below(x: float) -> float:
    return 2.0 ** math.floor(math.log2(x) - 1e-12)


def _best_offset(vals: np.ndarray, h: float) -> float:
    """Dyadic shift of the lattice h*Z that keeps it farthest from ``vals``."""
    best, best_d = 0.0, -1.0
    for k in range(16):
        off = h * k / 16
        r = np.mod(vals - off, h)
        d = float(np.minimum(r, h - r).min()) if vals.size else h
        if d > best_d + 1e-15 * h:
            best, best_d = off, d
    return best


def cover_split(T: OperatorModel, cover: CoverPair, erosion: float = 0.1,
                delta_override: float | None = None, cap: float | None = None) -> CoverSplit:
    """Grid cycle whose closed interior meets the spectrum only inside U and whose exterior only inside V."""
    from .perturbation import PerturbedDiagonal, grid_with_mesh

    eig = T.eigenvalues
    cover.check(eig)
    G1, e1 = cover.U.eroded(erosion)
    G2, e2 = cover.V.eroded(erosion)
    if not np.all(G1.contains(eig) | G2.contains(eig)):
        bad = eig[np.argmin(G1.contains(eig) | G2.contains(eig))]
        raise CoverTooTight(f"eigenvalue {bad} is lost when the cover is shrunk by {erosion:.0%}")
    delta = delta_override if delta_override is not None else min(e1, e2)
    if not delta > 0:
        raise CoverTooTight("the cover leaves no room between the shrunk and the original sets")
    h = _dyadic_below(delta / 4)
    if 0.99 * delta / 4 < h:
        h /= 2
    x_lo, x_hi = eig.real.min(), eig.real.max()
    y_lo, y_hi = eig.imag.min(), eig.imag.max()
    if max(x_hi - x_lo, y_hi - y_lo) / h + 4 > MAX_CELLS_PER_AXIS:
        raise CoverTooTight(f"mesh {h:.3g} needs more than {MAX_CELLS_PER_AXIS} cells per axis")
    if isinstance(T, PerturbedDiagonal):
        a, b, c, d = T.box
        xs = grid_with_mesh(T, a, b, h, cap)
        ys = grid_with_mesh(T, c, d, h, cap)
    else:
        ox = _best_offset(eig.real, h)
        oy = _best_offset(eig.imag, h)
        x0 = ox + h * (math.floor((x_lo - ox) / h) - 1)
        y0 = oy + h * (math.floor((y_lo - oy) / h) - 1)
        nx = int(math.floor((x_hi - x0) / h)) + 2
        ny = int(math.floor((y_hi - y0) / h)) + 2
        xs = x0 + h * np.arange(nx + 1)
        ys = y0 + h * np.arange(ny + 1)
        gap = min(np.abs(eig.real[:, None] - xs[None, :]).min(), np.abs(eig.imag[:, None] - ys[None, :]).min())
        if gap <= LINE_GAP_REL * T.scale:
            raise GridUnavailable("every dyadic offset puts a grid line through an eigenvalue")
    box = (xs[0], xs[-1], ys[0], ys[-1])
    degenerate = ""
    try:
        cycle = grid_cover_cycle(box, xs, ys, G1.meets_cells)
    except AllMarked:
        cycle = Cycle([rectangle(*box)])
        degenerate = "all cells meet the shrunk U: the cycle is the box and the exterior condition is vacuous"
    except NoneMarked:
        cycle = Cycle([rectangle(xs[0], xs[1], ys[0], ys[1])])
        degenerate = "no cell meets the shrunk U: the cycle is an empty corner cell"
    from .contour import classify_many

    side = classify_many(cycle, eig, 0.0)
    if np.any(side == -1):
        raise GridUnavailable("an eigenvalue lies on the grid cycle")
    tol = 1e-12 * T.scale
    interior_ok = bool(np.all(cover.U.contains(eig[side == 1], closed=True, tol=tol)))
    exterior_ok = bool(np.all(cover.V.contains(eig[side == 0], closed=True, tol=tol)))
    if not (interior_ok and exterior_ok):
        raise CoverInvalid("internal error: the split cycle violates the cover inclusions")
    return CoverSplit(cycle, xs, ys, float(delta), float(h), degenerate, interior_ok, exterior_ok)


# ---------------------------------------------------------------------------
# witnesses


@dataclass
class DecompositionWitness:
    cycle: Cycle
    R: ProjectionResult
    report: dict = field(default_factory=dict)


def super_decompose(T: OperatorModel, cover: CoverPair, cfg: QuadratureConfig | None = None,
                    route: str = "auto", compare_dense: bool = False) -> DecompositionWitness:
    """Projection R commuting with T with sigma(T|ran R) in closure(U), sigma(T|ker R) in closure(V)."""
    from .perturbation import PerturbedDiagonal, densify, series_projection

    cfg = cfg or QuadratureConfig()
    split = cover_split(T, cover)
    cycle = split.cycle
    used = "contour"
    R = None
    if isinstance(T, PerturbedDiagonal) and route in ("auto", "series"):
        try:
            R = series_projection(T, cycle, cfg, complement=False)
            used = "series"
        except NotAppropriateCurve as exc:
            if route == "series":
                raise
            used = f"contour (series route unavailable: {exc})"
    if R is None:
        if split.degenerate.startswith("all"):
            R = ProjectionResult.from_matrix(T, np.ones(T.n) if T.is_diagonal else np.eye(T.n), cycle)
        elif split.degenerate.startswith("no"):
            R = ProjectionResult.from_matrix(T, np.zeros(T.n) if T.is_diagonal else np.zeros((T.n, T.n)), cycle)
        else:
            R = riesz_projection(T, cycle, cfg)
    tol = 1e-7 * T.scale
    inner = R.interior_spectrum
    outer = R.exterior_spectrum
    report = {
        "route": used,
        "delta": split.delta,
        "mesh": split.mesh,
        "degenerate": split.degenerate,
        "idempotency_defect": R.idempotency_defect,
        "commutator_defect": R.commutator_defect,
        "interior_spec_in_U": bool(np.all(cover.U.contains(inner, closed=True, tol=tol))) if inner.size else True,
        "exterior_spec_in_V": bool(np.all(cover.V.contains(outer, closed=True, tol=tol))) if outer.size else True,
        "cycle_interior_in_U": split.interior_in_U,
        "cycle_exterior_in_V": split.exterior_in_V,
    }
    if compare_dense and isinstance(T, PerturbedDiagonal) and used == "series":
        D = riesz_projection(densify(T), cycle, cfg)
        report["series_vs_dense"] = opnorm(R.P - D.P)
    return DecompositionWitness(cycle, R, report)


# ---------------------------------------------------------------------------
# line families


def vertical_cut_curve(x: float, rho: float) -> Curve:
    """Line Re z = x closed by the arc of |z| = rho on the right."""
    h = math.sqrt(rho * rho - x * x)
    th = math.atan2(h, x)
    return Curve([Segment.line(complex(x, -h), complex(x, h)), Segment.arc(0j, rho, th, -th)])


def horizontal_cut_curve(y: float, rho: float) -> Curve:
    """Line Im z = y closed by the arc of |z| = rho above it."""
    w = math.sqrt(rho * rho - y * y)
    th = math.atan2(y, w)
    return Curve([Segment.line(complex(-w, y), complex(w, y)), Segment.arc(0j, rho, th, math.pi - th)])


def _half_plane_projections(T, coords, rho, make, cfg):
    def one(c):
        return riesz_projection(T, Cycle([make(c, rho)]), cfg).P

    return parallel_map(one, coords)


def line_family_decompose(T: OperatorModel, vertical_lines, horizontal_lines, cover: CoverPair | None = None,
                          cfg: QuadratureConfig | None = None):
    """Rectangle projections from half-plane cuts; returns (P1, P2, report)."""
    cfg = cfg or QuadratureConfig()
    eig = T.eigenvalues
    rho = T.norm + 1.0
    xs = sorted(float(v) for v in vertical_lines)
    ys = sorted(float(v) for v in horizontal_lines)
    tol = LINE_GAP_REL * T.scale
    for x in xs:
        if abs(x) >= rho:
            raise ValueError(f"vertical line {x} does not cross the disc of radius {rho:.6g}")
        if np.abs(eig.real - x).min() <= tol:
            raise LineHitsEigenvalue(f"the line Re z = {x} meets an eigenvalue")
    for y in ys:
        if abs(y) >= rho:
            raise ValueError(f"horizontal line {y} does not cross the disc of radius {rho:.6g}")
        if np.abs(eig.imag - y).min() <= tol:
            raise LineHitsEigenvalue(f"the line Im z = {y} meets an eigenvalue")
    diag = T.is_diagonal
    I = np.ones(T.n, dtype=complex) if diag else np.eye(T.n, dtype=complex)
    Z = np.zeros_like(I)
    right = [I] + _half_plane_projections(T, xs, rho, vertical_cut_curve, cfg) + [Z]
    upper = [I] + _half_plane_projections(T, ys, rho, horizontal_cut_curve, cfg) + [Z]
    bx = [-rho] + xs + [rho]
    by = [-rho] + ys + [rho]
    mul = (lambda a, b: a * b) if diag else (lambda a, b: a @ b)
    cols = [mul(right[i], I - right[i + 1]) for i in range(len(bx) - 1)]
    rows = [mul(upper[j], I - upper[j + 1]) for j in range(len(by) - 1)]
    cells = {}
    worst_comm = 0.0
    for i, C in enumerate(cols):
        for j, Rw in enumerate(rows):
            P = mul(C, Rw)
            comm = opnorm(P - mul(Rw, C))
            worst_comm = max(worst_comm, comm)
            if comm > 1e-8:
                raise CellProductNotCommuting(f"cell ({i}, {j}) factors do not commute: {comm:.3g}")
            cells[(i, j)] = P
    total = sum(cells.values())
    occupied = {}
    empty_norm = 0.0
    for (i, j), P in cells.items():
        inside = (eig.real > bx[i]) & (eig.real < bx[i + 1]) & (eig.imag > by[j]) & (eig.imag < by[j + 1])
        if inside.any():
            occupied[(i, j)] = P
        else:
            empty_norm = max(empty_norm, opnorm(P))
    occ_total = sum(occupied.values()) if occupied else Z
    report = {
        "rho": rho,
        "cells": len(cells),
        "occupied_cells": len(occupied),
        "partition_defect": opnorm(occ_total - I),
        "all_cells_defect": opnorm(total - I),
        "empty_cell_norm": empty_norm,
        "max_factor_commutator": worst_comm,
    }
    P1 = P2 = None
    if cover is not None:
        G1, _ = cover.U.eroded(0.1)
        G2, _ = cover.V.eroded(0.1)
        P1, P2 = Z.copy(), Z.copy()
        n1 = n2 = 0
        for (i, j), P in occupied.items():
            a = np.array([bx[i]])
            b = np.array([bx[i + 1]])
            c = np.array([by[j]])
            d = np.array([by[j + 1]])
            if G1.meets_cells(a, b, c, d)[0]:
                P1 = P1 + P
                n1 += 1
            if G2.meets_cells(a, b, c, d)[0]:
                P2 = P2 + P
                n2 += 1
        M1 = np.diag(P1) if diag else P1
        M2 = np.diag(P2) if diag else P2
        s = np.linalg.svd(np.hstack([M1, M2]), compute_uv=False)
        report["span_rank"] = int((s > 1e-8 * max(1.0, s.max())).sum())
        report["full_rank"] = report["span_rank"] == T.n
        report["cells_P1"] = n1
        report["cells_P2"] = n2
    report["cell_projections"] = occupied
    return P1, P2, report


# ---------------------------------------------------------------------------
# hyperinvariant subspaces


def hyperinvariant_witness(T: OperatorModel, gamma1, gamma2, x, xstar, cfg: QuadratureConfig | None = None) -> dict:
    """x1 from gamma1 for T, x2* from gamma2 for the transpose; their pairing on the oracle subspace."""
    c1 = gamma1 if isinstance(gamma1, Cycle) else Cycle([gamma1.with_orientation(1)])
    c2 = gamma2 if isinstance(gamma2, Cycle) else Cycle([gamma2.with_orientation(1)])
    cycle_union(c1, c2)      # raises InteriorsOverlap unless the closed interiors are disjoint
    x = np.asarray(x, dtype=complex)
    xstar = np.asarray(xstar, dtype=complex)
    x1, e1 = contour_apply(T, c1, x, cfg)
    Tt = T.transpose()
    x2, e2 = contour_apply(Tt, c2, xstar, cfg)
    n1, n2 = float(np.linalg.norm(x1)), float(np.linalg.norm(x2))
    if n1 <= 1e-10 * max(np.linalg.norm(x), 1e-300):
        raise ZeroWitness("the integral along gamma1 vanishes: x has no spectral mass inside gamma1")
    if n2 <= 1e-10 * max(np.linalg.norm(xstar), 1e-300):
        raise ZeroWitness("the integral along gamma2 vanishes: x* has no spectral mass inside gamma2")
    from .contour import classify_many

    B = spectral_subspace_oracle(T, lambda e: classify_many(c1, e, 0.0) == 1)
    defect = float(np.linalg.norm(B.T @ x2) / n2) if B.shape[1] else 0.0
    return {"x1": x1, "x2star": x2, "norm_x1": n1, "norm_x2star": n2,
            "pairing_defect": defect, "direct_pairing": complex(x1 @ x2),
            "error_estimate": e1 + e2}
