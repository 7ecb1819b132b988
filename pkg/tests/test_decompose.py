import numpy as np
import pytest

from spectral_cuts.contour import Disc, Rect, Region, circle, classify_many
from spectral_cuts.cuts import opnorm
from spectral_cuts.errors import CoverInvalid, CoverTooTight, InteriorsOverlap, LineHitsEigenvalue, ParseError, ZeroWitness
from spectral_cuts.decompose import (
    CoverPair, cover_split, hyperinvariant_witness, line_family_decompose, super_decompose,
)
from spectral_cuts.fixtures import clustered_dense, perturbed_fixture, random_dense, random_diagonal
from spectral_cuts.operators import Diagonal, eigenprojection_oracle
from spectral_cuts.perturbation import densify

from oracles import eig_projection


def discs_cover():
    return CoverPair(Region([Disc(0, 1.2)]), Region([Disc(2, 1.2)]))


def check_split(T, cover, split):
    eig = T.eigenvalues
    side = classify_many(split.cycle, eig, 0.0)
    assert np.all(side >= 0)
    assert np.all(cover.U.contains(eig[side == 1], closed=True))
    assert np.all(cover.V.contains(eig[side == 0], closed=True))


def strip_cover(eig, rng, vertical=True):
    """Overlapping half-plane strips with a random band location."""
    re = eig.real if vertical else eig.imag
    im = eig.imag if vertical else eig.real
    lo, hi = re.min(), re.max()
    span = max(hi - lo, 1.0)
    c = lo + (hi - lo) * rng.uniform(0.2, 0.8)
    w = span * rng.uniform(0.25, 0.4)     # wider than the 10% erosion of either strip
    m = 2 * span
    a, b = im.min() - m, im.max() + m

    def rect(x0, x1):
        return Rect(x0, x1, a, b) if vertical else Rect(a, b, x0, x1)

    return CoverPair(Region([rect(lo - m, c + w)]), Region([rect(c - w, hi + m)]))


def disc_cover(eig, rng):
    c = eig[rng.integers(eig.size)] + 0.1 * complex(*rng.normal(size=2))
    r = rng.uniform(0.3, 1.0) * np.abs(eig - c).max()
    R = 3 * np.abs(eig - c).max() + 3
    return CoverPair(Region([Disc(c, r)]), Region([Rect(c.real - R, c.real + R, c.imag - R, c.imag + R)]))


# cover_split

def test_split_two_discs():
    T = Diagonal([0, 2])
    s = cover_split(T, discs_cover())
    assert classify_many(s.cycle, T.eigenvalues, 0.0).tolist() == [1, 0]
    assert s.mesh < s.delta / 4


def test_split_U_contains_spectrum():
    T = Diagonal([0, 1, 1j])
    cover = CoverPair(Region([Disc(0, 5)]), Region([Disc(10, 1)]))
    s = cover_split(T, cover)
    assert np.all(classify_many(s.cycle, T.eigenvalues, 0.0) == 1)


def test_split_overlapping_strips_large_spectrum():
    T = random_diagonal(10_000, 3)
    cover = CoverPair(Region([Rect(-3, 0.3, -3, 3)]), Region([Rect(-0.3, 3, -3, 3)]))
    s = cover_split(T, cover)
    check_split(T, cover, s)
    # apart from the bounding box, the cycle runs inside the overlap band
    pts = np.array([seg.point(t) for cu in s.cycle.curves for seg in cu.segments for t in (0.0, 0.5, 1.0)])
    inner = (np.abs(pts.real - s.xs[0]) > 1e-12) & (np.abs(pts.imag - s.ys[0]) > 1e-12) & (
        np.abs(pts.imag - s.ys[-1]) > 1e-12)
    assert inner.any() and np.all(np.abs(pts[inner].real) <= 0.3)


FIXTURES = {
    "diagonal": lambda: random_diagonal(30, 1),
    "dense": lambda: random_dense(10, 2),
    "clustered": lambda: clustered_dense([0, 2, 2j], 4, 5),
    "perturbed": lambda: perturbed_fixture(12, 2, 0),
}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_exhaustive_family(name):
    T = FIXTURES[name]()
    rng = np.random.default_rng(7)
    eig = T.eigenvalues
    for k in range(20):
        cover = disc_cover(eig, rng) if k % 3 == 2 else strip_cover(eig, rng, vertical=bool(k % 2))
        check_split(T, cover, cover_split(T, cover))


def test_split_errors():
    T = Diagonal([0, 2])
    with pytest.raises(CoverInvalid):
        cover_split(T, CoverPair(Region([Disc(0, 1)]), Region([Disc(5, 1)])))
    # 2 sits on the edge of the shrunk V only after erosion
    with pytest.raises(CoverTooTight):
        cover_split(T, CoverPair(Region([Disc(0, 1)]), Region([Disc(2.95, 1)])))
    with pytest.raises(ParseError):
        CoverPair.from_json({"U": []})


# super_decompose

def test_super_decompose_two_discs():
    w = super_decompose(Diagonal([0, 2]), discs_cover())
    assert np.allclose(w.R.matrix, np.diag([1, 0]), atol=1e-12)
    assert w.report["interior_spec_in_U"] and w.report["exterior_spec_in_V"]


def test_super_decompose_dense_half_planes():
    T = random_dense(10, 11)
    eig = T.eigenvalues
    gaps = np.sort(eig.real)
    k = int(np.argmax(np.diff(gaps)[2:-2])) + 2
    c = 0.5 * (gaps[k] + gaps[k + 1])
    w = 0.4 * (gaps[k + 1] - gaps[k])
    lo, hi = gaps[0] - 0.1, gaps[-1] + 0.1
    cover = CoverPair(Region([Rect(lo, c + w, -10, 10)]), Region([Rect(c - w, hi, -10, 10)]))
    wit = super_decompose(T, cover)
    ref = eig_projection(T.dense(), lambda z: z.real < c)
    assert opnorm(wit.R.P - ref) <= 1e-7
    assert wit.R.commutator_defect <= 1e-8
    assert wit.R.idempotency_defect <= 1e-7
    assert wit.report["interior_spec_in_U"] and wit.report["exterior_spec_in_V"]


def test_super_decompose_perturbed_series_vs_dense():
    Pd = perturbed_fixture(12, 2, 0)
    cover = CoverPair(Region([Rect(-1, 1.5, -1, 1.5)]), Region([Rect(0.5, 5, -1, 5), Rect(-1, 5, 0.5, 5)]))
    wit = super_decompose(Pd, cover, compare_dense=True)
    assert wit.report["route"] == "series"
    assert wit.report["series_vs_dense"] <= 1e-6
    ref = eigenprojection_oracle(densify(Pd), wit.cycle)
    assert opnorm(wit.R.P - ref) <= 1e-6


def test_super_decompose_degenerate_all():
    T = random_dense(6, 0)
    w = super_decompose(T, CoverPair(Region([Disc(0, 10)]), Region([Disc(20, 1)])))
    assert w.report["degenerate"] and np.allclose(w.R.matrix, np.eye(6))


# line families

def test_line_family_quadrants():
    T = Diagonal([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
    cover = CoverPair(Region([Rect(-3, -0.5, -3, 3)]), Region([Rect(0.5, 3, -3, 3)]))
    P1, P2, rep = line_family_decompose(T, [0.0], [0.0], cover)
    cells = rep["cell_projections"]
    assert len(cells) == 4
    for P in cells.values():
        assert np.abs(P).round(10).tolist().count(1.0) == 1
    assert opnorm(sum(cells.values()) - np.ones(4)) <= 1e-7
    assert rep["full_rank"]
    assert np.allclose(P1, [0, 1, 1, 0]) and np.allclose(P2, [1, 0, 0, 1])


def test_line_family_empty_cell_and_dense():
    T = clustered_dense([0, 2, 2j], 3, 1)
    _, _, rep = line_family_decompose(T, [1.0, 3.0], [1.0], None)
    assert rep["empty_cell_norm"] <= 1e-8
    assert rep["partition_defect"] <= 1e-7
    assert rep["occupied_cells"] == 3


def test_line_hits_eigenvalue():
    with pytest.raises(LineHitsEigenvalue):
        line_family_decompose(Diagonal([1, 2]), [1.0], [], None)


# hyperinvariant witness

def test_witness_two_points():
    T = Diagonal([0, 2])
    r = hyperinvariant_witness(T, circle(0, 0.5), circle(2, 0.5), np.ones(2), np.ones(2))
    assert np.allclose(r["x1"], [1, 0], atol=1e-12) and np.allclose(r["x2star"], [0, 1], atol=1e-12)
    assert r["pairing_defect"] <= 1e-12


def test_witness_zero_and_overlap():
    T = Diagonal([0, 2])
    with pytest.raises(ZeroWitness):
        hyperinvariant_witness(T, circle(0, 0.5), circle(2, 0.5), np.array([0, 1.0]), np.ones(2))
    with pytest.raises(InteriorsOverlap):
        hyperinvariant_witness(T, circle(0, 1.5), circle(2, 1.5), np.ones(2), np.ones(2))


def test_witness_clusters():
    T = clustered_dense([0, 3], 5, 2)
    rng = np.random.default_rng(0)
    x = rng.normal(size=10) + 1j * rng.normal(size=10)
    xs = rng.normal(size=10) + 1j * rng.normal(size=10)
    r = hyperinvariant_witness(T, circle(0, 1), circle(3, 1), x, xs)
    assert r["pairing_defect"] <= 1e-7
    assert abs(r["direct_pairing"]) <= 1e-7 * r["norm_x1"] * r["norm_x2star"]
