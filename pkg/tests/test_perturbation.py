import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_cuts.calculus import calculus_integral, calculus_restrict, parse_function, route_agreement
from spectral_cuts.contour import Cycle, rectangle
from spectral_cuts.cuts import cut_sum, opnorm, plain_spectral_cut
from spectral_cuts.errors import GeometryError, NotAppropriateCurve, OnEigenvalueLine
from spectral_cuts.fixtures import perturbed_fixture
from spectral_cuts.operators import eigenprojection_oracle
from spectral_cuts.perturbation import (
    PerturbedDiagonal, a_coefficients, build_appropriate_grid, delta_membership, densify, f_kernel,
    f_kernel_matrix, series_calculus, series_projection, summability_score, xy_operators,
)

from oracles import naive_delta, naive_kernel, naive_summability

LATTICE = np.array([0, 1, 1j, 1 + 1j, 2, 2 + 1j])


def zero_model():
    return PerturbedDiagonal(LATTICE, np.zeros((6, 1)), np.zeros((6, 1)))


def grid_curve(g, i0, i1, j0, j1):
    return Cycle([rectangle(g.xs[i0], g.xs[i1], g.ys[j0], g.ys[j1])])


def test_line_precondition():
    with pytest.raises(GeometryError):
        PerturbedDiagonal(np.array([0, 1, 2]), np.zeros((3, 1)), np.zeros((3, 1)))


# scores

def test_summability_examples():
    assert summability_score(zero_model()).score == 0
    a = np.zeros((6, 1))
    a[0, 0] = 1
    assert summability_score(PerturbedDiagonal(LATTICE, a, np.zeros((6, 1)))).score == pytest.approx(np.log(2))


@given(st.integers(0, 10 ** 6))
def test_summability_naive(seed):
    Pd = perturbed_fixture(9, 2, seed)
    assert summability_score(Pd).score == pytest.approx(naive_summability(Pd.alpha, Pd.beta), rel=1e-14)


def test_delta_membership_examples():
    m = delta_membership(zero_model(), 0.5)
    assert m["member"] and m["score"] == 0
    a = np.zeros((6, 1))
    a[0, 0] = 1
    Pd = PerturbedDiagonal(LATTICE, a, np.zeros((6, 1)))
    s = [delta_membership(Pd, 10.0 ** -k)["score"] for k in (2, 4, 6)]
    assert s[1] / s[0] == pytest.approx(100, rel=0.05) and s[2] / s[1] == pytest.approx(100, rel=0.05)
    with pytest.raises(OnEigenvalueLine):
        delta_membership(Pd, 1.0)


@given(st.integers(0, 10 ** 6), st.floats(-3, 5))
def test_delta_naive(seed, x):
    Pd = perturbed_fixture(9, 2, seed)
    if min(np.abs(Pd.lam.real - x).min(), np.abs(Pd.lam.imag - x).min()) < 1e-6:
        return
    got = delta_membership(Pd, x, cap=np.inf)["score"]
    assert got == pytest.approx(naive_delta(Pd.lam, Pd.alpha, Pd.beta, x), rel=1e-12)


# grids

def test_grid_zero_coefficients_uniform_accept():
    g = build_appropriate_grid(zero_model(), 6, 6)
    assert np.all(np.asarray(g.scores["xs"]) == 0)


def test_grid_corners_only():
    Pd = perturbed_fixture()
    g = build_appropriate_grid(Pd, 2, 2)
    assert np.allclose(g.xs, Pd.box[:2]) and np.allclose(g.ys, Pd.box[2:])


def test_grid_avoids_heavy_line():
    rng = np.random.default_rng(0)
    lam = np.array([complex(i, j) for i in range(4) for j in range(4)]) + 0.01 * rng.random(16)
    a = np.full((16, 1), 1e-4)
    a[5, 0] = 1.0
    Pd = PerturbedDiagonal(lam, a, a.copy())
    g = build_appropriate_grid(Pd, 8, 8)
    assert np.abs(g.xs - lam[5].real).min() > 0.2
    assert np.abs(g.ys - lam[5].imag).min() > 0.2


# kernel and coefficients

def test_kernel_examples():
    Pd = PerturbedDiagonal(np.array([0, 3 + 3j]), np.array([[1.0], [0.0]]), np.array([[1.0], [0.0]]))
    assert f_kernel(Pd, 0, 0, 1) == pytest.approx(-1)
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    b = np.array([[0.0, 0.0], [0.0, 1.0]])
    Pd2 = PerturbedDiagonal(np.array([0, 3 + 3j]), a, b)
    assert f_kernel(Pd2, 0, 1, 1) == 0


@given(st.integers(0, 10 ** 6))
def test_kernel_naive(seed):
    Pd = perturbed_fixture(8, 3, seed)
    z = complex(*np.random.default_rng(seed).normal(size=2)) * 3
    for i in range(3):
        for j in range(3):
            assert abs(f_kernel(Pd, i, j, z) - naive_kernel(Pd.lam, Pd.alpha, Pd.beta, i, j, z)) <= 1e-14 * (
                1 + abs(f_kernel(Pd, i, j, z)))


def test_xy_examples():
    Pd = PerturbedDiagonal(np.array([0, 3 + 3j]), np.array([[0.5], [0.0]]), np.array([[0.5], [0.0]]))
    xy = xy_operators(Pd, 1)
    assert xy.M[0, 0] == pytest.approx(1 + f_kernel(Pd, 0, 0, 1))
    assert np.allclose(xy_operators(zero_model(), 0.5 + 0.5j).M, np.eye(1))
    c = a_coefficients(Pd, 1)
    assert c.A[0, 0] == pytest.approx(1 / (1 + f_kernel(Pd, 0, 0, 1)))
    assert np.allclose(a_coefficients(zero_model(), 0.5 + 0.5j).A, np.eye(1))


def test_kernel_identity_random_points():
    Pd = perturbed_fixture(20, 3, 4)
    rng = np.random.default_rng(1)
    for _ in range(100):
        z = complex(rng.uniform(-1, 5), rng.uniform(-1, 5))
        xy = xy_operators(Pd, z)
        assert np.abs(xy.Y @ xy.X - f_kernel_matrix(Pd, z).T).max() <= 1e-12 * (1 + np.abs(xy.M).max())


def test_master_identity():
    Pd = perturbed_fixture(12, 2, 0)
    g = build_appropriate_grid(Pd, 8, 8)
    for x in g.xs[1:-1]:
        for y in g.ys[1:-1]:
            c = a_coefficients(Pd, complex(x, y))
            assert c.master_residual <= 1e-9


# series projection and calculus

def test_series_zero_coefficients_is_indicator():
    Pd = zero_model()
    cyc = Cycle([rectangle(-0.5, 0.5 + 1e-3, -0.5, 1.5 + 1e-3)])
    r = series_projection(Pd, cyc, complement=False)
    assert np.allclose(r.P, np.diag([1, 0, 1, 0, 0, 0]), atol=1e-14)
    F = series_calculus(Pd, cyc, parse_function("z^2"))
    assert np.allclose(np.diag(F.F), [0, 0, -1, 0, 0, 0], atol=1e-13)


def test_series_vs_dense_oracle():
    Pd = perturbed_fixture(12, 2, 0)
    g = build_appropriate_grid(Pd, 8, 8)
    cyc = grid_curve(g, 1, 4, 1, 4)
    r = series_projection(Pd, cyc)
    ref = eigenprojection_oracle(densify(Pd), cyc)
    assert opnorm(r.P - ref) <= 1e-6
    assert r.idempotency_defect <= 1e-7
    assert r.extra["complement_defect"] <= 1e-7
    one = series_calculus(Pd, cyc, parse_function("1"))
    assert opnorm(one.F - r.P) <= 1e-9


def test_series_calculus_vs_dense_routes():
    Pd = perturbed_fixture(12, 2, 0)
    g = build_appropriate_grid(Pd, 8, 8)
    cyc = grid_curve(g, 1, 4, 1, 4)
    f = parse_function("exp(z)")
    S = series_calculus(Pd, cyc, f)
    D = densify(Pd)
    P = plain_spectral_cut(D, cyc, singular=[], complement=False)
    assert route_agreement(S, calculus_restrict(D, P, f)) <= 1e-5
    assert route_agreement(S, calculus_integral(D, cyc, f, singular=[])) <= 1e-5


def test_series_convergence_with_tolerance():
    from spectral_cuts.quadrature import QuadratureConfig
    Pd = perturbed_fixture(12, 2, 0)
    g = build_appropriate_grid(Pd, 8, 8)
    cyc = grid_curve(g, 1, 4, 1, 4)
    ref = eigenprojection_oracle(densify(Pd), cyc)
    errs = [opnorm(series_projection(Pd, cyc, QuadratureConfig(panel_order=4, tol=t), complement=False).P - ref)
            for t in (1e-4, 1e-6, 1e-8, 1e-10)]
    for a, b in zip(errs, errs[1:]):
        assert b <= 2 * a + 1e-14


def test_series_cut_sum():
    Pd = perturbed_fixture(12, 2, 0)
    g = build_appropriate_grid(Pd, 8, 8)
    c1 = grid_curve(g, 1, 3, 1, 3)
    c2 = grid_curve(g, 4, 6, 4, 6)
    r1, r2 = series_projection(Pd, c1, complement=False), series_projection(Pd, c2, complement=False)
    s = cut_sum(densify(Pd), r1, r2, c1, c2)
    from spectral_cuts.contour import cycle_union
    ref = eigenprojection_oracle(densify(Pd), cycle_union(c1, c2))
    assert opnorm(s.P - ref) <= 1e-6


def test_not_appropriate_curves():
    Pd = perturbed_fixture(12, 2, 0)
    g = build_appropriate_grid(Pd, 8, 8)
    x = Pd.lam[0].real
    with pytest.raises(NotAppropriateCurve):
        series_projection(Pd, Cycle([rectangle(x, g.xs[4], g.ys[1], g.ys[4])]))
    from spectral_cuts.contour import circle
    with pytest.raises(NotAppropriateCurve):
        series_projection(Pd, Cycle([circle(1 + 1j, 0.7)]))


def test_densify_examples():
    Pd = zero_model()
    assert np.allclose(densify(Pd).dense(), np.diag(LATTICE))
    u = np.zeros((6, 1), complex)
    v = np.zeros((6, 1), complex)
    u[1], v[2] = 2, 1j
    Pd1 = PerturbedDiagonal(LATTICE, u, v)
    x = np.arange(6) + 1j
    lhs = (densify(Pd1).dense() - np.diag(LATTICE)) @ x
    assert np.allclose(lhs, np.vdot(v[:, 0], x) * u[:, 0])
    Pd = perturbed_fixture(12, 2, 5)
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.normal(size=12) + 1j * rng.normal(size=12)
        assert np.linalg.norm(densify(Pd).dense() @ x - Pd.apply(x)) <= 1e-12 * (1 + np.linalg.norm(x))
