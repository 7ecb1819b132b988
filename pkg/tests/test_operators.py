import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_cuts.contour import Disc, Region
from spectral_cuts.errors import DimensionMismatch, ParseError, SingularResolvent
from spectral_cuts.fixtures import random_dense, tangent_discs
from spectral_cuts.operators import (
    DenseMatrix, Diagonal, DiagonalPlusSeries, PointMassMultiplication, adjoint, apply, eigenprojection_oracle,
    operator_from_json, operator_to_json, resolvent_apply, spectral_subspace_oracle, spectrum,
)


def rank_one():
    u = np.array([[1.0], [0.0]])
    return DiagonalPlusSeries(np.array([1.0, 2.0]), u, u)


def test_apply_examples():
    assert np.allclose(apply(Diagonal([0, 2]), [1, 1]), [0, 2])
    assert np.allclose(apply(PointMassMultiplication([1j, -1j], [1, 1]), [1, 1]), [1j, -1j])
    assert np.allclose(apply(rank_one(), [1, 0]), [2, 0])


def test_resolvent_examples():
    assert np.allclose(resolvent_apply(Diagonal([0, 2]), 1, [1, 1]), [1, -1])
    assert np.allclose(resolvent_apply(DenseMatrix([[1, 1], [0, 3]]), 0, [1, 0]), [-1, 0])


def test_resolvent_on_spectrum_raises():
    with pytest.raises(SingularResolvent):
        resolvent_apply(Diagonal([0, 2]), 2, [1, 1])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply(Diagonal([0, 2]), [1, 2, 3])


def test_spectrum_examples():
    assert np.allclose(np.sort_complex(spectrum(Diagonal([0, 2]))), [0, 2])
    assert np.allclose(np.sort_complex(spectrum(DenseMatrix([[1, 1], [0, 3]]))), [1, 3])


def test_low_rank_spectrum_vs_characteristic_polynomial():
    rng = np.random.default_rng(3)
    lam = rng.normal(size=5) + 1j * rng.normal(size=5)
    a = 0.3 * (rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2)))
    b = 0.3 * (rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2)))
    T = DiagonalPlusSeries(lam, a, b)
    A = np.diag(lam) + a @ b.conj().T
    roots = np.roots(np.poly(A))
    got = np.sort_complex(spectrum(T))
    assert np.abs(np.sort_complex(roots) - got).max() < 1e-8


def test_low_rank_resolvent_matches_dense():
    rng = np.random.default_rng(7)
    n, k = 30, 3
    lam = rng.normal(size=n) + 1j * rng.normal(size=n)
    a = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    b = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    T = DiagonalPlusSeries(lam, 0.2 * a, 0.2 * b)
    A = T.dense()
    for _ in range(100):
        z = 3 * (rng.normal() + 1j * rng.normal())
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        ref = np.linalg.solve(z * np.eye(n) - A, x)
        assert np.linalg.norm(T.resolvent(z, x) - ref) <= 1e-10 * np.linalg.norm(ref)


@given(st.integers(0, 10 ** 6))
def test_resolvent_identity(seed):
    T = random_dense(6, seed)
    rng = np.random.default_rng(seed)
    z, w = 3 * np.exp(2j * np.pi * rng.random(2))
    x = rng.normal(size=6) + 1j * rng.normal(size=6)
    lhs = T.resolvent(z, x) - T.resolvent(w, x)
    rhs = (w - z) * T.resolvent(z, T.resolvent(w, x))
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(np.linalg.norm(lhs), 1e-12) + 1e-13


def test_subspace_oracle_examples():
    B = spectral_subspace_oracle(Diagonal([0, 2]), Region([Disc(0, 1)]))
    assert B.shape == (2, 1) and abs(abs(B[0, 0]) - 1) < 1e-14
    B = spectral_subspace_oracle(DenseMatrix([[1, 1], [0, 3]]), Region([Disc(3, 0.5)]))
    v = np.array([1, 2]) / np.sqrt(5)
    assert abs(abs(np.vdot(v, B[:, 0])) - 1) < 1e-12


def test_subspace_oracle_point_mass():
    T = tangent_discs(200, seed=1)
    B = spectral_subspace_oracle(T, Region([Disc(1, 1)]), boundary="include")
    idx = np.nonzero(np.abs(T.nodes - 1) <= 1)[0]
    assert B.shape[1] == idx.size
    assert np.allclose(np.abs(B[idx]).sum(axis=0), 1)


@given(st.integers(0, 10 ** 6))
def test_subspace_oracle_is_invariant(seed):
    T = random_dense(7, seed)
    B = spectral_subspace_oracle(T, lambda e: e.real > np.median(T.eigenvalues.real))
    TB = T.dense() @ B
    resid = TB - B @ np.linalg.lstsq(B, TB, rcond=None)[0]
    assert np.linalg.norm(resid, 2) <= 1e-9 * T.norm


def test_eigenprojection_oracle_is_projection():
    T = random_dense(8, 2)
    P = eigenprojection_oracle(T, lambda e: e.real > 0)
    assert np.linalg.norm(P @ P - P, 2) < 1e-10
    assert np.linalg.norm(P @ T.dense() - T.dense() @ P, 2) < 1e-10


def test_adjoint_examples():
    assert np.allclose(adjoint(Diagonal([1j])).eigenvalues, [-1j])
    u = np.array([[1.0], [2.0j]])
    v = np.array([[0.5], [1.0]])
    T = DiagonalPlusSeries(np.zeros(2), u, v)
    S = adjoint(T)
    assert np.allclose(S.dense(), v @ u.conj().T)
    A = random_dense(4, 0)
    assert np.array_equal(adjoint(adjoint(A)).dense(), A.dense())


def test_invalid_models():
    with pytest.raises(Exception):
        Diagonal([np.nan])
    with pytest.raises(Exception):
        PointMassMultiplication([0, 1], [1, 0])


def test_json_roundtrip_all_kinds():
    models = [random_dense(3, 1), Diagonal([1, 2j]), PointMassMultiplication([1, -1], [0.5, 2]),
              rank_one()]
    for T in models:
        back = operator_from_json(operator_to_json(T))
        assert np.allclose(back.dense(), T.dense())


def test_json_errors_name_field():
    with pytest.raises(ParseError, match="data"):
        operator_from_json({"kind": "dense"})
    with pytest.raises(ParseError, match="kind"):
        operator_from_json({"kind": "sparse"})


def test_point_mass_norm_weighted():
    T = PointMassMultiplication([1, 2], [4, 1])
    assert T.vector_norm([1, 1]) == pytest.approx(np.sqrt(5))
