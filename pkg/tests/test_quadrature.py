import numpy as np
import pytest
from hypothesis import example, given, strategies as st

from spectral_cuts.contour import Cycle, Segment, Curve, circle, cycle_union, rectangle
from spectral_cuts.fixtures import tangent_disc_curve, tangent_discs
from spectral_cuts.operators import Diagonal
from spectral_cuts.quadrature import QuadratureConfig, fit_exponent, integrability_probe, integrate

UNIT = Cycle([circle()])


def test_residue():
    r = integrate(lambda z: 1 / z, UNIT)
    assert abs(r.value - 2j * np.pi) < 1e-12
    assert r.error_estimate <= 1e-12


def test_constant_integrates_to_zero():
    for c in (UNIT, Cycle([rectangle(-1, 2, 0, 3)])):
        assert abs(integrate(lambda z: np.ones_like(z), c).value) < 1e-14


def test_cauchy_exterior_pole():
    assert abs(integrate(lambda z: 1 / (z - 3), UNIT).value) < 1e-12


def test_vector_valued():
    r = integrate(lambda z: np.stack([1 / z, z ** 2], axis=1), UNIT)
    assert np.allclose(r.value, [2j * np.pi, 0], atol=1e-12)


@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.integers(0, 4))
@example(0.78125, 0.0, 4)
def test_orientation_reversal(a, b, k):
    f = lambda z: np.exp(z) / (z - complex(a, b)) ** (k + 1)
    c = Cycle([rectangle(-1, 1, -1, 1)])
    v1 = integrate(f, c).value
    v2 = integrate(f, c.reversed()).value
    assert abs(v1 + v2) <= 1e-14 * max(1, abs(v1)) + 1e-13


@given(st.floats(-0.5, 0.5), st.floats(2.5, 3.5))
def test_union_additivity(p, q):
    c1 = Cycle([circle(0, 1)])
    c2 = Cycle([circle(3, 1)])
    f = lambda z: 1 / ((z - p) * (z - q))
    u = cycle_union(c1, c2)
    assert abs(integrate(f, u).value - integrate(f, c1).value - integrate(f, c2).value) < 1e-12


@pytest.mark.parametrize("g", [lambda z: np.exp(z) / (z - 0.3), lambda z: np.cos(z) / (z + 0.5j) ** 2,
                               lambda z: 1 / (z * z + 0.25)])
def test_richardson_consistency(g):
    c = Cycle([rectangle(-1, 1, -1, 1)])
    a = integrate(g, c, QuadratureConfig(panel_order=8))
    b = integrate(g, c, QuadratureConfig(panel_order=16))
    assert abs(a.value - b.value) <= 10 * max(a.error_estimate, b.error_estimate, 1e-15)


def test_singular_point_graded_integrable():
    # |z|^{-1/2} singularity at an on-curve point: integrable, converges
    seg = Cycle([rectangle(0, 1, -1, 1)])
    cfg = QuadratureConfig().with_singular([0j])
    r = integrate(lambda z: 1 / np.sqrt(np.abs(z) + 0j), seg, cfg)
    assert not r.diverged


def test_probe_examples():
    T = Diagonal([0, 2])
    curve = Curve([Segment.line(-1j, 1j), Segment.arc(0, 1, np.pi / 2, -np.pi / 2)])
    ok = integrability_probe(T, [0, 1], curve, [0j])
    assert ok["finite"]
    bad = integrability_probe(T, [1, 0], curve, [0j])
    assert not bad["finite"]
    assert bad["growth_exponent"] == pytest.approx(1.0, abs=0.02)


def test_probe_far_cell_indicator():
    T = tangent_discs(2000, seed=0)
    x = ((np.abs(T.nodes - 1.5) < 0.3)).astype(float)
    r = integrability_probe(T, x, tangent_disc_curve().curves[0], [0j])
    assert r["finite"] and r["growth_exponent"] < 0.5 and np.isfinite(r["estimate"])


def test_fit_exponent_power_law():
    d = 2.0 ** -np.arange(5, 30)
    assert fit_exponent(d, d ** -0.5) == pytest.approx(0.5, abs=1e-6)
    assert fit_exponent(d, d ** -1.0) == pytest.approx(1.0, abs=1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(grading_ratio=1.5)
    with pytest.raises(ValueError):
        QuadratureConfig(tol=0)


@pytest.mark.parametrize("e", [0.0, 0.3, 0.5, 0.7])
def test_singular_point_value(e):
    # closed form: integral of |t|^(-e) over [-1, 1] along the imaginary axis, dz = -i dt
    seg = Cycle([rectangle(0, 1, -1, 1)])
    f = lambda z: np.where(z.real < 0.5, np.abs(z) ** (-e), 0) * (np.abs(z.real) < 1e-12)
    cfg = QuadratureConfig().with_singular([0j])
    r = integrate(f, seg, cfg)
    exact = -1j * 2 / (1 - e)
    assert abs(r.value - exact) < 1e-6 * abs(exact)
