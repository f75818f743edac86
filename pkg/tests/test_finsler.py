import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finslerlab import finsler, kahler
from finslerlab.errors import ConfigurationError, DegeneracyError, DomainError, SlitBundleError
from finslerlab.geometry import Ball, unit_disk

from conftest import cvec

unit = st.floats(-0.6, 0.6, allow_nan=False)
nonzero = st.floats(0.2, 3.0)
phase = st.floats(0, 2 * np.pi)


def family(a=1.0, b=0.5, n=2):
    return finsler.ExplicitFamily(a, b, n, Ball(1.0, n))


def test_value_at_origin_is_euclidean():
    G = finsler.ExplicitFamily(1.0, 1.0, 2)
    v = np.array([0.3 - 1j, 2.0])
    assert G(np.zeros(2), v) == pytest.approx(np.vdot(v, v).real, rel=1e-15)


def test_printed_formula_example():
    # r = 1, t = s = 0.25, a = b = 1
    G = finsler.ExplicitFamily(1.0, 1.0, 2)
    assert finsler.eval_G(G, [0.5, 0], [1, 0]) == pytest.approx(np.exp(0.5), rel=1e-14)


def test_zero_vector():
    G = family()
    assert G([0.1, 0], [0, 0]) == 0.0
    with pytest.raises(SlitBundleError):
        finsler.levi_matrix(G, [0.1, 0], [0, 0])


def test_outside_domain():
    with pytest.raises(DomainError):
        family()([1.0, 0.5], [1, 0])


def test_window_enforced():
    with pytest.raises(ConfigurationError):
        finsler.ExplicitFamily(1.0, 1.0, 2, Ball(1.0, 2))
    finsler.ExplicitFamily(1.0, 1.0, 2, Ball(1.0, 2), strict=False)


def test_levi_identity_at_origin():
    G = finsler.ExplicitFamily(0.7, 0.9, 3)
    rng = np.random.default_rng(0)
    for v in cvec(rng, 3, 5):
        assert np.allclose(finsler.levi_matrix(G, np.zeros(3), v), np.eye(3), atol=1e-14)
        assert np.allclose(G.fd_derivatives(np.zeros(3), v).levi, np.eye(3), atol=1e-7)


def test_hermitian_levi_is_vector_independent():
    G = finsler.ExplicitFamily(1.0, 0.0, 2)
    z = np.array([0.2, 0.1j])
    L1 = finsler.levi_matrix(G, z, [1, 0])
    L2 = finsler.levi_matrix(G, z, [0.3, 2j])
    assert np.allclose(L1, L2, atol=1e-14)
    assert np.allclose(L1, np.exp(0.05) * np.eye(2))


def test_levi_closed_form_matches_finite_differences():
    G = family()
    rng = np.random.default_rng(1)
    pts = Ball(1.0, 2).sample_interior(20, seed=2)
    for z, v in zip(pts, cvec(rng, 2, 20)):
        A = G.derivatives(z, v).levi
        B = G.fd_derivatives(z, v).levi
        assert np.linalg.norm(A - B) <= 1e-6 * np.linalg.norm(A)


def test_pseudoconvexity_in_window():
    rep = finsler.strong_pseudoconvexity_check(family(), Ball(1.0, 2), 1000, seed=0)
    assert rep["passed"] and rep["min_eigenvalue"] > 0


def test_pseudoconvexity_hermitian_minimum_at_origin():
    G = finsler.ExplicitFamily(1.0, 0.0, 2, Ball(1.0, 2))
    rep = finsler.strong_pseudoconvexity_check(G, Ball(1.0, 2), 200, seed=0)
    assert rep["min_eigenvalue"] == pytest.approx(1.0, abs=1e-14)
    flat = finsler.HermitianDiagonal(2)
    assert finsler.strong_pseudoconvexity_check(flat, Ball(1.0, 2), 50)["min_eigenvalue"] == 1.0


def test_pseudoconvexity_outside_window_does_not_crash():
    G = finsler.ExplicitFamily(1.0, 2.0, 2, Ball(1.0, 2), strict=False)
    rep = finsler.strong_pseudoconvexity_check(G, Ball(1.0, 2), 300, seed=0)
    assert np.isfinite(rep["min_eigenvalue"])


def test_poincare_curvature():
    P = finsler.PoincareModel(unit_disk())
    for z in [0.0, 0.3, -0.5 + 0.4j, 0.9j]:
        assert finsler.hsc_chern_finsler(P, [z], [1.0]) == pytest.approx(-4.0, abs=1e-10)


def test_hermitian_case_at_origin():
    # exp(|z|^2)|v|^2: the doubled Kähler HSC at 0 via the curvature-tensor route
    G = finsler.ExplicitFamily(1.0, 0.0, 2)
    oracle = 2 * kahler.hsc(kahler.ExpConformalField(1.0, 2), np.zeros(2), [1, 0])
    assert oracle == pytest.approx(-2.0, abs=1e-12)
    assert finsler.hsc_chern_finsler(G, np.zeros(2), [1, 0]) == pytest.approx(oracle, abs=1e-12)


def test_family_curvature_at_origin():
    # frozen from the finite-difference route: -2(a + b) at z = 0
    G = finsler.ExplicitFamily(1.0, 0.5, 2)
    fd = finsler.hsc_chern_finsler_fd(G, np.zeros(2), [1, 0])
    assert fd == pytest.approx(-3.0, abs=1e-6)
    assert finsler.hsc_chern_finsler(G, np.zeros(2), [0.6, 0.8j]) == pytest.approx(-3.0, abs=1e-12)


def test_family_curvature_closed_form_matches_fd():
    G = family()
    rng = np.random.default_rng(7)
    pts = Ball(1.0, 2).sample_interior(15, seed=8)
    for z, v in zip(pts, cvec(rng, 2, 15)):
        assert finsler.hsc_chern_finsler(G, z, v) == pytest.approx(
            finsler.hsc_chern_finsler_fd(G, z, v), abs=1e-6)


def test_family_curvature_negative():
    G = family()
    rng = np.random.default_rng(3)
    vals = [finsler.hsc_chern_finsler(G, z, v)
            for z, v in zip(Ball(1.0, 2).sample_interior(200, seed=4), cvec(rng, 2, 200))]
    assert max(vals) < 0


def test_disc_lower_bounds():
    P = finsler.PoincareModel(unit_disk())
    assert finsler.hsc_disc_lower(P, [0.0], [1.0]) == pytest.approx(-4.0, abs=1e-6)
    flat = finsler.HermitianDiagonal(2)
    assert finsler.hsc_disc_lower(flat, [0.1, 0.2], [1, 1j]) == pytest.approx(0.0, abs=1e-9)
    G = finsler.ExplicitFamily(1.0, 1.0, 2)
    exact = finsler.hsc_chern_finsler(G, np.zeros(2), [1, 0])
    for deg in (1, 2):
        assert finsler.hsc_disc_lower(G, np.zeros(2), [1, 0], deg) <= exact + 1e-6


def test_disc_domination_on_samples():
    G = family()
    rng = np.random.default_rng(11)
    for z, v in zip(Ball(1.0, 2).sample_interior(20, seed=12), cvec(rng, 2, 20)):
        assert finsler.hsc_disc_lower(G, z, v) <= finsler.hsc_chern_finsler(G, z, v) + 1e-6


def test_singular_levi_raises():
    with pytest.raises(DegeneracyError):
        finsler.curvature_from_derivatives(
            finsler.FinslerDerivatives(1.0, np.zeros((2, 2)), 0.0, np.zeros(2)))


def test_serialization_round_trip():
    G = family()
    again = finsler.model_from_dict(G.to_dict())
    z, v = np.array([0.2, -0.1j]), np.array([1.0, 0.5])
    assert again(z, v) == G(z, v)
    with pytest.raises(ConfigurationError):
        finsler.model_from_dict({"kind": "explicit-family", "a": 1, "dimension": 2, "c": 3})


@settings(max_examples=50, deadline=None)
@given(unit, unit, unit, unit, nonzero, phase, st.floats(0.1, 2.0), st.floats(0.0, 0.9))
def test_homogeneity(x1, y1, x2, y2, mod, arg, a, b):
    G = finsler.ExplicitFamily(a, b, 2, Ball(1.0, 2))
    z = np.array([x1 + 1j * y1, x2 + 1j * y2]) / 1.5
    v = np.array([1.0 + 0.3j, -0.4j])
    zeta = mod * np.exp(1j * arg)
    assert abs(G(z, zeta * v) - mod**2 * G(z, v)) < 1e-12 * G(z, zeta * v)


@settings(max_examples=30, deadline=None)
@given(unit, unit, unit, unit, nonzero, phase)
def test_curvature_scale_invariance(x1, y1, x2, y2, mod, arg):
    G = family()
    z = np.array([x1 + 1j * y1, x2 + 1j * y2]) / 1.5
    v = np.array([0.5 - 0.2j, 1.0])
    k1 = finsler.hsc_chern_finsler(G, z, v)
    k2 = finsler.hsc_chern_finsler(G, z, mod * np.exp(1j * arg) * v)
    assert k2 == pytest.approx(k1, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(unit, unit, unit, unit, st.floats(0.1, 2.0))
def test_hermitian_reduction(x1, y1, x2, y2, a):
    G = finsler.ExplicitFamily(a, 0.0, 2)
    z = np.array([x1 + 1j * y1, x2 + 1j * y2])
    v = np.array([1.0, 0.7j])
    field = kahler.ExpConformalField(a, 2)
    herm = finsler.HermitianModel(kahler.HermitianField(field.metric, 2, kahler=False))
    # the FD Hermitian route and the Kähler-tensor route of the same metric
    assert finsler.hsc_chern_finsler(G, z, v) == pytest.approx(
        finsler.hsc_chern_finsler(herm, z, v), abs=1e-6)
