import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finslerlab import bergman, finsler, invariant
from finslerlab.errors import InputError, UnsupportedDomainError
from finslerlab.geometry import Ball, ComplexEllipsoid, Domain, Polydisk, disk_mobius, lp_domain, unit_disk

from conftest import cvec

disk_pt = st.tuples(st.floats(-0.65, 0.65), st.floats(-0.65, 0.65)).map(lambda t: complex(*t))


def test_poincare_distance():
    assert invariant.poincare_distance(0, 0) == 0
    assert invariant.poincare_distance(0, 0.5) == pytest.approx(0.5 * np.log(3), abs=1e-15)
    a, b = 0.3, 0.3j
    assert invariant.poincare_distance(a, b) <= (invariant.poincare_distance(a, 0)
                                                 + invariant.poincare_distance(0, b))
    with pytest.raises(InputError):
        invariant.poincare_distance(1.0, 0)


@settings(max_examples=80, deadline=None)
@given(disk_pt, disk_pt, disk_pt)
def test_poincare_triangle_and_symmetry(a, b, c):
    d = invariant.poincare_distance
    assert d(a, b) == pytest.approx(d(b, a), abs=1e-12)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12


@settings(max_examples=60, deadline=None)
@given(disk_pt, disk_pt, disk_pt)
def test_mobius_invariance(a, b, c):
    d = invariant.poincare_distance
    assert d(disk_mobius(c, a), disk_mobius(c, b)) == pytest.approx(d(a, b), abs=1e-8)


def test_upper_affine_examples():
    assert invariant.kobayashi_upper_affine(Ball(1.0, 2), [0, 0], [1, 0])[0] == pytest.approx(1.0)
    assert invariant.kobayashi_upper_affine(Polydisk([2.0, 1.0]), [0, 0], [1, 0])[0] == pytest.approx(0.5)
    assert invariant.kobayashi_upper_affine(unit_disk(), [0.5], [1])[0] == pytest.approx(2.0)


def test_lower_examples():
    assert invariant.caratheodory_lower_support(Ball(1.0, 2), [0, 0], [1, 0])[0] == pytest.approx(1.0)
    assert invariant.caratheodory_lower_support(unit_disk(), [0.5], [1])[0] == pytest.approx(4 / 3)
    assert invariant.caratheodory_lower_support(Polydisk([2.0, 1.0]), [0, 0], [1, 0])[0] == pytest.approx(0.5)


def test_lower_needs_convexity():
    class Annulus(Domain):
        kind = "annulus"

    with pytest.raises(UnsupportedDomainError):
        invariant.caratheodory_lower_support(Annulus(1), [0.5], [1])


def test_interval_examples():
    I = invariant.kobayashi_metric(Ball(1.0, 2), [0, 0], [1, 0])
    assert I.lower == pytest.approx(1.0, abs=1e-12) and I.upper == pytest.approx(1.0, abs=1e-12)
    I = invariant.kobayashi_metric(Polydisk([2.0, 1.0]), [0, 0], [1, 0])
    assert I.lower == pytest.approx(0.5, abs=1e-12) and I.upper == pytest.approx(0.5, abs=1e-12)
    I = invariant.kobayashi_metric(unit_disk(), [0.5], [1], effort=2)
    assert I.lower - 1e-12 <= 4 / 3 <= I.upper + 1e-12 and I.width < 1e-6


@pytest.mark.parametrize("dom", [Ball(1.0, 2), Polydisk([1.0, 2.0]), ComplexEllipsoid([1.0, 1.5])],
                         ids=lambda d: d.kind)
def test_witnesses_verify(dom):
    rng = np.random.default_rng(0)
    for z, v in zip(dom.sample_interior(5, seed=1), cvec(rng, dom.dim, 5)):
        I = invariant.kobayashi_metric(dom, z, v)
        assert I.lower <= I.upper + 1e-12
        assert I.upper_witness.verify(dom)
        assert I.lower_witness.verify(dom)


def test_polynomial_disc_tightens_and_verifies():
    dom = lp_domain(4, [1.0, 1.0])
    z, v = np.array([0.3, 0.1j]), np.array([1.0, 0.5])
    base = invariant.kobayashi_metric(dom, z, v, effort=1)
    tight = invariant.kobayashi_metric(dom, z, v, effort=2)
    assert tight.upper <= base.upper + 1e-12
    assert tight.lower <= tight.upper
    assert tight.upper_witness.verify(dom)
    assert tight.lower_witness.verify(dom)


def test_inclusion_monotone():
    small, big = Ball(0.5, 2), Ball(1.0, 2)
    z, v = np.array([0.1, 0.2]), np.array([1.0, 1j])
    assert invariant.kobayashi_upper_affine(big, z, v)[0] <= invariant.kobayashi_upper_affine(small, z, v)[0]


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 4.0))
def test_dilation_scaling(t):
    z, v = np.array([0.2, -0.3j]), np.array([1.0, 0.5])
    base = invariant.kobayashi_metric(Polydisk([1.0, 2.0]), z, v)
    big = invariant.kobayashi_metric(Polydisk([t, 2 * t]), t * z, v)
    assert big.upper == pytest.approx(base.upper / t, rel=1e-10)
    assert big.lower == pytest.approx(base.lower / t, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(disk_pt, disk_pt)
def test_disk_certificates_mobius_invariant(a, z):
    D = unit_disk()
    w = disk_mobius(a, z)
    dw = (abs(a) ** 2 - 1) / (1 - np.conj(a) * z) ** 2
    I1 = invariant.kobayashi_metric(D, [z], [1.0])
    I2 = invariant.kobayashi_metric(D, [w], [dw])
    assert I2.lower == pytest.approx(I1.lower, rel=1e-8)
    assert I2.upper == pytest.approx(I1.upper, rel=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ball_identity(n):
    dom = Ball(1.0, n)
    gB = bergman.closed_form_field(dom)
    K = invariant.BallKobayashiModel()
    rng = np.random.default_rng(n)
    for z, v in zip(dom.sample_interior(10, seed=n), cvec(rng, n, 10)):
        I = invariant.kobayashi_metric(dom, z, v)
        target = bergman.bergman_metric(gB, z, v) / (n + 1)
        assert I.lower**2 == pytest.approx(target, rel=1e-6)
        assert I.upper**2 == pytest.approx(target, rel=1e-6)
        assert K(z, v) == pytest.approx(target, rel=1e-12)


def test_distance_upper():
    assert invariant.kobayashi_distance_upper(unit_disk(), [0], [0.5]) == pytest.approx(0.5 * np.log(3))
    assert invariant.kobayashi_distance_upper(Ball(1.0, 2), [0, 0], [0.5, 0]) == pytest.approx(0.5 * np.log(3))
    assert invariant.kobayashi_distance_upper(lp_domain(4, [1.0, 1.0]), [0.1, 0], [0.1, 0]) == 0.0
    # chains on a generic domain still bound the distance of the inscribed ball from above
    d = invariant.kobayashi_distance_upper(lp_domain(4, [1.0, 1.0]), [0, 0], [0.5, 0])
    assert 0 < d <= 0.5 * np.log(3) + 1e-12


def test_hyperbolicity():
    rep = invariant.hyperbolicity_check(unit_disk(), finsler.PoincareModel(unit_disk()), 4.0, 50)
    assert rep["passed"] and abs(rep["min_margin"]) < 1e-9
    ball = Ball(1.0, 2)
    G = finsler.HermitianModel(bergman.closed_form_field(ball))
    rep = invariant.hyperbolicity_check(ball, G, 4 / 3, 50)
    assert rep["passed"] and abs(rep["min_margin"]) < 1e-9
    with pytest.raises(InputError):
        invariant.hyperbolicity_check(ball, finsler.HermitianDiagonal(2), None, 20)
    with pytest.raises(InputError):
        invariant.hyperbolicity_check(ball, G, 3.0, 20)
