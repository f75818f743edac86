import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finslerlab.errors import DomainError, InputError
from finslerlab.geometry import (Ball, ComplexEllipsoid, Polydisk, ball_automorphism,
                                 center_automorphism, domain_from_dict, lp_domain, unit_disk)

DOMAINS = [Ball(1.0, 2), Polydisk([1.0, 2.0]), ComplexEllipsoid([1.0, 2.0]), lp_domain(4, [1.0, 1.0])]

coord = st.floats(-1.0, 1.0, allow_nan=False)


def test_contains_examples():
    assert Ball(1.0, 2).contains([0, 0])
    assert not Ball(1.0, 2).contains([1, 0])
    assert Polydisk([1.0, 2.0]).contains([0.5, 1.9])
    with pytest.raises(InputError):
        Ball(1.0, 2).contains([0, 0, 0])


def test_boundary_distance_examples():
    assert Ball(1.0, 2).boundary_distance([0, 0]) == 1.0
    assert Polydisk([1.0, 2.0]).boundary_distance([0.5, 0]) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        Ball(1.0, 2).boundary_distance([2, 0])


def test_ellipsoid_boundary_distance_matches_projected_search():
    # oracle: minimize |w| over the boundary parametrized by angles
    E = ComplexEllipsoid([1.0, 2.0])
    th = np.linspace(0, np.pi / 2, 20001)
    # |w1|^2 + |w2|^2/4 = 1 with |w1| = cos, |w2| = 2 sin
    oracle = np.min(np.hypot(np.cos(th), 2 * np.sin(th)))
    assert E.boundary_distance([0, 0]) == pytest.approx(oracle, abs=1e-12)
    z = np.array([0.3, 0.5j])
    p1, p2, a = np.meshgrid(np.linspace(0, 2 * np.pi, 241), np.linspace(0, 2 * np.pi, 241),
                            np.linspace(0, np.pi / 2, 121), indexing="ij", sparse=True)
    dist = np.sqrt(np.abs(np.cos(a) * np.exp(1j * p1) - z[0]) ** 2
                   + np.abs(2 * np.sin(a) * np.exp(1j * p2) - z[1]) ** 2)
    grid_min = dist.min()
    d = E.boundary_distance(z)
    assert d <= grid_min + 1e-12
    assert d >= grid_min - 2e-3


def test_enclosing_radius_examples():
    assert Ball(1.0, 2).enclosing_radius([0, 0]) == 1.0
    assert Ball(1.0, 2).enclosing_radius([0.5, 0]) == pytest.approx(1.5)
    assert Polydisk([1.0, 1.0]).enclosing_radius([0, 0]) == pytest.approx(np.sqrt(2))


def test_sup_norm_lp():
    # l^4 unit ball: max |w| at |w1| = |w2| = 2^{-1/4}
    assert lp_domain(4, [1.0, 1.0]).sup_norm == pytest.approx(2 ** 0.25, rel=1e-6)


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.kind + str(d))
def test_distance_le_enclosing(dom):
    for z in dom.sample_interior(30, seed=1):
        assert dom.boundary_distance(z) <= dom.enclosing_radius(z) + 1e-12


@pytest.mark.parametrize("dom", DOMAINS[:3], ids=lambda d: d.kind)
def test_round_trip(dom):
    again = domain_from_dict(dom.to_dict())
    assert again.to_dict() == dom.to_dict()


def test_unknown_spec_fields_rejected():
    with pytest.raises(InputError):
        domain_from_dict({"kind": "ball", "dimension": 2, "parameters": {}, "colour": 1})


@settings(max_examples=60, deadline=None)
@given(coord, coord, coord, coord, coord, coord, coord, coord)
def test_ball_distance_exact_and_lipschitz(a, b, c, d, e, f, g, h):
    B = Ball(1.0, 2)
    z = 0.7 * np.array([a + 1j * b, c + 1j * d]) / 2
    w = 0.7 * np.array([e + 1j * f, g + 1j * h]) / 2
    assert B.boundary_distance(z) == pytest.approx(1 - np.linalg.norm(z), abs=1e-14)
    assert B.boundary_distance(z) + np.linalg.norm(z - w) >= B.boundary_distance(w) - 1e-12


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.kind)
def test_convex_midpoints(dom):
    rng = np.random.default_rng(3)
    pts = dom.sample_interior(200, seed=4, max_fraction=0.999)
    for _ in range(200):
        i, j = rng.integers(len(pts), size=2)
        assert dom.contains((pts[i] + pts[j]) / 2)


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.kind)
def test_lipschitz_distance(dom):
    pts = dom.sample_interior(40, seed=5)
    for z, w in zip(pts[:-1], pts[1:]):
        assert dom.boundary_distance(z) + np.linalg.norm(z - w) >= dom.boundary_distance(w) - 1e-9


def test_ball_automorphism_swaps_point_and_origin():
    a = np.array([0.3, -0.2j])
    assert np.allclose(ball_automorphism(a, a), 0)
    assert np.allclose(ball_automorphism(a, np.zeros(2)), a)
    w = np.array([0.1 + 0.2j, 0.4])
    assert np.allclose(ball_automorphism(a, ball_automorphism(a, w)), w)
    assert np.linalg.norm(ball_automorphism(a, w)) < 1


@pytest.mark.parametrize("dom", DOMAINS[:3], ids=lambda d: d.kind)
def test_center_automorphism_maps_boundary_to_boundary(dom):
    z = dom.sample_interior(1, seed=9)[0]
    phi = center_automorphism(dom, z)
    assert np.allclose(phi(z), 0, atol=1e-14)
    for w in dom.boundary_points(50, seed=2):
        img = phi(w)
        assert not dom.contains(img * (1 + 1e-9))
        assert dom.contains(img * (1 - 1e-9))


def test_unit_disk():
    D = unit_disk()
    assert D.dim == 1 and D.contains([0.99]) and not D.contains([1.0])
