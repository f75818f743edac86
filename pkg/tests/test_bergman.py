import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finslerlab import bergman, finsler, kahler
from finslerlab.errors import ConfigurationError, DomainError, InputError
from finslerlab.geometry import Ball, ComplexEllipsoid, Polydisk, disk_mobius, lp_domain, unit_disk


def ball_moment(alpha):
    """int over the unit ball of |z^alpha|^2 = pi^n alpha! / (n + |alpha|)!"""
    n = len(alpha)
    return math.pi**n * math.prod(math.factorial(a) for a in alpha) / math.factorial(n + sum(alpha))


def series_kernel(z, degree, moment):
    """sum over |alpha| <= degree of |z^alpha|^2 / ||z^alpha||^2"""
    n = len(z)
    total = 0.0
    for alpha in np.ndindex(*([degree + 1] * n)):
        if sum(alpha) <= degree:
            total += np.prod(np.abs(z) ** (2 * np.array(alpha))) / moment(alpha)
    return total


def test_closed_form_kernel_values():
    assert bergman.closed_form_kernel(unit_disk(), [0]) == pytest.approx(1 / np.pi, rel=1e-15)
    assert bergman.closed_form_kernel(Ball(1.0, 2), [0, 0]) == pytest.approx(2 / np.pi**2, rel=1e-15)
    assert bergman.closed_form_kernel(Polydisk([1.0, 1.0]), [0, 0]) == pytest.approx(1 / np.pi**2)


def test_numerical_disk_kernel():
    m10 = bergman.build_numerical_kernel(unit_disk(), 10)
    assert m10.kernel_diag([0]) == pytest.approx(1 / np.pi, abs=1e-10)
    m20 = bergman.build_numerical_kernel(unit_disk(), 20)
    assert m20.kernel_diag([0.5]) == pytest.approx(16 / (9 * np.pi), abs=1e-4)
    oracle = series_kernel(np.array([0.5]), 20, ball_moment)
    assert m20.kernel_diag([0.5]) == pytest.approx(oracle, rel=1e-10)


def test_numerical_ball_kernel_matches_moment_series():
    B = Ball(1.0, 2)
    m = bergman.build_numerical_kernel(B, 12)
    assert m.kernel_diag([0, 0]) == pytest.approx(2 / np.pi**2, abs=1e-10)
    z = np.array([0.3, -0.2j])
    assert m.kernel_diag(z) == pytest.approx(series_kernel(z, 12, ball_moment), rel=1e-10)
    assert m.gram_residual() < 1e-8


def test_numerical_polydisk_and_ellipsoid():
    P = Polydisk([1.0, 2.0])
    m = bergman.build_numerical_kernel(P, 8)
    moment = lambda a: math.prod(math.pi * r ** (2 * k + 2) / (k + 1) for k, r in zip(a, (1.0, 2.0)))
    z = np.array([0.2, 0.5j])
    assert m.kernel_diag(z) == pytest.approx(series_kernel(z, 8, moment), rel=1e-10)
    E = ComplexEllipsoid([1.0, 2.0])
    me = bergman.build_numerical_kernel(E, 16)
    # the ellipsoid is a linear image of the ball: K_E(z) = K_B(Az)|det A|^2
    assert me.kernel_diag([0, 0]) == pytest.approx(2 / np.pi**2 / 4, rel=1e-10)
    assert me.gram_residual() < 1e-8


def test_lp_domain_quadrature_routes_agree():
    # l^4 ball is Reinhardt: sphere-orthant rule by default, QMC as the second route
    D = lp_domain(4, [1.0, 1.0])
    gl = bergman.build_numerical_kernel(D, 2)
    assert gl.quadrature["method"] == "gauss-legendre"
    qmc = bergman.build_numerical_kernel(D, 2, {"method": "qmc", "points": 2**16, "seed": 0})
    z = np.array([0.3, 0.2j])
    assert qmc.kernel_diag(z) == pytest.approx(gl.kernel_diag(z), rel=2e-2)


def test_kernel_monotone_in_degree():
    z = np.array([0.4, 0.3j])
    vals = [bergman.build_numerical_kernel(Ball(1.0, 2), d).kernel_diag(z) for d in range(0, 10, 2)]
    assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))


def test_cache_round_trip(tmp_path):
    m = bergman.build_numerical_kernel(Polydisk([1.0, 1.0]), 4)
    path = tmp_path / "kernel.json"
    m.save(path)
    again = bergman.BergmanKernelModel.load(path)
    assert again.kernel_diag([0.3, 0.1]) == m.kernel_diag([0.3, 0.1])
    d = m.to_dict()
    d["domain_hash"] = "0" * 64
    with pytest.raises(ConfigurationError):
        bergman.BergmanKernelModel.from_dict(d)


def test_kernel_exterior_point():
    with pytest.raises(DomainError):
        bergman.closed_form_kernel_model(unit_disk()).kernel_diag([1.2])


def test_bergman_metric_values():
    disk = bergman.closed_form_field(unit_disk())
    assert bergman.bergman_metric(disk, [0], [1]) == pytest.approx(2.0, rel=1e-14)
    assert bergman.bergman_metric(disk, [0.5], [1]) == pytest.approx(32 / 9, rel=1e-14)
    for n in (1, 2, 3):
        v = np.eye(n)[0]
        assert bergman.bergman_metric(bergman.closed_form_field(Ball(1.0, n)), np.zeros(n), v) \
            == pytest.approx(n + 1, rel=1e-14)


def test_numerical_metric_matches_closed_form():
    for dom, deg in ((Ball(1.0, 2), 14), (Polydisk([1.0, 1.0]), 14)):
        num = bergman.build_numerical_kernel(dom, deg).metric_field()
        exact = bergman.closed_form_field(dom)
        for z in dom.sample_interior(10, seed=1, max_fraction=0.5):
            if dom.boundary_distance(z) > 0.2:
                for v in np.eye(2):
                    assert bergman.bergman_metric(num, z, v) == pytest.approx(
                        bergman.bergman_metric(exact, z, v), rel=1e-4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ball_curvatures(n):
    rep = bergman.bergman_curvatures(bergman.closed_form_field(Ball(1.0, n)), 0.3 * np.ones(n) / n,
                                     np.arange(1, n + 1) + 0.5j)
    assert rep.sec == pytest.approx(-2 / (n + 1), abs=1e-10)
    assert rep.ric == pytest.approx(-1, abs=1e-10)
    assert rep.scal == pytest.approx(-n, abs=1e-10)
    assert rep.within(bergman.zhang_bounds(n, 1.0))


def test_disk_convention_factor():
    disk = bergman.closed_form_field(unit_disk())
    assert bergman.bergman_curvatures(disk, [0.2], [1]).sec == pytest.approx(-1, abs=1e-12)
    G = finsler.HermitianModel(disk)
    assert finsler.hsc_chern_finsler(G, [0.2], [1]) == pytest.approx(-2, abs=1e-12)


def test_zhang_bounds_values():
    assert bergman.zhang_bounds(1, 1.0)[:2] == pytest.approx((-1, -1), abs=1e-12)
    b = bergman.zhang_bounds(2, 1.0)
    assert b[0] == pytest.approx(-2 / 3) and b[1] == pytest.approx(-2 / 3)
    assert b[3] == pytest.approx(-1) and b[5] == pytest.approx(-2)
    assert bergman.zhang_bounds(2, 0.5)[0] == pytest.approx(2 - 8 / 3 * 256, abs=1e-9)
    with pytest.raises(InputError):
        bergman.zhang_bounds(2, 1.5)
    with pytest.raises(InputError):
        bergman.zhang_bounds(2, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.floats(0.05, 1.0))
def test_zhang_bracket_ordered(n, s):
    lo_s, hi_s, lo_r, hi_r, lo_c, hi_c = bergman.zhang_bounds(n, s)
    assert lo_s <= hi_s + 1e-12 and lo_r <= hi_r + 1e-12 and lo_c <= hi_c + 1e-12


def test_curvature_grid_emits_rows():
    text = bergman.curvature_grid(bergman.closed_form_field(Ball(1.0, 2)),
                                  [np.zeros(2), np.array([0.1, 0.2j])], np.array([1, 0]))
    lines = text.splitlines()
    assert lines[0].split("\t")[-3:] == ["sec", "ric", "scal"]
    assert len(lines) == 3


def test_yeung_growth():
    ds = np.logspace(-4, np.log10(0.5), 30)
    disk = bergman.closed_form_kernel_model(unit_disk())
    rep = bergman.yeung_growth_check(disk, unit_disk(), [[1 - d] for d in ds])
    assert rep["passed"] and rep["inf"] > 0
    ball = bergman.closed_form_kernel_model(Ball(1.0, 2))
    rep = bergman.yeung_growth_check(ball, Ball(1.0, 2), [[1 - d, 0] for d in ds])
    assert rep["passed"]
    rep = bergman.yeung_growth_check(bergman.ConstantKernel(1.0), unit_disk(), [[1 - d] for d in ds])
    assert not rep["passed"]


def test_yeung_rejects_far_points():
    with pytest.raises(InputError):
        bergman.yeung_growth_check(bergman.ConstantKernel(), Ball(2.0, 1), [[0.0]])


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
def test_disk_automorphism_invariance(ar, ai, zr, zi):
    a, z = complex(ar, ai), complex(zr, zi)
    disk = bergman.closed_form_field(unit_disk())
    w = disk_mobius(a, z)
    dw = (abs(a) ** 2 - 1) / (1 - np.conj(a) * z) ** 2
    pulled = bergman.bergman_metric(disk, [w], [1]) * abs(dw) ** 2
    assert pulled == pytest.approx(bergman.bergman_metric(disk, [z], [1]), rel=1e-6)
