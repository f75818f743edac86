"""Certified intervals for the Kobayashi metric, the Poincaré distance,
Kobayashi distance upper bounds from disc chains, and the hyperbolicity
check 𝔎^2 >= (B/4) G.

Upper certificates are holomorphic discs phi with phi(0) = z and
phi'(0) = lam v (giving 𝔎 <= 1/lam). Lower certificates are holomorphic
maps f: D -> unit disk with f(z) = 0 (giving 𝔎 >= C >= |df_z(v)|).
Both kinds carry a callable so they can be re-verified by sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import InputError, UnsupportedDomainError
from .geometry import (Ball, ComplexEllipsoid, ConvexSmooth, Domain, Polydisk, ball_automorphism,
                       disk_mobius, inner, nonzero_vector, sphere_directions)

_CIRCLE_COUNT = 256


def poincare_distance(z1, z2) -> float:
    """artanh of the pseudo-hyperbolic distance |z1 - z2| / |1 - conj(z1) z2|."""
    z1, z2 = complex(z1), complex(z2)
    if abs(z1) >= 1 or abs(z2) >= 1:
        raise InputError("points must lie in the unit disk")
    m = abs(z1 - z2) / abs(1 - np.conj(z1) * z2)
    return float(np.arctanh(m))


def poincare_metric(z, v) -> float:
    """𝒫(z; v) = |v|^2 / (1 - |z|^2)^2."""
    z = complex(z)
    if abs(z) >= 1:
        raise InputError("point must lie in the unit disk")
    return abs(v) ** 2 / (1 - abs(z) ** 2) ** 2


# -- witnesses -----------------------------------------------------------

@dataclass
class DiscWitness:
    """Holomorphic disc phi: unit disk -> D with phi(0) = z, phi'(0) = scale * v.

    ``coefficients`` lists polynomial coefficients (phi = sum c_k zeta^k) for
    affine and polynomial discs; model discs built from Möbius maps leave it
    empty and provide only ``map``.
    """

    kind: str
    point: np.ndarray
    direction: np.ndarray
    scale: float
    map: object
    coefficients: list = field(default_factory=list)

    def verify(self, domain: Domain, radii=(0.9, 0.99, 0.999), count=_CIRCLE_COUNT):
        ok = np.allclose(self.map(0.0), self.point, atol=1e-12, rtol=0)
        circle = np.exp(2j * np.pi * np.arange(count) / count)
        for r in radii:
            pts = np.array([self.map(r * w) for w in circle])
            ok = ok and bool(np.all(domain.contains_many(pts)))
        return bool(ok)

    def to_dict(self):
        return {"kind": self.kind, "point": self.point, "direction": self.direction,
                "scale": self.scale, "coefficients": self.coefficients}


@dataclass
class FunctionalWitness:
    """Holomorphic f: D -> unit disk with f(z) = 0 and |df_z(v)| = value."""

    kind: str
    value: float
    map: object
    description: dict = field(default_factory=dict)

    def verify(self, domain: Domain, count=2000, seed=0, tol=1e-9):
        pts = domain.boundary_points(count, seed)
        return bool(max(abs(self.map(w)) for w in pts) <= 1 + tol)

    def to_dict(self):
        return {"kind": self.kind, "value": self.value, **self.description}


@dataclass
class MetricInterval:
    lower: float
    upper: float
    lower_witness: FunctionalWitness
    upper_witness: DiscWitness

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper,
                "lower_witness": self.lower_witness.to_dict(),
                "upper_witness": self.upper_witness.to_dict()}


# -- upper certificates ----------------------------------------------------

def _affine_disc(z, v, R):
    return DiscWitness("affine", z, v, R, lambda zeta: z + zeta * R * v,
                       [z.tolist(), (R * v).tolist()])


def kobayashi_upper_affine(domain: Domain, z, v):
    """1/R* for the largest affine disc zeta -> z + zeta v inside D."""
    z = domain.require_interior(z)
    v = nonzero_vector(v, domain.dim)
    R = domain.radial_extent(z, v)
    return 1.0 / R, _affine_disc(z, v, R)


def _ball_slice_disc(z, v):
    """Extremal disc of the unit ball: the slice through z along v,
    parametrized by a Möbius map. Returns (scale, map)."""
    vv = float(np.vdot(v, v).real)
    xc = -inner(z, v) / vv
    rho = np.sqrt((1 - np.vdot(z, z).real + abs(inner(z, v)) ** 2 / vv) / vv)
    alpha = -xc / rho

    def phi(zeta):
        m = (zeta + alpha) / (1 + np.conj(alpha) * zeta)
        return z + (xc + rho * m) * v

    return float(rho * (1 - abs(alpha) ** 2)), phi


def _model_disc(domain: Domain, z, v):
    """Exact extremal disc on balls, ellipsoids and polydisks, else None."""
    if isinstance(domain, (Ball, ComplexEllipsoid)):
        s = domain.radius if isinstance(domain, Ball) else domain.semiaxes
        lam, psi = _ball_slice_disc(z / s, v / s)
        return DiscWitness("ball-slice", z, v, lam, lambda zeta: s * psi(zeta))
    if isinstance(domain, Polydisk):
        r = domain.radii
        a = z / r
        caps = np.where(v != 0, r * (1 - np.abs(a) ** 2) / np.where(v != 0, np.abs(v), 1), np.inf)
        lam = float(caps.min())
        c = lam * v / (r * (1 - np.abs(a) ** 2))      # |c_i| <= 1

        def phi(zeta):
            w = c * zeta
            return r * (w + a) / (1 + np.conj(a) * w)

        return DiscWitness("polydisk-product", z, v, lam, phi)
    return None


def _polynomial_disc(domain: Domain, z, v, degree, R0, seed, restarts=10):
    """Maximize lam over discs z + zeta (lam v + sum_k c_k zeta^(k-1)) kept
    inside D on sampled circles (convex D: the boundary circle suffices)."""
    n = domain.dim
    circle = np.exp(2j * np.pi * np.arange(_CIRCLE_COUNT) / _CIRCLE_COUNT)

    def inside(lam, cs):
        P = z + circle[:, None] * (lam * v + sum(c * circle[:, None] ** (k + 1)
                                                 for k, c in enumerate(cs)))
        return bool(np.all(domain.contains_many(P)))

    def best_lam(cs):
        lo, hi = 0.0, 4 * R0 + 1.0
        if not inside(lo, cs):
            return 0.0
        while inside(hi, cs):
            hi *= 2
            if hi > 1e6:
                return 0.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if inside(mid, cs) else (lo, mid)
        return lo

    def unpack(x):
        x = x.reshape(degree - 1, 2, n)
        return [xi[0] + 1j * xi[1] for xi in x]

    rng = np.random.default_rng(seed)
    best = (R0, [])
    scale = R0 * np.linalg.norm(v)
    for k in range(restarts):
        x0 = np.zeros(2 * n * (degree - 1)) if k == 0 else 0.2 * scale * rng.standard_normal(
            2 * n * (degree - 1))
        res = optimize.minimize(lambda x: -best_lam(unpack(x)), x0, method="Nelder-Mead",
                                options={"maxiter": 200, "xatol": 1e-8, "fatol": 1e-12})
        lam = -res.fun
        if lam > best[0]:
            best = (lam, unpack(res.x))
    lam, cs = best
    coeffs = [z.tolist(), (lam * v).tolist()] + [c.tolist() for c in cs]

    def phi(zeta):
        return z + zeta * (lam * v + sum(c * zeta ** (k + 1) for k, c in enumerate(cs)))

    return DiscWitness("polynomial", z, v, float(lam), phi, coeffs)


# -- lower certificates ----------------------------------------------------

def _balanced_functional(domain, z, v, u):
    """w -> <w,u>/h(u) maps a balanced D into the unit disk; compose with the
    Möbius involution at <z,u>/h(u)."""
    h = float(domain.support(u[None, :])[0])
    a = inner(z, u) / h
    val = abs(inner(v, u)) / h / (1 - abs(a) ** 2)
    return val, FunctionalWitness("balanced-linear", float(val),
                                  lambda w: disk_mobius(a, inner(w, u) / h),
                                  {"direction": u})


def _halfplane_functional(domain, z, v, u):
    """Re<w,u> < h(u): map the half plane to the disk with <z,u> -> 0."""
    h = float(domain.support(u[None, :])[0])
    ell = inner(z, u)
    dist = h - ell.real
    val = abs(inner(v, u)) / (2 * dist)

    def f(w):
        x = inner(w, u) - ell
        return x / (2 * dist - x) if dist > 0 else np.inf

    return val, FunctionalWitness("half-plane", float(val), f, {"direction": u})


def _model_functional(domain, z, v):
    """Exact functional on balls/ellipsoids (automorphism then linear) and
    polydisks (best coordinate), else None."""
    if isinstance(domain, (Ball, ComplexEllipsoid)):
        s = domain.radius if isinstance(domain, Ball) else domain.semiaxes
        a, vb = z / s, v / s
        aa = float(np.vdot(a, a).real)
        norm2 = np.vdot(vb, vb).real / (1 - aa) + abs(inner(vb, a)) ** 2 / (1 - aa) ** 2
        val = float(np.sqrt(norm2))
        # direction of d(phi_a)(v) at a
        if aa > 0:
            P = inner(vb, a) / aa * a
            dphi = -(P / (1 - aa) + (vb - P) / np.sqrt(1 - aa))
        else:
            dphi = -vb
        u = dphi / np.linalg.norm(dphi)
        return val, FunctionalWitness("ball-automorphism", val,
                                      lambda w: inner(ball_automorphism(a, np.asarray(w) / s), u),
                                      {"direction": u})
    if isinstance(domain, Polydisk):
        r = domain.radii
        a = z / r
        vals = np.abs(v) / (r * (1 - np.abs(a) ** 2))
        i = int(np.argmax(vals))
        val = float(vals[i])
        return val, FunctionalWitness("coordinate", val,
                                      lambda w: disk_mobius(a[i], np.asarray(w)[i] / r[i]),
                                      {"coordinate": i})
    return None


class BallKobayashiModel:
    """𝔎^2 of the unit ball as a Finsler metric:
    |v|^2/(1-|z|^2) + |<v,z>|^2/(1-|z|^2)^2. Wrapped by finsler.CallableModel."""

    def __call__(self, z, v):
        t = 1 - np.vdot(z, z).real
        return float(np.vdot(v, v).real / t + abs(inner(v, z)) ** 2 / t**2)


def _is_convex(domain):
    return isinstance(domain, (Ball, ComplexEllipsoid, Polydisk, ConvexSmooth))


def caratheodory_lower_support(domain: Domain, z, v, direction_budget=1024, seed=0):
    """Best of the sampled supporting-functional bounds (and the exact model
    functional when available)."""
    if not _is_convex(domain):
        raise UnsupportedDomainError("support-functional lower bounds need a convex domain")
    z = domain.require_interior(z)
    v = nonzero_vector(v, domain.dim)
    U = sphere_directions(domain.dim, direction_budget, seed)
    extra = [v / np.linalg.norm(v)]
    nz = np.linalg.norm(z)
    if nz > 0:
        extra.append(z / nz)
    U = np.vstack([np.array(extra), U])
    H = domain.support(U)
    ell = U @ np.conj(z)
    if domain.balanced:
        vals = np.abs(U @ np.conj(v)) / H / (1 - np.abs(ell / H) ** 2)
        k = int(np.argmax(vals))
        best = _balanced_functional(domain, z, v, U[k])
    else:
        vals = np.abs(U @ np.conj(v)) / (2 * (H - ell.real))
        k = int(np.argmax(vals))
        best = _halfplane_functional(domain, z, v, U[k])
    model = _model_functional(domain, z, v)
    if model is not None and model[0] >= best[0]:
        best = model
    return best


def kobayashi_metric(domain: Domain, z, v, effort=1, seed=0, direction_budget=1024):
    """MetricInterval [lower, upper] for 𝔎_D(z; v).

    upper: min of the affine disc, the exact model disc (balls, ellipsoids,
    polydisks) and, for effort >= 2, the best polynomial disc of degree
    ``effort`` found from 10 seeded restarts.
    """
    z = domain.require_interior(z)
    v = nonzero_vector(v, domain.dim)
    lower, lw = caratheodory_lower_support(domain, z, v, direction_budget, seed)
    up, uw = kobayashi_upper_affine(domain, z, v)
    model = _model_disc(domain, z, v)
    if model is not None and 1.0 / model.scale < up:
        up, uw = 1.0 / model.scale, model
    elif effort >= 2 and model is None:
        poly = _polynomial_disc(domain, z, v, int(effort), uw.scale, seed)
        if 1.0 / poly.scale < up:
            up, uw = 1.0 / poly.scale, poly
    return MetricInterval(float(lower), float(up), lw, uw)


# -- distances -------------------------------------------------------------

def _model_distance(domain, p, q):
    if isinstance(domain, (Ball, ComplexEllipsoid)):
        s = domain.radius if isinstance(domain, Ball) else domain.semiaxes
        w = ball_automorphism(p / s, q / s)
        return float(np.arctanh(min(np.linalg.norm(w), 1 - 1e-16)))
    if isinstance(domain, Polydisk):
        r = domain.radii
        return max(poincare_distance(a, b) for a, b in zip(p / r, q / r))
    return None


def kobayashi_distance_upper(domain: Domain, p, q, chain_budget=8):
    """Shortest Poincaré length over straight chains p = p_0, ..., p_k = q,
    k <= chain_budget, each link covered by the affine disc centered at
    p_i; on balls, ellipsoids and polydisks the extremal slice/product disc
    through p and q is included."""
    p = domain.require_interior(p)
    q = domain.require_interior(q)
    if np.allclose(p, q, rtol=0, atol=0):
        return 0.0
    best = np.inf
    for k in range(1, int(chain_budget) + 1):
        pts = [p + (q - p) * j / k for j in range(k + 1)]
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            d = b - a
            R = domain.radial_extent(a, d)            # disc zeta -> a + zeta R d
            total += np.arctanh(min(1.0 / R, 1 - 1e-16))
        best = min(best, total)
    model = _model_distance(domain, p, q)
    if model is not None:
        best = min(best, model)
    return float(best)


# -- hyperbolicity ---------------------------------------------------------

def hyperbolicity_check(domain: Domain, model, B=None, samples=200, seed=0, tol=1e-8):
    """Check 𝔎^2 >= (B/4) G using the lower 𝔎 certificate.

    ``B`` is the curvature bound (HSC of G <= -B). When omitted it is
    measured as -max sampled HSC; a nonpositive bound, or a supplied B that
    the sampled curvature contradicts, is rejected.
    """
    from .finsler import hsc_chern_finsler

    rng = np.random.default_rng(seed)
    pts = domain.sample_interior(samples, seed=int(rng.integers(2**31)))
    vs = rng.standard_normal((samples, domain.dim)) + 1j * rng.standard_normal((samples, domain.dim))
    curv = np.array([hsc_chern_finsler(model, z, v) for z, v in zip(pts, vs)])
    measured = float(-curv.max())
    if B is None:
        B = measured
    B = float(B)
    if not B > 0:
        raise InputError(f"curvature bound must be negative (measured B = {B:.6g})")
    if measured < B - 1e-6 * max(1.0, B):
        raise InputError(f"sampled curvature {-measured:.6g} exceeds the supplied bound -B = {-B:.6g}")
    margins = []
    for z, v in zip(pts, vs):
        low = caratheodory_lower_support(domain, z, v)[0]
        G = model(z, v)
        margins.append((low**2 - B / 4 * G) / G)
    margins = np.array(margins)
    k = int(np.argmin(margins))
    return {"B": B, "measured_B": measured, "min_margin": float(margins[k]),
            "worst_point": pts[k], "worst_vector": vs[k], "samples": samples, "seed": seed,
            "passed": bool(margins[k] >= -tol)}
