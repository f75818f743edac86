"""Lower bounds for the squeezing function from complex-affine embeddings.

For f(w) = M (w - z) the image f(D) is convex with support function

    H(u) = h_D(M^H u) - Re<z, M^H u>,

so the largest ball about 0 inside f(D) has radius min_u H(u) and f(D)
fits in the ball of radius max_u H(u). After rescaling, every invertible
M certifies s_D(z) >= min H / max H.

On balls, ellipsoids and polydisks an automorphism first moves z to the
center, so those estimates equal the one at the center.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import InputError
from .geometry import Domain, center_automorphism, sphere_directions

DEFAULT_BUDGET = 500
_REFINE_STARTS = 4


@dataclass
class SqueezingEstimate:
    """Certified lower bound ``lower`` for s_D(point).

    The witness is f(w) = matrix @ (premap(w) - base), which maps D into
    the closed unit ball and whose image contains the ball of radius
    ``lower``. Without a premap, base is the point itself.
    """

    point: np.ndarray
    lower: float
    matrix: np.ndarray
    method: str
    premap: object = None

    @property
    def base(self):
        """Point the affine part is centered at (0 after an automorphism)."""
        return self.point if self.premap is None else np.zeros_like(self.point)

    def witness(self, w):
        w = np.asarray(w)
        if self.premap is not None:
            w = self.premap(w)
        return self.matrix @ (w - self.base)

    def to_dict(self):
        return {"point": self.point, "lower": self.lower, "matrix": self.matrix,
                "translation": -self.matrix @ self.base, "method": self.method,
                "automorphism": self.premap is not None}


def _image_support(domain, z, M, U):
    W = U @ np.conj(M)                                # rows are M^H u
    return domain.support(W) - np.real(W @ np.conj(z))


def _unit(x, n):
    u = x[:n] + 1j * x[n:]
    return u / np.linalg.norm(u)


def _refined_extremes(domain, z, M, U):
    """(min H, max H) over the sphere: sampled, then locally refined."""
    n = domain.dim
    H = _image_support(domain, z, M, U)

    def f(x, sign):
        return sign * float(_image_support(domain, z, M, _unit(x, n)[None, :])[0])

    lo, hi = float(H.min()), float(H.max())
    for sign, idx in ((1, np.argsort(H)[:_REFINE_STARTS]), (-1, np.argsort(H)[::-1][:_REFINE_STARTS])):
        for k in idx:
            x0 = np.concatenate([U[k].real, U[k].imag])
            res = optimize.minimize(f, x0, args=(sign,), method="Nelder-Mead",
                                    options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
            if sign > 0:
                lo = min(lo, res.fun)
            else:
                hi = max(hi, -res.fun)
    return lo, hi


def _estimate(domain, z, M, method, U):
    lo, hi = _refined_extremes(domain, z, M, U)
    return SqueezingEstimate(z, min(lo / hi, 1.0), M / hi, method)


def affine_squeeze_lower(domain: Domain, z) -> SqueezingEstimate:
    """d(z)/R(z) with witness (w - z)/R(z)."""
    z = domain.require_interior(z)
    d = domain.boundary_distance(z)
    R = domain.enclosing_radius(z)
    return SqueezingEstimate(z, min(d / R, 1.0), np.eye(domain.dim, dtype=complex) / R, "affine")


def squeeze_optimize(domain: Domain, z, budget=DEFAULT_BUDGET, seed=0,
                     direction_count=2048) -> SqueezingEstimate:
    """Maximize the inscribed/enclosing ratio of M(D - z) over invertible M.

    Starts from the identity and from the diagonal rescaling by the
    coordinate widths; the inner min/max over directions is sampled during
    the search and refined locally for the returned certificate. Never
    returns less than :func:`affine_squeeze_lower`.
    """
    if budget < 1:
        raise InputError("budget must be >= 1")
    z = domain.require_interior(z)
    base = affine_squeeze_lower(domain, z)
    phi = center_automorphism(domain, z)
    if phi is not None:
        c = _center_estimate(domain, budget, seed, direction_count)
        if c.lower >= base.lower:
            return SqueezingEstimate(z, c.lower, c.matrix, "automorphism+" + c.method, phi)
        return base
    est = _optimize_affine(domain, z, budget, seed, direction_count)
    return est if est.lower >= base.lower else base


@functools.lru_cache(maxsize=32)
def _center_estimate(domain, budget, seed, direction_count):
    return _optimize_affine(domain, np.zeros(domain.dim, complex), budget, seed, direction_count)


def _optimize_affine(domain, z, budget, seed, direction_count):
    n = domain.dim
    U = sphere_directions(n, direction_count, seed)
    base = affine_squeeze_lower(domain, z)

    def ratio(M):
        H = _image_support(domain, z, M, U)
        lo = H.min()
        return lo / H.max() if lo > 0 else lo

    E = np.eye(n)
    width = np.array([0.5 * (domain.support(E[i:i + 1])[0] + domain.support(-E[i:i + 1])[0])
                      for i in range(n)])
    starts = [np.eye(n, dtype=complex), np.diag(1.0 / width).astype(complex)]
    best_M = max(starts, key=ratio)

    def pack(M):
        return np.concatenate([M.real.ravel(), M.imag.ravel()])

    def unpack(x):
        return (x[:n * n] + 1j * x[n * n:]).reshape(n, n)

    x0 = pack(best_M / np.linalg.norm(best_M))
    rng = np.random.default_rng(seed)
    simplex = [x0] + [x0 + 0.05 * rng.standard_normal(x0.size) for _ in range(x0.size)]
    res = optimize.minimize(lambda x: -ratio(unpack(x)), x0, method="Nelder-Mead",
                            options={"maxiter": int(budget), "initial_simplex": np.array(simplex),
                                     "xatol": 1e-12, "fatol": 1e-14})
    cand = unpack(res.x) if -res.fun > ratio(best_M) else best_M
    if abs(np.linalg.det(cand)) < 1e-12:
        cand = best_M
    est = _estimate(domain, z, cand, "affine-optimized", U)
    if est.lower < base.lower:
        return SqueezingEstimate(z, base.lower, base.matrix, "affine")
    return est


def verify_witness(domain: Domain, est: SqueezingEstimate, count=2000, seed=0, tol=1e-9):
    """Boundary points land in the closed unit ball; the radius-``lower``
    sphere lies in f(D) (checked through the support function of f(D))."""
    pts = domain.boundary_points(count, seed)
    img = np.array([est.witness(w) for w in pts])
    into_ball = float(np.max(np.linalg.norm(img, axis=1)))
    U = sphere_directions(domain.dim, count, seed + 1)
    # automorphisms preserve the domain, so f(D) = M(D - base)
    H = _image_support(domain, est.base, est.matrix, U)
    covers = float(H.min())
    return {"max_image_norm": into_ball, "min_image_support": covers,
            "passed": bool(into_ball <= 1 + tol and covers >= est.lower - tol)}


def grid_points(domain: Domain, grid_spec):
    """Interior grid for the squeezing constant.

    ``{"pattern": "radial", "rays": k, "levels": m, "extent": e}`` puts m
    points on each of k rays at fractions up to e of the way to the boundary;
    ``{"pattern": "lattice", "per_axis": m, "extent": e}`` is a real lattice
    in [-e M0, e M0]^(2n) restricted to the domain.
    """
    pattern = grid_spec.get("pattern", "radial")
    extent = float(grid_spec.get("extent", 0.9))
    n = domain.dim
    if pattern == "radial":
        rays = int(grid_spec.get("rays", 8))
        levels = int(grid_spec.get("levels", 4))
        fr = np.linspace(0.0, extent, levels + 1)[1:]
        dirs = sphere_directions(n, rays, int(grid_spec.get("seed", 0)))
        z0 = np.zeros(n, complex)
        pts = [z0] + [t * domain.ray_exit(z0, u) * u for u in dirs for t in fr]
    elif pattern == "lattice":
        m = int(grid_spec.get("per_axis", 3))
        M0 = domain.sup_norm
        ax = np.linspace(-extent * M0, extent * M0, m)
        pts = []
        for x in np.array(np.meshgrid(*([ax] * (2 * n)), indexing="ij")).reshape(2 * n, -1).T:
            w = x[:n] + 1j * x[n:]
            if domain.contains(w):
                pts.append(w)
    else:
        raise InputError(f"unknown grid pattern {pattern!r}")
    if not pts:
        raise InputError("grid has no interior points")
    return np.array(pts)


def squeezing_constant_lower(domain: Domain, grid_spec, budget=DEFAULT_BUDGET, seed=0):
    """Infimum over the grid of :func:`squeeze_optimize`; returns (value, estimates)."""
    pts = grid_points(domain, grid_spec)
    ests = [squeeze_optimize(domain, z, budget, seed) for z in pts]
    return min(e.lower for e in ests), ests
