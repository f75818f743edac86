"""Bounded domains in C^n and their Euclidean primitives.

Every domain is stored in recentered coordinates: ``offset`` is the point
of the original coordinates that becomes the origin, so that 0 is always
interior. All operations take and return recentered coordinates; use
:meth:`Domain.to_original` / :meth:`Domain.from_original` at the edges.

Complex vectors are 1-d ``complex`` numpy arrays. The Hermitian product is
``<a, b> = sum a_i conj(b_i)``.
"""

from __future__ import annotations

import functools
import warnings

import numpy as np
from scipy import optimize
from scipy.stats import norm, qmc

from .errors import ConfigurationError, DomainError, InputError

BOUNDARY_TOL = 1e-10
BOUNDARY_MAXITER = 10_000
DEFAULT_DIRECTIONS = 4096


def inner(a, b):
    return np.vdot(b, a)


def as_vector(x, n=None, name="point"):
    """Coerce to a finite complex vector, checking the dimension."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if x.ndim != 1:
        raise InputError(f"{name} must be a 1-d complex vector")
    if n is not None and x.size != n:
        raise InputError(f"{name} has dimension {x.size}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} has non-finite entries")
    return x


def nonzero_vector(v, n=None):
    v = as_vector(v, n, name="tangent vector")
    if not np.any(v):
        raise InputError("tangent vector must be nonzero")
    return v


@functools.lru_cache(maxsize=32)
def _sphere_directions(n, count, seed):
    sampler = qmc.Sobol(d=2 * n, scramble=True, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        u = sampler.random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    out = g[:, :n] + 1j * g[:, n:]
    out.setflags(write=False)
    return out


def sphere_directions(n, count=DEFAULT_DIRECTIONS, seed=0):
    """Deterministic low-discrepancy unit vectors in C^n (rows)."""
    return _sphere_directions(int(n), int(count), int(seed))


def random_directions(n, count, rng):
    g = rng.standard_normal((count, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, :n] + 1j * g[:, n:]


def _weighted_quadratic_exit(z, u, w):
    """Largest t >= 0 with sum w |z + t u|^2 = 1 (z inside)."""
    A = np.sum(w * np.abs(u) ** 2)
    B = np.sum(w * (z * np.conj(u)).real)
    C = np.sum(w * np.abs(z) ** 2) - 1.0
    return (-B + np.sqrt(max(B * B - A * C, 0.0))) / A


class Domain:
    """Base class. Subclasses fill in the geometric oracles."""

    kind = "abstract"

    def __init__(self, dim, center=None):
        self.dim = int(dim)
        if self.dim < 1:
            raise InputError("dimension must be >= 1")
        self.offset = np.zeros(self.dim, complex) if center is None else as_vector(center, self.dim)

    # -- coordinates --------------------------------------------------
    def point(self, z):
        return as_vector(z, self.dim)

    def to_original(self, z):
        return self.point(z) + self.offset

    def from_original(self, w):
        return self.point(w) - self.offset

    def require_interior(self, z):
        z = self.point(z)
        if not self.contains(z):
            raise DomainError(f"point {z} is not interior to the {self.kind}")
        return z

    # -- oracles ------------------------------------------------------
    def contains(self, z):
        raise NotImplementedError

    def contains_many(self, Z):
        """Boolean mask over the rows of ``Z``."""
        return np.array([self.contains(z) for z in Z], dtype=bool)

    def support(self, u):
        """sup over w in D of Re<w, u>; vectorized over rows of ``u``."""
        raise NotImplementedError

    def ray_exit(self, z, u):
        """t > 0 where z + t u meets the boundary (z interior, u != 0)."""
        raise NotImplementedError

    def boundary_distance(self, z):
        raise NotImplementedError

    def enclosing_radius(self, z):
        raise NotImplementedError

    def radial_extent(self, z, v):
        """sup{r : z + zeta v in D for all |zeta| < r}."""
        z = self.require_interior(z)
        v = nonzero_vector(v, self.dim)
        return self._circle_extent(z, v)

    def _circle_extent(self, z, v, count=256):
        thetas = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
        vals = np.array([self.ray_exit(z, np.exp(1j * th) * v) for th in thetas])
        k = int(np.argmin(vals))
        dth = thetas[1] - thetas[0]
        res = optimize.minimize_scalar(
            lambda th: self.ray_exit(z, np.exp(1j * th) * v),
            bounds=(thetas[k] - dth, thetas[k] + dth), method="bounded",
            options={"xatol": 1e-12})
        return float(min(vals[k], res.fun))

    @property
    def sup_norm(self):
        """M_0 = sup of ||w|| over the (recentered) domain."""
        return self.enclosing_radius(np.zeros(self.dim, complex))

    @property
    def balanced(self):
        """True when D is circular and convex about 0 (then l(D) is a disc)."""
        return False

    def boundary_points(self, count, seed=0):
        dirs = sphere_directions(self.dim, count, seed)
        z0 = np.zeros(self.dim, complex)
        return np.array([self.ray_exit(z0, u) * u for u in dirs])

    def sample_interior(self, count, seed=0, max_fraction=0.9):
        """Random interior points, uniform in the radial shells of D."""
        rng = np.random.default_rng(seed)
        dirs = random_directions(self.dim, count, rng)
        rho = max_fraction * rng.random(count) ** (1.0 / (2 * self.dim))
        z0 = np.zeros(self.dim, complex)
        return np.array([r * self.ray_exit(z0, u) * u for r, u in zip(rho, dirs)])

    def to_dict(self):
        d = {"kind": self.kind, "dimension": self.dim, "parameters": self._params()}
        if np.any(self.offset):
            d["recentering"] = [[float(c.real), float(c.imag)] for c in self.offset]
        return d

    def _params(self):
        raise ConfigurationError(f"{self.kind} domains are not serializable")

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, {self._repr_params()})"

    def _repr_params(self):
        return ""


class Ball(Domain):
    kind = "ball"

    def __init__(self, radius=1.0, dim=1, center=None):
        super().__init__(dim, center)
        self.radius = float(radius)
        if not self.radius > 0:
            raise InputError("ball radius must be positive")

    def _repr_params(self):
        return f"radius={self.radius}"

    def _params(self):
        return {"radius": self.radius}

    @property
    def balanced(self):
        return True

    def contains(self, z):
        return bool(np.linalg.norm(self.point(z)) < self.radius)

    def contains_many(self, Z):
        return np.linalg.norm(Z, axis=-1) < self.radius

    def support(self, u):
        return self.radius * np.linalg.norm(np.atleast_2d(u), axis=-1).reshape(np.shape(u)[:-1])

    def ray_exit(self, z, u):
        return _weighted_quadratic_exit(z, u, np.full(self.dim, self.radius**-2))

    def boundary_distance(self, z):
        return self.radius - np.linalg.norm(self.require_interior(z))

    def enclosing_radius(self, z):
        return self.radius + np.linalg.norm(self.require_interior(z))

    def radial_extent(self, z, v):
        z = self.require_interior(z) / self.radius
        v = nonzero_vector(v, self.dim) / self.radius
        p = abs(inner(z, v))
        vv = np.vdot(v, v).real
        return float((-p + np.sqrt(p * p + vv * (1 - np.vdot(z, z).real))) / vv)

    def boundary_points(self, count, seed=0):
        return self.radius * np.array(sphere_directions(self.dim, count, seed))


class Polydisk(Domain):
    kind = "polydisk"

    def __init__(self, radii, center=None):
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        super().__init__(radii.size, center)
        if np.any(radii <= 0):
            raise InputError("polydisk radii must be positive")
        self.radii = radii

    def _repr_params(self):
        return f"radii={self.radii.tolist()}"

    def _params(self):
        return {"radii": self.radii.tolist()}

    @property
    def balanced(self):
        return True

    def contains(self, z):
        return bool(np.all(np.abs(self.point(z)) < self.radii))

    def contains_many(self, Z):
        return np.all(np.abs(Z) < self.radii, axis=-1)

    def support(self, u):
        return np.sum(self.radii * np.abs(np.atleast_2d(u)), axis=-1).reshape(np.shape(u)[:-1])

    def ray_exit(self, z, u):
        ts = [_weighted_quadratic_exit(z[i:i + 1], u[i:i + 1], np.array([self.radii[i] ** -2]))
              for i in range(self.dim) if u[i] != 0]
        return min(ts)

    def boundary_distance(self, z):
        z = self.require_interior(z)
        return float(np.min(self.radii - np.abs(z)))

    def enclosing_radius(self, z):
        z = self.require_interior(z)
        return float(np.linalg.norm(self.radii + np.abs(z)))

    def radial_extent(self, z, v):
        z = self.require_interior(z)
        v = nonzero_vector(v, self.dim)
        m = np.abs(v) > 0
        return float(np.min((self.radii[m] - np.abs(z[m])) / np.abs(v[m])))


class ComplexEllipsoid(Domain):
    """{ sum |z_i|^2 / a_i^2 < 1 }, the image of the unit ball under diag(a)."""

    kind = "ellipsoid"

    def __init__(self, semiaxes, center=None):
        a = np.atleast_1d(np.asarray(semiaxes, dtype=float))
        super().__init__(a.size, center)
        if np.any(a <= 0):
            raise InputError("ellipsoid semiaxes must be positive")
        self.semiaxes = a

    def _repr_params(self):
        return f"semiaxes={self.semiaxes.tolist()}"

    def _params(self):
        return {"semiaxes": self.semiaxes.tolist()}

    @property
    def balanced(self):
        return True

    def contains(self, z):
        return bool(np.sum(np.abs(self.point(z)) ** 2 / self.semiaxes**2) < 1)

    def contains_many(self, Z):
        return np.sum(np.abs(Z) ** 2 / self.semiaxes**2, axis=-1) < 1

    def support(self, u):
        return np.linalg.norm(self.semiaxes * np.atleast_2d(u), axis=-1).reshape(np.shape(u)[:-1])

    def ray_exit(self, z, u):
        return _weighted_quadratic_exit(z, u, self.semiaxes**-2)

    def radial_extent(self, z, v):
        z = self.require_interior(z)
        v = nonzero_vector(v, self.dim)
        return Ball(1.0, self.dim).radial_extent(z / self.semiaxes, v / self.semiaxes)

    def boundary_distance(self, z):
        return self._extremal_distances(self.require_interior(z))[0]

    def enclosing_radius(self, z):
        return self._extremal_distances(self.require_interior(z))[1]

    def _extremal_distances(self, y):
        """(min, max) of |x - y| over the boundary, from all Lagrange critical points.

        Critical points are x_i = a_i^2 y_i / (a_i^2 + lam) with lam a root of
        the secular function, plus the degenerate families lam = -a_g^2 for
        axis groups g on which y vanishes.
        """
        a = self.semiaxes
        groups = np.unique(a)[::-1]
        ymag = np.array([np.sum(np.abs(y[a == g]) ** 2) for g in groups])
        live = ymag > 1e-300
        poles = -groups[live] ** 2

        def secular(lam):
            return np.sum(groups[live] ** 2 * ymag[live] / (groups[live] ** 2 + lam) ** 2) - 1.0

        def dist_at(lam):
            x = a**2 * y / (a**2 + lam)
            return np.linalg.norm(x - y)

        cands = []
        if poles.size:
            # poles ascend since groups descend in size
            span = 1.0 + np.max(np.abs(poles)) + np.sum(groups[live] * np.sqrt(ymag[live]))
            edges = [poles[0] - 4 * span] + list(poles) + [poles[-1] + 4 * span]
            for k in range(len(edges) - 1):
                lo, hi = edges[k], edges[k + 1]
                eps = 1e-14 * max(1.0, abs(lo), abs(hi))
                left_pole = k > 0
                right_pole = k < len(edges) - 2
                if left_pole and right_pole:
                    res = optimize.minimize_scalar(secular, bounds=(lo + eps, hi - eps),
                                                   method="bounded", options={"xatol": 1e-14})
                    if res.fun < 0:
                        for a_, b_ in ((lo + eps, res.x), (res.x, hi - eps)):
                            if secular(a_) * secular(b_) < 0:
                                cands.append(dist_at(optimize.brentq(secular, a_, b_, xtol=1e-15, rtol=1e-15)))
                else:
                    a_ = lo if not left_pole else lo + eps
                    b_ = hi if not right_pole else hi - eps
                    while secular(a_) * secular(b_) > 0 and not left_pole:
                        a_ -= 4 * abs(a_) + 1.0
                    while secular(a_) * secular(b_) > 0 and not right_pole:
                        b_ += 4 * abs(b_) + 1.0
                    if secular(a_) * secular(b_) < 0:
                        cands.append(dist_at(optimize.brentq(secular, a_, b_, xtol=1e-15, rtol=1e-15)))
        for g, alive in zip(groups, live):
            if alive:
                continue
            rest = a != g
            x_rest = a[rest] ** 2 * y[rest] / (a[rest] ** 2 - g**2)
            m = 1.0 - np.sum(np.abs(x_rest) ** 2 / a[rest] ** 2)
            if m >= 0:
                cands.append(np.sqrt(np.sum(np.abs(x_rest - y[rest]) ** 2) + g**2 * m))
        if not cands:
            raise DomainError("no boundary critical point found")
        return float(min(cands)), float(max(cands))


class ConvexSmooth(Domain):
    """Convex domain {rho < 0} given by oracles.

    Parameters
    ----------
    rho : callable
        Defining function, negative inside, smooth near the boundary.
    dim : int
    support : callable, optional
        Support function h(u) = sup Re<w, u>; required for enclosing radii.
    grad : callable, optional
        Real gradient of rho as a complex vector (d rho/dx + i d rho/dy).
        Finite differences are used when absent.
    family : dict, optional
        Serializable description (``{"name": "lp", ...}``) for file round trips.
    vectorized_support : bool
        When true, ``support`` and ``rho`` accept an (m, n) array and
        return m values.
    """

    kind = "convex"

    def __init__(self, rho, dim, support=None, grad=None, center=None, family=None,
                 direction_count=DEFAULT_DIRECTIONS, vectorized_support=False):
        super().__init__(dim, center)
        self.rho = rho
        self._support = support
        self._grad = grad
        self.family = family
        self.direction_count = int(direction_count)
        self.vectorized_support = bool(vectorized_support)
        if not rho(np.zeros(self.dim, complex)) < 0:
            raise InputError("defining function must be negative at the origin")

    def _repr_params(self):
        return f"family={self.family}"

    def _params(self):
        if self.family is None:
            return super()._params()
        return dict(self.family)

    @property
    def balanced(self):
        return bool(self.family is not None and self.family.get("name") == "lp")

    def contains(self, z):
        return bool(self.rho(self.point(z)) < 0)

    def contains_many(self, Z):
        if self.vectorized_support:
            return np.asarray(self.rho(np.asarray(Z))) < 0
        return super().contains_many(Z)

    def support(self, u):
        if self._support is None:
            raise ConfigurationError("this convex domain has no support oracle")
        u2 = np.atleast_2d(u)
        if self.vectorized_support:
            h = np.asarray(self._support(u2), dtype=float)
        else:
            h = np.array([self._support(row) for row in u2], dtype=float)
        if not np.all(np.isfinite(h)):
            raise ConfigurationError("support oracle returned a non-finite value (unbounded domain?)")
        return h.reshape(np.shape(u)[:-1])

    def gradient(self, x):
        if self._grad is not None:
            return np.asarray(self._grad(x), dtype=complex)
        from ._numdiff import wirtinger_gradient
        _, dbar = wirtinger_gradient(self.rho, x, step=1e-6)
        return 2 * dbar

    def _t_max(self, z, u):
        if self._support is not None:
            bound = self.support(np.array([u]))[0] / 1.0 + np.linalg.norm(z) * np.linalg.norm(u)
            return 2.0 * bound / np.vdot(u, u).real + 1e-12
        t = 1.0
        while self.rho(z + t * u) < 0:
            t *= 2.0
            if t > 1e12:
                raise ConfigurationError("ray never leaves the domain (unbounded?)")
        return t

    def ray_exit(self, z, u):
        hi = self._t_max(z, u)
        return optimize.brentq(lambda t: self.rho(z + t * u), 0.0, hi, xtol=1e-15, rtol=1e-12)

    def boundary_distance(self, z):
        """Projected gradient on the ray direction until it aligns with the normal."""
        z = self.require_interior(z)
        dirs = sphere_directions(self.dim, 256)
        ts = np.array([self.ray_exit(z, u) for u in dirs])
        u = dirs[int(np.argmin(ts))].copy()
        best = float(ts.min())
        for _ in range(BOUNDARY_MAXITER):
            x = z + self.ray_exit(z, u) * u
            nrm = self.gradient(x)
            nrm = nrm / np.linalg.norm(nrm)
            if np.linalg.norm(nrm - u) < BOUNDARY_TOL:
                break
            u = 0.5 * (u + nrm)
            u /= np.linalg.norm(u)
        return float(min(best, self.ray_exit(z, u)))

    def enclosing_radius(self, z):
        """max over unit u of h(u) - Re<z, u>: sampled, then locally refined."""
        z = self.require_interior(z)
        dirs = sphere_directions(self.dim, self.direction_count)
        vals = self.support(dirs) - np.real(dirs @ np.conj(z))
        k = int(np.argmax(vals))

        def neg(x):
            u = x[: self.dim] + 1j * x[self.dim:]
            u = u / np.linalg.norm(u)
            return -(self.support(np.array([u]))[0] - inner(z, u).real)

        x0 = np.concatenate([dirs[k].real, dirs[k].imag])
        res = optimize.minimize(neg, x0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        return float(max(vals[k], -res.fun))


def lp_domain(exponent, radii, center=None):
    """Smooth convex Reinhardt domain sum (|z_i|/r_i)^p < 1, p >= 2.

    The support function has the closed Hoelder form (sum (r_i |u_i|)^q)^(1/q).
    """
    p = float(exponent)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if p < 2:
        raise InputError("lp exponent must be >= 2 for a smooth convex domain")
    q = p / (p - 1)

    def rho(z):
        return np.sum((np.abs(z) / radii) ** p, axis=-1) - 1.0

    def grad(z):
        m = np.abs(z)
        with np.errstate(invalid="ignore", divide="ignore"):
            phase = np.where(m > 0, z / np.where(m > 0, m, 1), 0)
        return p * m ** (p - 1) / radii**p * phase

    def support(u):
        return np.sum((radii * np.abs(u)) ** q, axis=-1) ** (1 / q)

    fam = {"name": "lp", "exponent": p, "radii": radii.tolist()}
    return ConvexSmooth(rho, radii.size, support=support, grad=grad, center=center, family=fam,
                        vectorized_support=True)


def domain_from_dict(d):
    """Inverse of :meth:`Domain.to_dict`."""
    try:
        kind = d["kind"]
        params = d.get("parameters", {})
        dim = int(d["dimension"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed domain spec: {exc}") from None
    unknown = set(d) - {"kind", "dimension", "parameters", "recentering"}
    if unknown:
        raise InputError(f"unknown domain-spec fields: {sorted(unknown)}")
    center = None
    if d.get("recentering") is not None:
        center = np.array([complex(re, im) for re, im in d["recentering"]])
    if kind == "ball":
        dom = Ball(params.get("radius", 1.0), dim, center)
    elif kind == "polydisk":
        dom = Polydisk(params["radii"], center)
    elif kind == "ellipsoid":
        dom = ComplexEllipsoid(params["semiaxes"], center)
    elif kind == "convex" and params.get("name") == "lp":
        dom = lp_domain(params["exponent"], params["radii"], center)
    else:
        raise InputError(f"unknown domain kind {kind!r}")
    if dom.dim != dim:
        raise InputError(f"dimension {dim} disagrees with parameters ({dom.dim})")
    return dom


def unit_disk():
    return Ball(1.0, 1)


# -- automorphisms of the model domains -----------------------------------

def ball_automorphism(a, w):
    """Involutive automorphism of the unit ball exchanging a and 0."""
    a = np.asarray(a, dtype=complex)
    w = np.asarray(w, dtype=complex)
    aa = float(np.vdot(a, a).real)
    if aa == 0:
        return -w
    wa = inner(w, a)
    Pw = wa / aa * a
    return (a - Pw - np.sqrt(1 - aa) * (w - Pw)) / (1 - wa)


def disk_mobius(a, w):
    """(a - w)/(1 - conj(a) w): unit-disk involution exchanging a and 0."""
    return (a - w) / (1 - np.conj(a) * w)


def center_automorphism(domain, z):
    """Automorphism of a model domain sending z to 0, or None.

    Balls and ellipsoids go through the unit ball, polydisks act
    coordinatewise by Möbius maps.
    """
    z = domain.require_interior(z)
    if isinstance(domain, Ball):
        r = domain.radius
        return lambda w: r * ball_automorphism(z / r, np.asarray(w) / r)
    if isinstance(domain, ComplexEllipsoid):
        s = domain.semiaxes
        return lambda w: s * ball_automorphism(z / s, np.asarray(w) / s)
    if isinstance(domain, Polydisk):
        r = domain.radii
        return lambda w: r * disk_mobius(z / r, np.asarray(w) / r)
    return None
