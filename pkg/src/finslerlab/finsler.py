"""Complex Finsler metric models G(z, v) on the holomorphic tangent bundle,
their Levi matrices and the holomorphic sectional curvature of the
Chern-Finsler connection.

Curvature is normalized so that the Poincaré metric |v|^2/(1-|z|^2)^2
on the unit disk has constant curvature -4, i.e.

    K_G(v) = (2/G^2) [ -v^m vbar^n d_m dbar_n G
                       + G^{a bbar} (v^m d_m d_{vbar^b} G)(vbar^n dbar_n d_{v^a} G) ]

This is twice R(v,vbar,v,vbar)/h(v)^2 for a Hermitian metric h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _numdiff
from . import kahler
from .errors import ConfigurationError, DegeneracyError, SlitBundleError
from .geometry import Domain, as_vector, domain_from_dict


@dataclass(frozen=True)
class FinslerDerivatives:
    """Second-order data of G at (z, v) entering the curvature formula.

    value   G(z, v)
    levi    [a, b] = d^2 G / dv^a dvbar^b
    zz      v^m vbar^n d_m dbar_n G            (real)
    zv      [b] = v^m d_m d_{vbar^b} G
    """

    value: float
    levi: np.ndarray
    zz: float
    zv: np.ndarray


class FinslerMetricModel:
    """Base class: G(z, v) with finite-difference derivatives.

    ``domain`` is optional; when given, evaluations outside it raise
    DomainError.
    """

    kind = "generic"
    fd_step = 1e-3

    def __init__(self, dim, domain: Domain | None = None):
        self.dim = int(dim)
        self.domain = domain

    def _point(self, z):
        if self.domain is not None:
            return self.domain.require_interior(z)
        return as_vector(z, self.dim)

    def _tangent(self, v):
        v = as_vector(v, self.dim, name="tangent vector")
        if not np.any(v):
            raise SlitBundleError("G is only smooth on the slit bundle; v must be nonzero")
        return v

    def evaluate(self, z, v):
        raise NotImplementedError

    def __call__(self, z, v):
        z = self._point(z)
        v = as_vector(v, self.dim, name="tangent vector")
        if not np.any(v):
            return 0.0
        return float(self.evaluate(z, v))

    def derivatives(self, z, v) -> FinslerDerivatives:
        z = self._point(z)
        v = self._tangent(v)
        return self._fd_derivatives(z, v)

    def _fd_derivatives(self, z, v):
        n = self.dim
        # Scale v to unit length: G is 2-homogeneous in v, so the data
        # rescale exactly and the FD step stays well matched.
        nv = np.linalg.norm(v)
        u = v / nv

        def f(w):
            return self.evaluate(w[:n], w[n:])

        w = np.concatenate([z, u])
        zi, vi = range(n), range(n, 2 * n)
        mix = _numdiff.wirtinger_mixed(f, w, list(zi) + list(vi), list(zi) + list(vi),
                                       step=self.fd_step, richardson=True)
        levi = mix[n:, n:]
        levi = 0.5 * (levi + levi.conj().T)
        zz = float(np.real(u @ mix[:n, :n] @ np.conj(u)))
        zv = u @ mix[:n, n:]
        return FinslerDerivatives(float(self.evaluate(z, u)) * nv**2, levi,
                                  zz * nv**4, zv * nv**2)

    def fd_derivatives(self, z, v):
        """Finite-difference route, available even when closed forms exist."""
        return self._fd_derivatives(self._point(z), self._tangent(v))

    def to_dict(self):
        raise ConfigurationError(f"{self.kind} models are not serializable")


class ExplicitFamily(FinslerMetricModel):
    """G = r exp(a t + b s), r = |v|^2, t = |z|^2, s = |<z, v>|^2 / r.

    For b = 0 this is the Hermitian metric exp(a|z|^2)|v|^2. For b > 0
    strong pseudoconvexity is guaranteed on a domain with sup|z| = M0 when
    b < 1/M0; ``strict=False`` allows parameters outside that window.
    """

    kind = "explicit-family"

    def __init__(self, a, b, dim, domain: Domain | None = None, strict=True):
        super().__init__(dim, domain)
        self.a = float(a)
        self.b = float(b)
        if not self.a > 0 or self.b < 0:
            raise ConfigurationError("explicit family needs a > 0 and b >= 0")
        if strict and domain is not None and self.b > 0:
            M0 = domain.sup_norm
            if not self.b < 1.0 / M0:
                raise ConfigurationError(
                    f"b = {self.b} outside the pseudoconvexity window b < 1/M0 = {1 / M0:.6g}")

    def evaluate(self, z, v):
        r = np.vdot(v, v).real
        t = np.vdot(z, z).real
        s = abs(np.vdot(v, z)) ** 2 / r
        return r * np.exp(self.a * t + self.b * s)

    def derivatives(self, z, v):
        z = self._point(z)
        v = self._tangent(v)
        a, b = self.a, self.b
        zb, vb = np.conj(z), np.conj(v)
        r = np.vdot(v, v).real
        p = np.vdot(v, z)                          # <z, v> = sum z_i vbar_i
        q = abs(p) ** 2
        G = r * np.exp(a * np.vdot(z, z).real + b * q / r)
        # log-derivatives of G in v and vbar
        Lv = vb / r + b * (p * zb / r - q * vb / r**2)
        Lvb = np.conj(Lv)
        I = np.eye(self.dim)
        Lvv = (I / r - np.outer(vb, v) / r**2
               + b * (np.outer(zb, z) / r - p * np.outer(zb, v) / r**2
                      - np.conj(p) * np.outer(vb, z) / r**2
                      - q * I / r**2 + 2 * q * np.outer(vb, v) / r**3))
        levi = G * (Lvv + np.outer(Lv, Lvb))
        zz = G * ((a + b) * r + (a + b) ** 2 * q)
        zv = G * (a + b) * np.conj(p) * Lvb
        return FinslerDerivatives(float(G), levi, float(zz), zv)

    def to_dict(self):
        d = {"kind": self.kind, "a": self.a, "b": self.b, "dimension": self.dim}
        if self.domain is not None:
            d["domain"] = self.domain.to_dict()
        return d


class HermitianModel(FinslerMetricModel):
    """G = h_{a bbar}(z) v^a vbar^b for a Hermitian metric field h."""

    kind = "hermitian"

    def __init__(self, field: kahler.KahlerMetricField, domain: Domain | None = None):
        super().__init__(field.dim, domain)
        self.field = field

    def evaluate(self, z, v):
        h = self.field.metric(z)
        return float(np.real(v @ h @ np.conj(v)))

    def derivatives(self, z, v):
        z = self._point(z)
        v = self._tangent(v)
        h, dh, ddh = self.field.derivatives(z)
        vb = np.conj(v)
        G = float(np.real(v @ h @ vb))
        zz = float(np.real(np.einsum("klij,k,l,i,j->", ddh, v, vb, v, vb)))
        zv = np.einsum("mib,m,i->b", dh, v, v)
        return FinslerDerivatives(G, h, zz, zv)


class HermitianDiagonal(HermitianModel):
    """G = exp(a|z|^2) sum w_i |v_i|^2; a = 0 with unit weights is flat."""

    kind = "hermitian-diagonal"

    def __init__(self, dim, a=0.0, weights=None, domain: Domain | None = None):
        super().__init__(kahler.ExpConformalField(a, dim, weights), domain)
        self.a = float(a)

    def to_dict(self):
        d = {"kind": self.kind, "a": self.a, "dimension": self.dim,
             "weights": [float(w) for w in self.field.weights]}
        if self.domain is not None:
            d["domain"] = self.domain.to_dict()
        return d


class PoincareModel(HermitianModel):
    """|v|^2 / (1 - |z|^2)^2 on the unit disk (curvature -4)."""

    kind = "poincare"

    def __init__(self, domain: Domain | None = None):
        super().__init__(kahler.poincare_field(), domain)

    def to_dict(self):
        return {"kind": self.kind, "dimension": 1}


class CallableModel(FinslerMetricModel):
    """Arbitrary G given as a callable (z, v) -> float; finite differences only."""

    def __init__(self, func, dim, domain: Domain | None = None):
        super().__init__(dim, domain)
        self.func = func

    def evaluate(self, z, v):
        return float(self.func(z, v))


class SumModel(FinslerMetricModel):
    """sum c_i G_i; every derivative is linear in G."""

    kind = "sum"

    def __init__(self, terms, domain: Domain | None = None):
        terms = [(float(c), m) for c, m in terms]
        super().__init__(terms[0][1].dim, domain)
        self.terms = terms

    def evaluate(self, z, v):
        return sum(c * m.evaluate(z, v) for c, m in self.terms)

    def derivatives(self, z, v):
        z = self._point(z)
        v = self._tangent(v)
        parts = [(c, m.derivatives(z, v)) for c, m in self.terms]
        return FinslerDerivatives(
            sum(c * d.value for c, d in parts),
            sum(c * d.levi for c, d in parts),
            sum(c * d.zz for c, d in parts),
            sum(c * d.zv for c, d in parts))


def model_from_dict(d):
    known = {"kind", "a", "b", "dimension", "domain", "weights", "strict"}
    extra = set(d) - known
    if extra:
        raise ConfigurationError(f"unknown metric-spec fields: {sorted(extra)}")
    kind = d.get("kind")
    domain = domain_from_dict(d["domain"]) if "domain" in d else None
    dim = d.get("dimension", domain.dim if domain is not None else None)
    if kind == "poincare":
        return PoincareModel(domain)
    if dim is None:
        raise ConfigurationError("metric spec needs a dimension or a domain")
    if kind == "explicit-family":
        return ExplicitFamily(d["a"], d.get("b", 0.0), dim, domain, strict=d.get("strict", True))
    if kind == "hermitian-diagonal":
        return HermitianDiagonal(dim, d.get("a", 0.0), d.get("weights"), domain)
    raise ConfigurationError(f"unknown metric kind {kind!r}")


# -- operations ----------------------------------------------------------

def eval_G(model: FinslerMetricModel, z, v) -> float:
    return model(z, v)


def levi_matrix(model: FinslerMetricModel, z, v) -> np.ndarray:
    return model.derivatives(z, v).levi


def strong_pseudoconvexity_check(model: FinslerMetricModel, domain: Domain,
                                 sample_count=1000, seed=0, tolerance=1e-10):
    """Smallest Levi eigenvalue over seeded samples of the slit bundle.

    The domain's base point 0 is always the first sample.
    """
    if sample_count < 1:
        raise ConfigurationError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    pts = domain.sample_interior(sample_count, seed=int(rng.integers(2**31)))
    pts[0] = 0.0
    vs = rng.standard_normal((sample_count, model.dim)) + 1j * rng.standard_normal(
        (sample_count, model.dim))
    worst = (np.inf, None, None)
    for z, v in zip(pts, vs):
        lam = float(np.linalg.eigvalsh(levi_matrix(model, z, v))[0])
        if lam < worst[0]:
            worst = (lam, z, v)
    return {"min_eigenvalue": worst[0], "worst_point": worst[1], "worst_vector": worst[2],
            "samples": sample_count, "seed": seed, "passed": bool(worst[0] > tolerance)}


def curvature_from_derivatives(d: FinslerDerivatives) -> float:
    try:
        cond = np.linalg.cond(d.levi)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e13:
        raise DegeneracyError(f"Levi matrix is singular (cond={cond:.3g})")
    # (u_a) = conj(w_a); w^T A^{-1} conj(w) >= 0 for A > 0
    corr = np.real(d.zv @ np.linalg.solve(d.levi, np.conj(d.zv)))
    return float(2.0 / d.value**2 * (-d.zz + corr))


def hsc_chern_finsler(model: FinslerMetricModel, z, v) -> float:
    return curvature_from_derivatives(model.derivatives(z, v))


def hsc_chern_finsler_fd(model: FinslerMetricModel, z, v) -> float:
    return curvature_from_derivatives(model.fd_derivatives(z, v))


# -- disc lower bounds ---------------------------------------------------

_CIRCLE = np.exp(2j * np.pi * np.arange(64) / 64)


def disc_laplacian(f, eps):
    """d dbar f at 0 of a real function on a neighbourhood of 0 in C.

    The circle mean of f minus f(0) is eps^2 d dbar f + O(eps^4); two radii
    cancel the eps^4 term.
    """
    f0 = f(0.0)
    m1 = np.mean([f(eps * w) for w in _CIRCLE]) - f0
    m2 = np.mean([f(2 * eps * w) for w in _CIRCLE]) - f0
    return (16 * m1 - m2) / (12 * eps**2)


def disc_curvature(model: FinslerMetricModel, z, v, c=None, eps=None):
    """Gaussian curvature at 0 of phi^*G for phi(zeta) = z + zeta v + zeta^2 c.

    Uses K = -(2/g) d dbar log g, which gives -4 for the Poincaré metric.
    """
    z = as_vector(z, model.dim)
    v = as_vector(v, model.dim)
    c = np.zeros(model.dim, complex) if c is None else as_vector(c, model.dim)
    if eps is None:
        reach = model.domain.boundary_distance(z) if model.domain is not None else 1.0
        eps = 1e-2 * min(reach, 1.0) / max(np.linalg.norm(v), np.linalg.norm(c), 1e-300)

    def logg(zeta):
        return np.log(model.evaluate(z + zeta * v + zeta**2 * c, v + 2 * zeta * c))

    return float(-2.0 * disc_laplacian(logg, eps) / model.evaluate(z, v))


def hsc_disc_lower(model: FinslerMetricModel, z, v, disc_degree=1):
    """Curvature of G pulled back by a holomorphic disc tangent to v at z.

    Degree 1 uses the linear disc zeta -> z + zeta v. Degree >= 2
    maximizes over the quadratic coefficient; the pullback curvature at 0
    depends only on the 2-jet of the disc, so higher degrees add nothing.
    Every disc gives a lower bound for hsc_chern_finsler(z, v).
    """
    z = model._point(z)
    v = model._tangent(v)
    v = v / np.linalg.norm(v)
    base = disc_curvature(model, z, v)
    if disc_degree < 2:
        return base
    n = model.dim
    reach = model.domain.boundary_distance(z) if model.domain is not None else 1.0

    def neg(x):
        c = x[:n] + 1j * x[n:]
        # keep phi(|zeta| <= eps') well inside the domain
        try:
            return -disc_curvature(model, z, v, c, eps=1e-2 * min(reach, 1.0) / max(
                1.0, np.linalg.norm(c)))
        except (FloatingPointError, ValueError, DegeneracyError):
            return np.inf

    res = optimize.minimize(neg, np.zeros(2 * n), method="Nelder-Mead",
                            options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 400 * n})
    return float(max(base, -res.fun))
