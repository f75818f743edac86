"""Bergman kernels (closed form on model domains, orthonormal monomial
bases elsewhere), the Bergman metric, its curvatures, the two-sided
squeezing bracket for those curvatures, and the kernel growth check.

Curvatures here use Sec = R(v,vbar,v,vbar)/g(v)^2, so the unit-disk
Bergman metric 2/(1-|z|^2)^2 has Sec = -1. The finsler module reports
twice this value.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import kahler
from .errors import ConfigurationError, DegeneracyError, InputError, UnsupportedDomainError
from .geometry import Ball, ComplexEllipsoid, ConvexSmooth, Domain, Polydisk, as_vector, \
    domain_from_dict, nonzero_vector
from .reporting import delimited


# -- closed forms --------------------------------------------------------

def closed_form_kernel(domain: Domain, z) -> float:
    z = domain.require_interior(z)
    n = domain.dim
    if isinstance(domain, Ball):
        t = np.vdot(z, z).real / domain.radius**2
        return math.factorial(n) / (np.pi**n * domain.radius ** (2 * n)) * (1 - t) ** (-(n + 1))
    if isinstance(domain, Polydisk):
        r = domain.radii
        return float(np.prod(1.0 / (np.pi * r**2 * (1 - np.abs(z / r) ** 2) ** 2)))
    if isinstance(domain, ComplexEllipsoid):
        a = domain.semiaxes
        t = float(np.sum(np.abs(z / a) ** 2))
        return math.factorial(n) / (np.pi**n * np.prod(a**2)) * (1 - t) ** (-(n + 1))
    raise UnsupportedDomainError(f"no closed-form Bergman kernel for {domain.kind}")


def closed_form_field(domain: Domain) -> kahler.KahlerMetricField:
    """Bergman metric field d dbar log K for ball, polydisk and ellipsoid."""
    n = domain.dim
    if isinstance(domain, Ball):
        return kahler.ball_bergman_field(n, domain.radius)
    if isinstance(domain, ComplexEllipsoid):
        return kahler.RadialPotential(kahler.log_radial(n + 1), domain.semiaxes**-2.0)
    if isinstance(domain, Polydisk):
        parts = []
        for i, r in enumerate(domain.radii):
            w = np.zeros(n)
            w[i] = r**-2.0
            parts.append(kahler.RadialPotential(kahler.log_radial(2), w))
        return parts[0] if n == 1 else kahler.SumField(parts)
    raise UnsupportedDomainError(f"no closed-form Bergman metric for {domain.kind}")


# -- monomials -----------------------------------------------------------

def monomial_exponents(n, max_degree):
    """All multi-indices of total degree <= max_degree, graded then lexicographic."""
    out = []
    for deg in range(max_degree + 1):
        for combo in itertools.product(range(deg + 1), repeat=n):
            if sum(combo) == deg:
                out.append(combo)
    return np.array(sorted(out, key=lambda a: (sum(a), [-x for x in a])), dtype=int).reshape(-1, n)


def monomials(exps, z):
    """Values, first and second holomorphic derivatives of z^a for each row a."""
    z = np.asarray(z, dtype=complex)
    m, n = exps.shape
    top = int(exps.max(initial=0))
    powers = np.ones((n, top + 1), dtype=complex)
    for k in range(1, top + 1):
        powers[:, k] = powers[:, k - 1] * z

    def pw(i, e):
        return np.where(e >= 0, powers[i, np.clip(e, 0, top)], 0.0)

    vals = np.ones(m, dtype=complex)
    for i in range(n):
        vals = vals * pw(i, exps[:, i])
    d1 = np.zeros((n, m), dtype=complex)
    d2 = np.zeros((n, n, m), dtype=complex)
    for k in range(n):
        e = exps.copy()
        coef = e[:, k].astype(float)
        e[:, k] -= 1
        term = coef.astype(complex)
        for i in range(n):
            term = term * pw(i, e[:, i])
        d1[k] = term
        for l in range(n):
            e2 = e.copy()
            coef2 = coef * e2[:, l]
            e2[:, l] -= 1
            term2 = coef2.astype(complex)
            for i in range(n):
                term2 = term2 * pw(i, e2[:, i])
            d2[k, l] = term2
    return vals, d1, d2


# -- quadrature ----------------------------------------------------------

DEFAULT_QMC_POINTS = 2**16


def _reinhardt_profile(domain: Domain):
    """R_max(omega) for omega on the positive orthant of the unit sphere, or None."""
    if isinstance(domain, Ball):
        return lambda w: domain.radius
    if isinstance(domain, ComplexEllipsoid):
        a = domain.semiaxes
        return lambda w: float(np.sum((w / a) ** 2) ** -0.5)
    if isinstance(domain, ConvexSmooth) and domain.family and domain.family.get("name") == "lp":
        p = domain.family["exponent"]
        r = np.asarray(domain.family["radii"])
        return lambda w: float(np.sum((w / r) ** p) ** (-1.0 / p))
    return None


def _orthant_sphere_rule(n, nodes):
    """Gauss-Legendre nodes/weights for the positive orthant of S^{n-1}."""
    if n == 1:
        return np.ones((1, 1)), np.ones(1)
    x, wx = np.polynomial.legendre.leggauss(nodes)
    psi = 0.25 * np.pi * (x + 1)
    wpsi = 0.25 * np.pi * wx
    pts, wts = [], []
    for idx in itertools.product(range(nodes), repeat=n - 1):
        ang = psi[list(idx)]
        w = float(np.prod(wpsi[list(idx)]))
        omega = np.empty(n)
        s = 1.0
        for k in range(n - 1):
            omega[k] = s * np.cos(ang[k])
            w *= np.sin(ang[k]) ** (n - 2 - k) if k < n - 2 else 1.0
            s *= np.sin(ang[k])
        omega[n - 1] = s
        pts.append(omega)
        wts.append(w)
    return np.array(pts), np.array(wts)


def reinhardt_moments(domain: Domain, exps, nodes=48):
    """||z^a||^2 over a Reinhardt domain, one value per row of ``exps``.

    Radial integrals are done exactly; the orthant-sphere angles use
    tensor Gauss-Legendre. Polydisks use a per-variable Gauss-Legendre rule
    in the moduli.
    """
    n = domain.dim
    exps = np.asarray(exps)
    if isinstance(domain, Polydisk):
        x, wx = np.polynomial.legendre.leggauss(max(nodes, int(exps.max(initial=0)) + 2))
        out = np.ones(len(exps))
        for i, r in enumerate(domain.radii):
            rho = 0.5 * r * (x + 1)
            w = 0.5 * r * wx
            table = np.array([np.sum(w * rho ** (2 * k + 1)) for k in range(exps[:, i].max() + 1)])
            out *= 2 * np.pi * table[exps[:, i]]
        return out
    prof = _reinhardt_profile(domain)
    if prof is None:
        raise UnsupportedDomainError(f"{domain.kind} is not a supported Reinhardt domain")
    omegas, wts = _orthant_sphere_rule(n, nodes)
    R = np.array([prof(w) for w in omegas])
    out = np.empty(len(exps))
    for j, a in enumerate(exps):
        p = 2 * int(a.sum()) + 2 * n
        ang = np.prod(omegas ** (2 * a + 1), axis=1)
        out[j] = (2 * np.pi) ** n * np.sum(wts * ang * R**p / p)
    return out


def _qmc_gram(domain: Domain, exps, points=DEFAULT_QMC_POINTS, seed=0):
    """Full Gram matrix by rejection-weighted scrambled Sobol quadrature."""
    n = domain.dim
    M = domain.sup_norm
    sob = qmc.Sobol(2 * n, scramble=True, seed=seed)
    x = (2 * sob.random(points) - 1) * M
    zs = x[:, :n] + 1j * x[:, n:]
    inside = np.array([domain.contains(z) for z in zs])
    zs = zs[inside]
    vol = (2 * M) ** (2 * n) / points
    V = np.array([monomials(exps, z)[0] for z in zs])
    return vol * (V.T @ np.conj(V))


# -- numerical kernel model ---------------------------------------------

@dataclass
class BergmanKernelModel:
    """Closed-form or numerical Bergman kernel of a domain.

    For the numerical kind, ``coefficients[i]`` holds the monomial
    coefficients of the i-th orthonormal basis function.
    """

    kind: str
    domain: Domain
    max_degree: int = 0
    exponents: np.ndarray | None = None
    coefficients: np.ndarray | None = None
    quadrature: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def basis(self, z):
        vals, d1, d2 = monomials(self.exponents, z)
        C = self.coefficients
        return C @ vals, d1 @ C.T, d2 @ C.T

    def kernel_diag(self, z) -> float:
        if self.kind == "closed-form":
            return closed_form_kernel(self.domain, z)
        z = self.domain.require_interior(z)
        f = self.basis(z)[0]
        return float(np.real(np.vdot(f, f)))

    def metric_field(self) -> kahler.KahlerMetricField:
        if self.kind == "closed-form":
            return closed_form_field(self.domain)
        return kahler.LogSumSquares(self.basis, self.domain.dim)

    def gram_residual(self):
        """max |<f_i, f_j> - delta_ij| re-measured with the build quadrature."""
        if self.kind == "closed-form":
            return 0.0
        G = _gram(self.domain, self.exponents, self.quadrature)
        C = self.coefficients
        return float(np.max(np.abs(C @ G @ C.conj().T - np.eye(len(C)))))

    # cache file
    def to_dict(self):
        if self.kind != "numerical":
            raise ConfigurationError("only numerical kernels are cached")
        dom = self.domain.to_dict()
        return {
            "domain": dom,
            "domain_hash": domain_hash(dom),
            "degree": self.max_degree,
            "exponents": self.exponents.tolist(),
            "coefficients": [[[float(c.real), float(c.imag)] for c in row]
                             for row in self.coefficients],
            "quadrature": self.quadrature,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d):
        dom = domain_from_dict(d["domain"])
        if domain_hash(d["domain"]) != d.get("domain_hash"):
            raise ConfigurationError("kernel cache domain hash mismatch")
        coeffs = np.array([[complex(a, b) for a, b in row] for row in d["coefficients"]])
        exps = np.array(d["exponents"], dtype=int).reshape(-1, dom.dim)
        return cls("numerical", dom, int(d["degree"]), exps, coeffs.reshape(-1, len(exps)),
                   dict(d["quadrature"]), list(d.get("warnings", [])))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def domain_hash(domain_dict):
    blob = json.dumps(domain_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def closed_form_kernel_model(domain: Domain) -> BergmanKernelModel:
    closed_form_kernel(domain, np.zeros(domain.dim))  # raises if unsupported
    return BergmanKernelModel("closed-form", domain)


def _gram(domain, exps, quad):
    if quad.get("method") == "qmc":
        return _qmc_gram(domain, exps, quad.get("points", DEFAULT_QMC_POINTS), quad.get("seed", 0))
    return np.diag(reinhardt_moments(domain, exps, quad.get("nodes", 48))).astype(complex)


def _inner(G, a, b):
    return a @ G @ np.conj(b)


def build_numerical_kernel(domain: Domain, max_degree, quadrature_spec=None,
                           drop_tol=1e-10) -> BergmanKernelModel:
    """Orthonormalize the monomials of degree <= max_degree in L^2(domain).

    ``quadrature_spec``: ``{"method": "gauss-legendre", "nodes": N}`` for
    Reinhardt domains (default) or ``{"method": "qmc", "points": N, "seed": s}``
    for general domains. Modified Gram-Schmidt runs twice per vector; a
    monomial whose residual norm falls below ``drop_tol`` times its original
    norm is dropped and recorded in ``warnings``.
    """
    if max_degree < 0:
        raise InputError("max_degree must be >= 0")
    if quadrature_spec is None:
        reinhardt = isinstance(domain, Polydisk) or _reinhardt_profile(domain) is not None
        quadrature_spec = ({"method": "gauss-legendre", "nodes": max(32, 2 * max_degree + 8)}
                           if reinhardt else {"method": "qmc", "points": DEFAULT_QMC_POINTS,
                                              "seed": 0})
    exps = monomial_exponents(domain.dim, max_degree)
    G = _gram(domain, exps, quadrature_spec)
    basis = []
    kept = []
    notes = []
    for i in range(len(exps)):
        c = np.zeros(len(exps), dtype=complex)
        c[i] = 1.0
        n0 = np.sqrt(max(_inner(G, c, c).real, 0.0))
        for _ in range(2):
            for b in basis:
                c = c - _inner(G, c, b) * b
        nrm = np.sqrt(max(_inner(G, c, c).real, 0.0))
        if not nrm > drop_tol * n0:
            notes.append(f"dropped monomial {tuple(int(e) for e in exps[i])}: "
                         f"relative residual {nrm / n0 if n0 else 0.0:.3g}")
            continue
        basis.append(c / nrm)
        kept.append(i)
    if notes:
        warnings.warn(f"{len(notes)} ill-conditioned monomials dropped", RuntimeWarning,
                      stacklevel=2)
    return BergmanKernelModel("numerical", domain, int(max_degree), exps,
                              np.array(basis), dict(quadrature_spec), notes)


def kernel_diag(model: BergmanKernelModel, z) -> float:
    return model.kernel_diag(z)


# -- metric and curvature -------------------------------------------------

def bergman_metric(field: kahler.KahlerMetricField, z, v) -> float:
    z = as_vector(z, field.dim)
    v = nonzero_vector(v, field.dim)
    h = field.metric(z)
    g = float(np.real(v @ h @ np.conj(v)))
    if not g > 0:
        raise DegeneracyError("Bergman metric is not positive (kernel underflow?)")
    return g


@dataclass
class CurvatureReport:
    sec: float
    ric: float
    scal: float
    point: np.ndarray
    direction: np.ndarray
    convention: str = "bergman-sec"

    def within(self, bounds, tol=1e-6):
        slo, shi, rlo, rhi, clo, chi = bounds
        return (slo - tol <= self.sec <= shi + tol and rlo - tol <= self.ric <= rhi + tol
                and clo - tol <= self.scal <= chi + tol)

    def to_dict(self):
        return {"sec": self.sec, "ric": self.ric, "scal": self.scal,
                "point": self.point, "direction": self.direction,
                "convention": self.convention}


def ricci_from_tensor(T: kahler.CurvatureTensor):
    hinv = np.linalg.inv(T.metric)
    return np.einsum("ji,ijkl->kl", hinv, T.components)


def bergman_curvatures(field: kahler.KahlerMetricField, z, v) -> CurvatureReport:
    z = as_vector(z, field.dim)
    v = nonzero_vector(v, field.dim)
    T = kahler.curvature_tensor(field, z)
    g = float(np.real(T.h(v)))
    sec = float(np.real(T(v, v, v, v))) / g**2
    Ric = ricci_from_tensor(T)
    ric = float(np.real(v @ Ric @ np.conj(v))) / g
    hinv = np.linalg.inv(T.metric)
    scal = float(np.real(np.einsum("lk,kl->", hinv, Ric)))
    return CurvatureReport(sec, ric, scal, z, v)


def zhang_bounds(n, s):
    """Two-sided curvature bracket in terms of the squeezing value s.

    Returns (sec_lo, sec_hi, ric_lo, ric_hi, scal_lo, scal_hi).
    """
    n = int(n)
    if n < 1:
        raise InputError("n must be >= 1")
    s = float(s)
    if not 0 < s <= 1:
        raise InputError("squeezing value must lie in (0, 1]")
    c = (n + 2) / (n + 1)
    return (2 - 2 * c * s ** (-4 * n), 2 - 2 * c * s ** (4 * n),
            (n + 1) - 2 * (n + 2) * s ** (-2 * n), (n + 1) - (n + 2) * s ** (2 * n),
            n * (n + 1) - n * (n + 2) * s ** (-2 * n), n * (n + 1) - n * (n + 2) * s ** (2 * n))


def curvature_grid(field, points, v):
    rows = []
    for z in points:
        rep = bergman_curvatures(field, z, v)
        row = {f"z{i}_re": float(c.real) for i, c in enumerate(z)}
        row.update({f"z{i}_im": float(c.imag) for i, c in enumerate(z)})
        row.update(sec=rep.sec, ric=rep.ric, scal=rep.scal)
        rows.append(row)
    n = len(points[0]) if len(points) else 0
    cols = [f"z{i}_{p}" for i in range(n) for p in ("re", "im")] + ["sec", "ric", "scal"]
    return delimited(rows, cols)


# -- kernel growth --------------------------------------------------------

class ConstantKernel:
    """Negative control for the growth check: K(z, z) = c."""

    def __init__(self, value=1.0):
        self.value = float(value)

    def kernel_diag(self, z):
        return self.value


def yeung_growth_check(model, domain: Domain, path, floor=1e-3, decay_ratio=0.1):
    """inf over the path of K(z,z) d^2 (-log d)^2, d the boundary distance.

    Passes when the infimum exceeds ``floor`` and the innermost (closest to
    the boundary) value has not decayed below ``decay_ratio`` times the
    largest value seen.
    """
    vals, ds = [], []
    for z in path:
        z = domain.require_interior(z)
        d = domain.boundary_distance(z)
        if d >= 1:
            raise InputError("boundary distance must be < 1 along the path")
        vals.append(model.kernel_diag(z) * d**2 * np.log(d) ** 2)
        ds.append(d)
    order = np.argsort(ds)[::-1]
    vals = np.array(vals)[order]
    ds = np.array(ds)[order]
    inf = float(vals.min())
    decayed = bool(vals[-1] < decay_ratio * vals.max())
    return {"inf": inf, "values": vals, "distances": ds,
            "passed": bool(inf > floor and not decayed)}
