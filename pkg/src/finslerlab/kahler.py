"""Hermitian/Kähler metric fields, their Chern curvature tensors, and the
polarization and pinching checks relating holomorphic sectional curvature
to real sectional curvature.

Index conventions
-----------------
``h[i, j]``          = h_{i jbar}
``dh[k, i, j]``      = d_k h_{i jbar}
``ddh[k, l, i, j]``  = d_k dbar_l h_{i jbar}
``R[i, j, k, l]``    = R_{i jbar k lbar}
                     = -d_k dbar_l h_{i jbar} + h^{qbar p} (d_k h_{i qbar})(dbar_l h_{p jbar})

and ``R(X, Ybar, Z, Wbar) = sum R[i,j,k,l] X^i conj(Y^j) Z^k conj(W^l)``.
With this sign the Poincaré disk has R/h^2 = -2 and the unit-ball Bergman
metric in C^n has R/h^2 = -2/(n+1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _numdiff
from .errors import DegeneracyError, InputError
from .geometry import Ball, as_vector, nonzero_vector


class KahlerMetricField:
    """A Hermitian matrix field h(z) with first and mixed second derivatives.

    Subclasses override :meth:`derivatives` with closed forms; the default
    uses fourth-order finite differences of :meth:`metric`.
    """

    kahler = True
    fd_step = 1e-3

    def __init__(self, dim):
        self.dim = int(dim)

    def metric(self, z):
        return self.derivatives(z)[0]

    def derivatives(self, z):
        z = as_vector(z, self.dim)
        h = self.metric(z)
        dz, _ = _numdiff.wirtinger_gradient(self.metric, z, step=self.fd_step)
        ddh = _numdiff.wirtinger_mixed(self.metric, z, range(self.dim), range(self.dim),
                                       step=self.fd_step, richardson=True)
        return h, dz, ddh

    def __add__(self, other):
        return SumField([self, other])

    def __rmul__(self, c):
        return ScaledField(c, self)


class RadialPotential(KahlerMetricField):
    """Kähler metric of the potential F(t), t = sum w_i |z_i|^2.

    ``F_derivs(t)`` returns (F', F'', F''', F'''') at t. Zero weights make
    the potential independent of that coordinate (used for product domains).
    """

    def __init__(self, F_derivs, weights):
        w = np.asarray(weights, dtype=float)
        super().__init__(w.size)
        self.F_derivs = F_derivs
        self.scale = np.sqrt(w)

    def derivatives(self, z):
        z = as_vector(z, self.dim)
        s = self.scale
        y = s * z
        yb = np.conj(y)
        t = float(np.vdot(y, y).real)
        F1, F2, F3, F4 = self.F_derivs(t)
        n = self.dim
        I = np.eye(n)
        h = F1 * I + F2 * np.outer(yb, y)
        dh = (F2 * (np.einsum("k,ij->kij", yb, I) + np.einsum("i,jk->kij", yb, I))
              + F3 * np.einsum("k,i,j->kij", yb, yb, y))
        ddh = (F2 * (np.einsum("lk,ij->klij", I, I) + np.einsum("li,jk->klij", I, I))
               + F3 * (np.einsum("l,k,ij->klij", y, yb, I) + np.einsum("l,i,jk->klij", y, yb, I)
                       + np.einsum("lk,i,j->klij", I, yb, y) + np.einsum("li,k,j->klij", I, yb, y))
               + F4 * np.einsum("l,k,i,j->klij", y, yb, yb, y))
        h = h * np.outer(s, s)
        dh = dh * np.einsum("k,i,j->kij", s, s, s)
        ddh = ddh * np.einsum("k,l,i,j->klij", s, s, s, s)
        return h, dh, ddh


def log_radial(c):
    """Derivatives of F(t) = -c log(1 - t)."""

    def F(t):
        u = 1.0 - t
        if u <= 0:
            raise DegeneracyError("potential evaluated outside its domain (1 - t <= 0)")
        return c / u, c / u**2, 2 * c / u**3, 6 * c / u**4

    return F


class LogSumSquares(KahlerMetricField):
    """Kähler metric of log sum |f_i(z)|^2 for holomorphic f = (f_1..f_m).

    ``evaluator(z)`` returns (f, df, ddf) with shapes (m,), (n, m), (n, n, m):
    values, d_k f and d_k d_l f.
    """

    def __init__(self, evaluator, dim):
        super().__init__(dim)
        self.evaluator = evaluator

    def derivatives(self, z):
        z = as_vector(z, self.dim)
        f, df, ddf = self.evaluator(z)
        fb, dfb, ddfb = np.conj(f), np.conj(df), np.conj(ddf)
        K = float(np.real(f @ fb))
        if not K > 0:
            raise DegeneracyError("sum of squares vanishes; metric undefined")
        Ki = df @ fb                                  # d_i K
        Kb = np.conj(Ki)                              # dbar_j K
        Kij = df @ dfb.T                              # [i, j] d_i dbar_j
        Kik = ddf @ fb                                # [i, k] d_i d_k
        Kbb = np.conj(Kik)                            # [j, l] dbar_j dbar_l
        Kikj = np.einsum("ikm,jm->ikj", ddf, dfb)     # d_i d_k dbar_j
        Kijl = np.einsum("im,jlm->ijl", df, ddfb)     # d_i dbar_j dbar_l
        Kikjl = np.einsum("ikm,jlm->ikjl", ddf, ddfb)
        h = Kij / K - np.outer(Ki, Kb) / K**2
        dh = (np.einsum("ikj->kij", Kikj) / K
              - np.einsum("ij,k->kij", Kij, Ki) / K**2
              - (np.einsum("ik,j->kij", Kik, Kb) + np.einsum("i,kj->kij", Ki, Kij)) / K**2
              + 2 * np.einsum("i,j,k->kij", Ki, Kb, Ki) / K**3)
        e = np.einsum
        ddh = (e("ikjl->klij", Kikjl) / K
               - e("ikj,l->klij", Kikj, Kb) / K**2
               - (e("ijl,k->klij", Kijl, Ki) + e("ij,kl->klij", Kij, Kij)) / K**2
               + 2 * e("ij,k,l->klij", Kij, Ki, Kb) / K**3
               - (e("ikl,j->klij", Kikj, Kb) + e("ik,jl->klij", Kik, Kbb)
                  + e("il,kj->klij", Kij, Kij) + e("i,kjl->klij", Ki, Kijl)) / K**2
               + 2 * (e("ik,j,l->klij", Kik, Kb, Kb) + e("i,kj,l->klij", Ki, Kij, Kb)) / K**3
               + 2 * (e("il,j,k->klij", Kij, Kb, Ki) + e("i,jl,k->klij", Ki, Kbb, Ki)
                      + e("i,j,kl->klij", Ki, Kb, Kij)) / K**3
               - 6 * e("i,j,k,l->klij", Ki, Kb, Ki, Kb) / K**4)
        return h, dh, ddh


class ExpConformalField(KahlerMetricField):
    """h = exp(a |z|^2) diag(weights). Hermitian, not Kähler when a != 0 and n >= 2."""

    def __init__(self, a, dim, weights=None):
        super().__init__(dim)
        self.a = float(a)
        self.weights = np.ones(dim) if weights is None else np.asarray(weights, dtype=float)
        if self.weights.shape != (dim,) or np.any(self.weights <= 0):
            raise InputError("weights must be positive, one per coordinate")
        self.kahler = dim == 1 or self.a == 0

    def derivatives(self, z):
        z = as_vector(z, self.dim)
        n, a = self.dim, self.a
        W = np.diag(self.weights).astype(complex)
        E = np.exp(a * np.vdot(z, z).real)
        h = E * W
        dh = a * E * np.einsum("k,ij->kij", np.conj(z), W)
        ddh = E * np.einsum("kl,ij->klij", a * np.eye(n) + a * a * np.outer(np.conj(z), z), W)
        return h, dh, ddh


class FlatField(KahlerMetricField):
    def derivatives(self, z):
        n = self.dim
        return np.eye(n, dtype=complex), np.zeros((n, n, n), complex), np.zeros((n,) * 4, complex)


class HermitianField(KahlerMetricField):
    """Wraps a callable z -> h(z); derivatives by finite differences."""

    def __init__(self, func, dim, kahler=True):
        super().__init__(dim)
        self.func = func
        self.kahler = kahler

    def metric(self, z):
        return np.asarray(self.func(as_vector(z, self.dim)), dtype=complex)


class SumField(KahlerMetricField):
    def __init__(self, fields):
        fields = list(fields)
        super().__init__(fields[0].dim)
        self.fields = fields
        self.kahler = all(f.kahler for f in fields)

    def derivatives(self, z):
        parts = [f.derivatives(z) for f in self.fields]
        return tuple(sum(p[i] for p in parts) for i in range(3))


class ScaledField(KahlerMetricField):
    def __init__(self, c, inner_field):
        super().__init__(inner_field.dim)
        self.c = float(c)
        self.inner = inner_field
        self.kahler = inner_field.kahler

    def derivatives(self, z):
        return tuple(self.c * d for d in self.inner.derivatives(z))


def ball_bergman_field(dim, radius=1.0):
    return RadialPotential(log_radial(dim + 1), np.full(dim, radius**-2.0))


def poincare_field():
    """(1 - |z|^2)^-2 on the unit disk."""
    return RadialPotential(log_radial(1), [1.0])


# -- curvature ----------------------------------------------------------

@dataclass
class CurvatureTensor:
    """R_{i jbar k lbar} at a point together with the metric there."""

    point: np.ndarray
    components: np.ndarray
    metric: np.ndarray

    def __call__(self, X, Yb, Z, Wb):
        return np.einsum("ijkl,i,j,k,l->", self.components, X, np.conj(Yb), Z, np.conj(Wb))

    def h(self, X, Y=None):
        Y = X if Y is None else Y
        return X @ self.metric @ np.conj(Y)

    def symmetry_residuals(self):
        """Relative violations of the Hermitian and two Kähler symmetries."""
        R = self.components
        scale = max(np.max(np.abs(R)), 1e-300)
        herm = np.max(np.abs(R - np.conj(R.transpose(1, 0, 3, 2))))
        k1 = np.max(np.abs(R - R.transpose(2, 1, 0, 3)))
        k2 = np.max(np.abs(R - R.transpose(0, 3, 2, 1)))
        return {"hermitian": herm / scale, "kahler_ik": k1 / scale, "kahler_jl": k2 / scale}

    def to_dict(self):
        return {
            "point": [[float(c.real), float(c.imag)] for c in self.point],
            "index_order": "i,jbar,k,lbar (C order)",
            "components": [[float(c.real), float(c.imag)] for c in self.components.ravel()],
            "metric": [[float(c.real), float(c.imag)] for c in self.metric.ravel()],
        }

    @classmethod
    def from_dict(cls, d):
        pt = np.array([complex(a, b) for a, b in d["point"]])
        n = pt.size
        comps = np.array([complex(a, b) for a, b in d["components"]]).reshape((n,) * 4)
        met = np.array([complex(a, b) for a, b in d["metric"]]).reshape(n, n)
        return cls(pt, comps, met)


def _inverse(h):
    try:
        c = np.linalg.cond(h)
    except np.linalg.LinAlgError:
        c = np.inf
    if not np.isfinite(c) or c > 1e13:
        raise DegeneracyError(f"metric matrix is singular (cond={c:.3g})")
    return np.linalg.inv(h)


def tensor_from_derivatives(h, dh, ddh):
    hinv = _inverse(h)
    return -np.einsum("klij->ijkl", ddh) + np.einsum("kiq,qp,ljp->ijkl", dh, hinv, np.conj(dh))


def curvature_tensor(field, z):
    z = as_vector(z, field.dim)
    h, dh, ddh = field.derivatives(z)
    return CurvatureTensor(z, tensor_from_derivatives(h, dh, ddh), h)


def _hsc_from_tensor(T, X):
    return float(np.real(T(X, X, X, X)) / np.real(T.h(X)) ** 2)


def hsc(field, z, X):
    """R(X, Xbar, X, Xbar) / h(X, X)^2 (Poincaré disk: -2)."""
    X = nonzero_vector(X, field.dim)
    return _hsc_from_tensor(curvature_tensor(field, z), X)


def orthonormalize(metric, X, Y):
    """Gram-Schmidt of (X, Y) in the Hermitian metric; returns (X', Y', coeffs)."""
    hX = np.real(X @ metric @ np.conj(X))
    Xn = X / np.sqrt(hX)
    proj = Y @ metric @ np.conj(Xn)
    Yp = Y - proj * Xn
    hY = np.real(Yp @ metric @ np.conj(Yp))
    hY0 = np.real(Y @ metric @ np.conj(Y))
    if hY <= 1e-20 * max(hY0, 1e-300):
        raise InputError("X and Y are complex-linearly dependent (degenerate plane)")
    return Xn, Yp / np.sqrt(hY), {"x_scale": 1 / np.sqrt(hX), "y_projection": proj,
                                   "y_scale": 1 / np.sqrt(hY)}


def _real_sectional_from_tensor(T, X, Y):
    val = 2 * T(X, X, Y, Y) - T(X, Y, X, Y) - T(Y, X, Y, X)
    return float(np.real(val)), float(abs(np.imag(val)))


def real_sectional(field, z, X, Y):
    """2R(X,Xb,Y,Yb) - R(X,Yb,X,Yb) - R(Y,Xb,Y,Xb) for h-orthonormalized X, Y.

    This is R(u1, u2, u2, u1) with u1 = X + Xbar, u2 = Y + Ybar.
    """
    X = nonzero_vector(X, field.dim)
    Y = nonzero_vector(Y, field.dim)
    T = curvature_tensor(field, z)
    Xn, Yn, _ = orthonormalize(T.metric, X, Y)
    return _real_sectional_from_tensor(T, Xn, Yn)[0]


def polarization_check(T, X, Y):
    """Residuals of the four polarization identities relating R(X,Xb,Y,Yb)
    and R(X,Yb,X,Yb) + R(Y,Xb,Y,Xb) to holomorphic sectional terms.

    Each residual is |lhs - rhs| divided by the largest term magnitude.
    """
    R4 = {}
    for name, Z in (("X", X), ("Y", Y), ("X+Y", X + Y), ("X-Y", X - Y),
                    ("X+iY", X + 1j * Y), ("X-iY", X - 1j * Y)):
        R4[name] = T(Z, Z, Z, Z)
    mixed = T(X, X, Y, Y)
    bx = T(X, Y, X, Y)
    by = T(Y, X, Y, X)

    def rel(lhs, rhs_terms):
        rhs = sum(rhs_terms)
        scale = max([abs(lhs)] + [abs(t) for t in rhs_terms])
        return 0.0 if scale == 0 else float(abs(lhs - rhs) / scale)

    r42 = rel(R4["X+Y"] + R4["X-Y"],
              [2 * R4["X"], 2 * R4["Y"], 8 * mixed, 2 * bx, 2 * by])
    r43 = rel(R4["X+iY"] + R4["X-iY"],
              [2 * R4["X"], 2 * R4["Y"], 8 * mixed, -2 * bx, -2 * by])
    r44 = rel(mixed, [R4["X+Y"] / 16, R4["X-Y"] / 16, R4["X+iY"] / 16, R4["X-iY"] / 16,
                      -R4["X"] / 4, -R4["Y"] / 4])
    r45 = rel(bx + by, [R4["X+Y"] / 4, R4["X-Y"] / 4, -R4["X+iY"] / 4, -R4["X-iY"] / 4])
    return (r42, r43, r44, r45)


@dataclass
class PinchingReport:
    C: float
    max_mixed: float
    max_bisect: float
    max_real_sec: float
    pass_mixed: bool
    pass_bisect: bool
    pass_real_sec: bool
    samples: int
    seed: int
    observed_ratio: float = float("nan")
    extras: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.pass_mixed and self.pass_bisect and self.pass_real_sec


def _random_vectors(rng, n, count):
    return rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))


def pinching_constants_check(field, domain=None, sample_count=500, seed=0, tol=1e-8):
    """Check the mixed (5C/2), bisectional (8C) and real sectional (13C)
    bounds implied by |HSC| <= C.

    C is the largest |HSC| seen over the sample, evaluated at every sampled
    X, Y and at the polarized directions X +- Y, X +- iY, so that the bound
    really covers every direction the polarization formulas use.
    """
    if domain is None:
        domain = Ball(1.0, field.dim)
    rng = np.random.default_rng(seed)
    pts = domain.sample_interior(sample_count, seed=int(rng.integers(2**31)))
    Xs = _random_vectors(rng, field.dim, sample_count)
    Ys = _random_vectors(rng, field.dim, sample_count)
    C = 0.0
    mixed = bisect = realsec = 0.0
    nonzero = False
    for z, X, Y in zip(pts, Xs, Ys):
        T = curvature_tensor(field, z)
        nonzero = nonzero or np.any(np.abs(T.components) > 0)
        if field.dim == 1:
            Xn = X / np.sqrt(np.real(T.h(X)))
            Yn = None
        else:
            Xn, Yn, _ = orthonormalize(T.metric, X, Y)
        dirs = [Xn] if Yn is None else [Xn, Yn, Xn + Yn, Xn - Yn, Xn + 1j * Yn, Xn - 1j * Yn]
        for D in dirs:
            C = max(C, abs(_hsc_from_tensor(T, D)))
        if Yn is None:
            continue
        mixed = max(mixed, abs(T(Xn, Xn, Yn, Yn)))
        bisect = max(bisect, abs(T(Xn, Yn, Xn, Yn) + T(Yn, Xn, Yn, Xn)))
        realsec = max(realsec, abs(_real_sectional_from_tensor(T, Xn, Yn)[0]))
    if C == 0 and nonzero and max(mixed, bisect, realsec) > 0:
        raise DegeneracyError("holomorphic sectional curvature vanishes but the tensor does not")
    slack = tol * C
    return PinchingReport(
        C=C, max_mixed=mixed, max_bisect=bisect, max_real_sec=realsec,
        pass_mixed=mixed <= 2.5 * C + slack,
        pass_bisect=bisect <= 8 * C + slack,
        pass_real_sec=realsec <= 13 * C + slack,
        samples=sample_count, seed=seed,
        observed_ratio=realsec / C if C > 0 else 0.0,
    )
