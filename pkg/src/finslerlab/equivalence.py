"""Numerical checks relating a Finsler metric G with negative holomorphic
sectional curvature, the Bergman metric g_B and the Kobayashi metric:

* the sandwich g_B <= H = C G + g_B <= C2 g_B,
* the Schwarz-lemma bound G <= (K1/K2) h for the identity map,
* divergence of ray lengths toward the boundary (completeness probe),
* (B/4) h <= 𝔎^2 <= (A/4) h for a Kähler metric with -A <= HSC <= -B,
* h <= C ℭ^2 + h <= C3 h, and the distance comparison d_K >= sqrt(B/4) d_G.

All curvatures are in the finsler-module normalization (Poincaré = -4);
Bergman-module sectional curvatures are doubled on the way in.

Constants are measured on one seeded sample set and verified on another
(the two seeds are spawned from the user seed), so a check never
confirms itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from . import finsler, kahler
from .errors import ConfigurationError, InputError
from .geometry import Ball, Domain, nonzero_vector
from .invariant import caratheodory_lower_support, kobayashi_metric, _model_distance

REL_TOL = 1e-9


def split_seeds(seed):
    """(measurement seed, verification seed), disjoint streams from one seed."""
    a, b = np.random.SeedSequence(int(seed)).spawn(2)
    return int(a.generate_state(1)[0]), int(b.generate_state(1)[0])


def sample_bundle(domain: Domain, samples, seed, max_fraction=0.9):
    """Seeded (points, vectors); points reach ``max_fraction`` of the way to the boundary."""
    rng = np.random.default_rng(seed)
    pts = domain.sample_interior(samples, seed=int(rng.integers(2**31)), max_fraction=max_fraction)
    vs = rng.standard_normal((samples, domain.dim)) + 1j * rng.standard_normal(
        (samples, domain.dim))
    return pts, vs


def finsler_curvature(model):
    return lambda z, v: finsler.hsc_chern_finsler(model, z, v)


def kahler_curvature(field):
    """HSC of a Kähler field in the finsler normalization (twice R/h^2)."""
    return lambda z, v: 2.0 * kahler.hsc(field, z, v)


# -- constants --------------------------------------------------------------

@dataclass
class EquivalenceConfig:
    """Constants for the sandwich (K, B, C1 -> C2) and for the Kähler
    comparison (A, B, C -> C3)."""

    C: float
    K: float = float("nan")
    A: float = float("nan")
    B: float = float("nan")
    C1: float = float("nan")

    @property
    def C2(self):
        return self.C1 / (self.K / self.C - self.B)

    @property
    def C3(self):
        return self.A / (4.0 / self.C - self.B)

    def require_sandwich_window(self):
        if not (self.K > 0 and self.B > 0 and 0 < self.C < self.K / self.B):
            raise ConfigurationError(
                f"mixing constant C = {self.C:.6g} outside the window 0 < C < K/B "
                f"= {self.K / self.B if self.B else float('inf'):.6g}")

    def require_kahler_window(self):
        if not (self.B > 0 and 0 < self.C < 4.0 / self.B):
            raise ConfigurationError(
                f"mixing constant C = {self.C:.6g} outside the window 0 < C < 4/B")

    def to_dict(self):
        d = {"C": self.C, "K": self.K, "A": self.A, "B": self.B, "C1": self.C1}
        if self.K > 0 and self.B > 0:
            d["C2"] = self.C2
        if self.A > 0 and self.B > 0:
            d["C3"] = self.C3
        return d


def measure_curvature_window(curvature, domain: Domain, samples=200, seed=0, max_fraction=0.9):
    """Sampled extremes of a curvature evaluator (z, v) -> float.

    Returns K = B = -max and A = C1 = -min. When the maximum is not
    negative the report is flagged ``precondition_violated`` instead of
    raising.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    pts, vs = sample_bundle(domain, samples, seed, max_fraction)
    vals = np.array([curvature(z, v) for z, v in zip(pts, vs)])
    hi, lo = float(vals.max()), float(vals.min())
    return {"K": -hi, "B": -hi, "A": -lo, "C1": -lo, "max": hi, "min": lo,
            "argmax": pts[int(vals.argmax())], "argmin": pts[int(vals.argmin())],
            "samples": samples, "seed": seed, "precondition_violated": bool(hi >= 0)}


# -- sandwich ------------------------------------------------------------------

def build_H(G: finsler.FinslerMetricModel, g_B: kahler.KahlerMetricField,
            config: EquivalenceConfig, domain: Domain | None = None):
    config.require_sandwich_window()
    dom = domain if domain is not None else G.domain
    return finsler.SumModel([(config.C, G), (1.0, finsler.HermitianModel(g_B))], dom)


@dataclass
class EquivalenceReport:
    ratio_min: float
    ratio_max: float
    argmin: tuple
    argmax: tuple
    constants: dict
    checks: dict
    seeds: dict
    extras: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def to_dict(self):
        return {"ratio_min": self.ratio_min, "ratio_max": self.ratio_max,
                "argmin": list(self.argmin), "argmax": list(self.argmax),
                "constants": self.constants, "checks": self.checks, "seeds": self.seeds,
                **self.extras}


def verify_sandwich(H: finsler.SumModel, g_B: kahler.KahlerMetricField,
                    config: EquivalenceConfig, domain: Domain, samples=1000, seed=0,
                    tol=REL_TOL, curvature_tol=1e-6):
    """Check 1 <= H/g_B <= C2 and HSC(H) <= -K/C + B on verification samples."""
    config.require_sandwich_window()
    pts, vs = sample_bundle(domain, samples, seed)
    ratios, excess, curv = [], [], []
    bound = -config.K / config.C + config.B
    for z, v in zip(pts, vs):
        hv = H(z, v)
        gb = float(np.real(v @ g_B.metric(z) @ np.conj(v)))
        ratios.append(hv / gb)
        excess.append((hv - gb) / gb)
        curv.append(finsler.hsc_chern_finsler(H, z, v))
    ratios = np.array(ratios)
    curv = np.array(curv)
    i, j, k = int(ratios.argmin()), int(ratios.argmax()), int(curv.argmax())
    checks = {
        "lower": bool(ratios.min() >= 1 - tol),
        "upper": bool(ratios.max() <= config.C2 * (1 + tol)),
        "curvature": bool(curv.max() <= bound + curvature_tol),
    }
    return EquivalenceReport(
        float(ratios.min()), float(ratios.max()), (pts[i], vs[i]), (pts[j], vs[j]),
        config.to_dict(), checks, {"verification": seed},
        {"min_excess": float(min(excess)), "max_curvature_H": float(curv.max()),
         "curvature_bound": bound, "argmax_curvature": (pts[k], vs[k])})


# -- Schwarz lemma ---------------------------------------------------------------

def schwarz_check(h, K1, G, K2, domain: Domain, samples=200, seed=0, tol=1e-8):
    """G(z; v) <= (K1/K2) h(z; v) for the identity map.

    h is a Finsler model or Kähler field with HSC >= -K1; G has HSC <= -K2.
    """
    if not K2 > 0:
        raise InputError("target curvature bound -K2 must be negative")
    if K1 < 0:
        raise InputError("K1 must be >= 0")
    src = h if isinstance(h, finsler.FinslerMetricModel) else finsler.HermitianModel(h)
    pts, vs = sample_bundle(domain, samples, seed)
    c = K1 / K2
    ratios = np.array([G(z, v) / (c * src(z, v)) for z, v in zip(pts, vs)])
    j = int(ratios.argmax())
    return {"max_ratio": float(ratios.max()), "min_ratio": float(ratios.min()),
            "argmax": (pts[j], vs[j]), "factor": c, "samples": samples, "seed": seed,
            "passed": bool(ratios.max() <= 1 + tol)}


# -- completeness ---------------------------------------------------------------

DEFAULT_EPSILONS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def _ray_parameter(domain, u, eps):
    """t with boundary_distance(t u) = eps along the ray from 0."""
    T = domain.ray_exit(np.zeros(domain.dim, complex), u)
    if isinstance(domain, Ball):
        return domain.radius - eps
    f = lambda t: domain.boundary_distance(t * u) - eps
    return optimize.brentq(f, 0.0, T * (1 - 1e-15), xtol=1e-15, rtol=1e-14)


def completeness_probe(metric, domain: Domain, directions=None, epsilons=DEFAULT_EPSILONS,
                       min_r2=0.99):
    """Length L(eps) of the ray from 0 to boundary distance eps in sqrt(metric),
    fitted as kappa log(1/eps) + c.

    ``metric(z, v)`` returns the squared length of v at z. Divergent when
    L increases, kappa > 0 and R^2 > min_r2 on every direction.
    """
    eps = np.asarray(epsilons, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise InputError("epsilons must decrease toward 0")
    if directions is None:
        directions = [np.eye(domain.dim, dtype=complex)[0]]
    results = []
    for u in directions:
        u = nonzero_vector(u, domain.dim)
        u = u / np.linalg.norm(u)
        ts = [0.0] + [_ray_parameter(domain, u, e) for e in eps]
        f = lambda s: np.sqrt(metric(s * u, u))
        L, total, truncated = [], 0.0, False
        for a, b in zip(ts[:-1], ts[1:]):
            try:
                seg, _ = integrate.quad(f, a, b, limit=200, epsabs=1e-13, epsrel=1e-12)
            except (ArithmeticError, ValueError):
                truncated = True
                break
            total += seg
            L.append(total)
        L = np.array(L)
        x = np.log(1 / eps[:len(L)])
        slope, icpt = np.polyfit(x, L, 1)
        resid = L - (slope * x + icpt)
        ss = np.sum((L - L.mean()) ** 2)
        r2 = float(1 - np.sum(resid**2) / ss) if ss > 0 else 0.0
        increasing = bool(np.all(np.diff(L) > 0))
        results.append({"direction": u, "lengths": L, "kappa": float(slope),
                        "intercept": float(icpt), "r2": r2, "increasing": increasing,
                        "truncated": truncated,
                        "divergent": bool(increasing and slope > 0 and r2 > min_r2)})
    return {"rays": results, "divergent": all(r["divergent"] for r in results)}


# -- Kobayashi versus Kähler --------------------------------------------------

def kobayashi_kahler_equivalence(domain: Domain, h: kahler.KahlerMetricField, samples=100,
                                 seed=0, A=None, B=None, tol=1e-6, measure_samples=None,
                                 max_fraction=0.9):
    """(B/4) h <= 𝔎^2 <= (A/4) h using the certified 𝔎 interval.

    A and B default to measured values (-min and -max of the doubled HSC of h
    on a separate sample set). Truncated numerical kernels are only accurate
    away from the boundary; ``max_fraction`` keeps every sample inside that
    region.
    """
    ms, vs_seed = split_seeds(seed)
    window = None
    if A is None or B is None:
        window = measure_curvature_window(kahler_curvature(h), domain,
                                          measure_samples or samples, ms, max_fraction)
        if window["precondition_violated"]:
            return {"precondition_violated": True, "window": window, "passed": False}
        A = window["A"] if A is None else A
        B = window["B"] if B is None else B
    pts, vs = sample_bundle(domain, samples, vs_seed, max_fraction)
    lo_m, hi_m = [], []
    for z, v in zip(pts, vs):
        I = kobayashi_metric(domain, z, v, seed=seed)
        hv = float(np.real(v @ h.metric(z) @ np.conj(v)))
        lo_m.append((I.lower**2 - B / 4 * hv) / hv)
        hi_m.append((A / 4 * hv - I.upper**2) / hv)
    return {"A": float(A), "B": float(B), "window": window,
            "min_lower_margin": float(min(lo_m)), "min_upper_margin": float(min(hi_m)),
            "samples": samples, "seeds": {"measurement": ms, "verification": vs_seed},
            "passed": bool(min(lo_m) >= -tol and min(hi_m) >= -tol),
            "precondition_violated": False}


def caratheodory_H_check(domain: Domain, h: kahler.KahlerMetricField, C=None, samples=100,
                         seed=0, A=None, B=None, tol=1e-8):
    """h <= H = C ℭ^2 + h <= C3 h with C3 = A/(4/C - B).

    ℭ is taken from the lower certificate, which is exact on balls,
    ellipsoids and polydisks. C defaults to 3/B (three quarters of the window).
    """
    ms, vs_seed = split_seeds(seed)
    if A is None or B is None:
        w = measure_curvature_window(kahler_curvature(h), domain, samples, ms)
        A = w["A"] if A is None else A
        B = w["B"] if B is None else B
    C = 3.0 / B if C is None else float(C)
    cfg = EquivalenceConfig(C=C, A=A, B=B)
    cfg.require_kahler_window()
    pts, vs = sample_bundle(domain, samples, vs_seed)
    ratios = []
    for z, v in zip(pts, vs):
        c = caratheodory_lower_support(domain, z, v)[0]
        hv = float(np.real(v @ h.metric(z) @ np.conj(v)))
        ratios.append((C * c**2 + hv) / hv)
    ratios = np.array(ratios)
    return {"C": C, "A": float(A), "B": float(B), "C3": cfg.C3,
            "ratio_min": float(ratios.min()), "ratio_max": float(ratios.max()),
            "lower": bool(ratios.min() >= 1 - tol),
            "upper": bool(ratios.max() <= cfg.C3 * (1 + tol)),
            "passed": bool(ratios.min() >= 1 - tol and ratios.max() <= cfg.C3 * (1 + tol))}


def segment_length(metric, p, q):
    d = q - p
    f = lambda s: np.sqrt(metric(p + s * d, d))
    val, _ = integrate.quad(f, 0.0, 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)
    return float(val)


def distance_comparison_check(domain: Domain, H, B, pairs, tol=1e-8):
    """Compare d_K with sqrt(B/4) times the straight-segment length of H.

    The segment length bounds d_H from above, so d_K >= sqrt(B/4) * length
    certifies the inequality. Pairs where d_K is not known exactly, or
    where the certificate does not close, are marked inconclusive.
    """
    if not B > 0:
        raise InputError("B must be positive")
    out = []
    for p, q in pairs:
        p = domain.require_interior(p)
        q = domain.require_interior(q)
        dK = _model_distance(domain, p, q)
        L = segment_length(H, p, q)
        rhs = np.sqrt(B / 4) * L
        if dK is None:
            verdict = "inconclusive"
        elif dK >= rhs * (1 - tol):
            verdict = "holds"
        else:
            verdict = "inconclusive"
        out.append({"p": p, "q": q, "d_K": dK, "segment_length": L, "bound": rhs,
                    "verdict": verdict})
    return {"pairs": out, "all_hold": all(r["verdict"] == "holds" for r in out)}
