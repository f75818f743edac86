"""Command-line front end: ``finslerlab {curvature,verify,squeeze,kobayashi}``.

A run reads a JSON config, runs the selected checks with seeded sampling
and writes one report. The report is a sequence of JSON records (or a
tab-delimited table) whose bytes depend only on the config and seed; wall
time goes to stderr.

Exit codes: 0 every check passed, 1 a check failed, 2 bad config or a
violated precondition window, 3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, bergman, equivalence, finsler, invariant, kahler, squeezing
from .errors import (ConfigurationError, DegeneracyError, FinslerLabError, InputError,
                     PreconditionViolation)
from .geometry import Ball, domain_from_dict, sphere_directions
from .reporting import delimited, record_line

CONFIG_DIR_ENV = "FINSLERLAB_CONFIG_DIR"
SCHEMA_VERSION = 1

CONFIG_FIELDS = {"version", "domain", "metric", "kernel", "seed", "samples", "tolerance",
                 "checks", "constants", "C", "grid", "direction", "budget", "effort"}
SAMPLING = {"curvature", "verify", "squeeze", "kobayashi"}

TAGS = ("T3.1", "T4.1", "T6.1", "T6.4", "T6.5", "T7.1", "T7.2")
ALIASES = {"bracket": "T3.1", "polarization": "T4.1", "pinching": "T4.1", "schwarz": "T6.1",
           "sandwich": "T6.4", "completeness": "T6.5", "hyperbolicity": "T6.5",
           "kobayashi-equivalence": "T7.1", "caratheodory": "T7.2"}
VERDICTS = ("pass", "fail", "inconclusive", "precondition-violation")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3


# -- config ----------------------------------------------------------------

def resolve_config_path(path):
    if os.path.isabs(path) or os.path.exists(path):
        return path
    base = os.environ.get(CONFIG_DIR_ENV)
    if base and os.path.exists(os.path.join(base, path)):
        return os.path.join(base, path)
    raise ConfigurationError(f"config file not found: {path}")


def load_config(path):
    with open(resolve_config_path(path)) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from None
    return validate_config(cfg)


def validate_config(cfg):
    if not isinstance(cfg, dict):
        raise ConfigurationError("config must be a JSON object")
    unknown = set(cfg) - CONFIG_FIELDS
    if unknown:
        raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
    if cfg.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported config version {cfg['version']!r}")
    if "domain" not in cfg:
        raise ConfigurationError("config needs a domain")
    return dict(cfg)


def merge_flags(cfg, args):
    """Command-line flags override config entries."""
    cfg = dict(cfg)
    for key in ("seed", "samples", "tolerance"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if args.checks:
        cfg["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    if args.command in SAMPLING and "seed" not in cfg:
        raise ConfigurationError(f"'{args.command}' samples randomly and needs a seed")
    seed = int(cfg["seed"])
    if not 0 <= seed < 2**64:
        raise ConfigurationError("seed must be a 64-bit unsigned integer")
    cfg["seed"] = seed
    return cfg


# -- builders ----------------------------------------------------------------

def build_domain(cfg):
    return domain_from_dict(cfg["domain"])


def build_field(cfg, domain):
    spec = dict(cfg.get("kernel", {"kind": "closed-form"}))
    kind = spec.pop("kind", "closed-form")
    if kind == "closed-form":
        return bergman.closed_form_field(domain), True
    if kind == "numerical":
        model = bergman.build_numerical_kernel(domain, int(spec.pop("degree", 8)),
                                               spec.pop("quadrature", None))
        if spec:
            raise ConfigurationError(f"unknown kernel fields: {sorted(spec)}")
        return model.metric_field(), True
    if kind == "flat":
        return kahler.FlatField(domain.dim), False
    raise ConfigurationError(f"unknown kernel kind {kind!r}")


def build_metric(cfg, domain):
    spec = dict(cfg.get("metric", {"kind": "explicit-family", "a": 1.0, "b": 0.5}))
    spec.setdefault("dimension", domain.dim)
    spec.setdefault("domain", cfg["domain"])          # b < 1/M0 is checked against it
    return finsler.model_from_dict(spec)


def grid(cfg, domain):
    spec = cfg.get("grid", {"pattern": "radial", "rays": 4, "levels": 3, "extent": 0.8})
    return squeezing.grid_points(domain, spec)


def direction(cfg, n):
    if "direction" in cfg:
        return np.array([complex(a, b) for a, b in cfg["direction"]])
    return np.eye(n, dtype=complex)[0]


def sample_pairs(domain, count, seed):
    return equivalence.sample_bundle(domain, count, seed)


# -- records ---------------------------------------------------------------

def check(name, verdict, **data):
    assert verdict in VERDICTS
    return {"record": "check", "check": name, "verdict": verdict, **data}


def verdict_of(ok):
    return "pass" if ok else "fail"


def header(command, cfg):
    return {"record": "run", "tool": "finslerlab", "version": __version__,
            "command": command, "config": cfg}


def summary(records):
    verdicts = [r["verdict"] for r in records if r.get("record") == "check"]
    counts = {v: verdicts.count(v) for v in VERDICTS}
    return {"record": "summary", "counts": counts, "passed": counts["fail"] == 0
            and counts["precondition-violation"] == 0}


# -- subcommands ---------------------------------------------------------------

def cmd_curvature(cfg):
    domain = build_domain(cfg)
    field, is_bergman = build_field(cfg, domain)
    tol = float(cfg.get("tolerance", 1e-6))
    v = direction(cfg, domain.dim)
    recs, rows = [], []
    for z in grid(cfg, domain):
        rep = bergman.bergman_curvatures(field, z, v)
        row = {"point": z, "sec": rep.sec, "ric": rep.ric, "scal": rep.scal}
        if is_bergman:
            est = squeezing.squeeze_optimize(domain, z, int(cfg.get("budget", 200)), cfg["seed"])
            bounds = bergman.zhang_bounds(domain.dim, est.lower)
            row.update(squeeze_lower=est.lower, bounds=bounds,
                       verdict=verdict_of(rep.within(bounds, tol)))
        else:
            row.update(verdict="inconclusive", reason="bracket applies to Bergman metrics only")
        rows.append(row)
        recs.append({"record": "curvature", **row})
    verdicts = {r["verdict"] for r in rows}
    overall = "fail" if "fail" in verdicts else ("pass" if verdicts == {"pass"} else "inconclusive")
    recs.append(check("T3.1", overall, points=len(rows)))
    return recs, _curvature_table(rows, domain.dim)


def _curvature_table(rows, n):
    out = []
    for r in rows:
        d = {f"z{i}_{p}": getattr(c, p) for i, c in enumerate(r["point"]) for p in ("real", "imag")}
        d.update(sec=r["sec"], ric=r["ric"], scal=r["scal"], verdict=r["verdict"])
        out.append(d)
    cols = [f"z{i}_{p}" for i in range(n) for p in ("real", "imag")] + ["sec", "ric", "scal", "verdict"]
    return out, cols


def cmd_squeeze(cfg):
    domain = build_domain(cfg)
    budget = int(cfg.get("budget", 200))
    value, ests = squeezing.squeezing_constant_lower(domain, cfg.get(
        "grid", {"pattern": "radial", "rays": 4, "levels": 3, "extent": 0.8}), budget, cfg["seed"])
    recs, rows = [], []
    for e in ests:
        w = squeezing.verify_witness(domain, e, count=int(cfg.get("samples", 500)), seed=cfg["seed"])
        recs.append({"record": "squeeze", "point": e.point, "lower": e.lower, "method": e.method,
                     "witness_passed": w["passed"]})
        rows.append({**{f"z{i}_{p}": getattr(c, p) for i, c in enumerate(e.point)
                        for p in ("real", "imag")}, "lower": e.lower, "method": e.method})
    ok = value > 0 and all(r["witness_passed"] for r in recs)
    recs.append(check("squeezing-constant", verdict_of(ok), infimum=value, points=len(ests)))
    cols = [f"z{i}_{p}" for i in range(domain.dim) for p in ("real", "imag")] + ["lower", "method"]
    return recs, (rows, cols)


def cmd_kobayashi(cfg):
    domain = build_domain(cfg)
    v = direction(cfg, domain.dim)
    effort = int(cfg.get("effort", 1))
    tol = float(cfg.get("tolerance", 1e-6))
    recs, rows = [], []
    for z in grid(cfg, domain):
        I = invariant.kobayashi_metric(domain, z, v, effort=effort, seed=cfg["seed"])
        recs.append({"record": "kobayashi", "point": z, "lower": I.lower, "upper": I.upper,
                     "width": I.width})
        rows.append({**{f"z{i}_{p}": getattr(c, p) for i, c in enumerate(z)
                        for p in ("real", "imag")},
                     "lower": I.lower, "upper": I.upper, "width": I.width})
    widths = [r["width"] for r in recs]
    ordered = all(r["lower"] <= r["upper"] * (1 + 1e-12) for r in recs)
    collapsed = max(widths) < tol
    recs.append(check("interval-order", verdict_of(ordered), max_width=max(widths)))
    recs.append(check("interval-collapse", "pass" if collapsed else "inconclusive",
                      max_width=max(widths), tolerance=tol))
    cols = [f"z{i}_{p}" for i in range(domain.dim) for p in ("real", "imag")] + ["lower", "upper", "width"]
    return recs, (rows, cols)


def _selected(cfg):
    raw = cfg.get("checks") or list(TAGS)
    out = []
    for c in raw:
        tag = ALIASES.get(c, c)
        if tag not in TAGS:
            raise ConfigurationError(f"unknown check {c!r}; known: {', '.join(TAGS)}")
        if tag not in out:
            out.append(tag)
    return [t for t in TAGS if t in out]


def _constants(cfg, G, g_B, domain, samples, seed):
    policy = dict(cfg.get("constants", {"policy": "measured"}))
    kind = policy.pop("policy", "measured")
    if kind == "supplied":
        bad = set(policy) - {"K", "A", "B", "C1"}
        if bad:
            raise ConfigurationError(f"unknown constants: {sorted(bad)}")
        need = {"K", "A", "B", "C1"} - set(policy)
        if need:
            raise ConfigurationError(f"supplied constants missing {sorted(need)}")
        return {k: float(v) for k, v in policy.items()}, None
    if kind != "measured":
        raise ConfigurationError(f"unknown constants policy {kind!r}")
    wG = equivalence.measure_curvature_window(equivalence.finsler_curvature(G), domain,
                                              samples, seed)
    wB = equivalence.measure_curvature_window(equivalence.kahler_curvature(g_B), domain,
                                              samples, seed)
    for name, w in (("Finsler metric", wG), ("Bergman metric", wB)):
        if w["precondition_violated"]:
            raise PreconditionViolation(
                f"{name} holomorphic sectional curvature is not negative "
                f"(max {w['max']:.6g}); the curvature windows need -K < 0 and Sec <= -B < 0")
    return {"K": wG["K"], "A": wB["A"], "B": wB["B"], "C1": wB["C1"]}, (wG, wB)


def cmd_verify(cfg):
    domain = build_domain(cfg)
    tags = _selected(cfg)
    samples = int(cfg.get("samples", 100))
    tol = float(cfg.get("tolerance", 1e-8))
    ms, vs = equivalence.split_seeds(cfg["seed"])
    g_B, is_bergman = build_field(cfg, domain)
    if not is_bergman:
        raise ConfigurationError("verify needs a Bergman kernel (closed-form or numerical)")
    G = build_metric(cfg, domain)
    k, _ = _constants(cfg, G, g_B, domain, samples, ms)
    C = float(cfg.get("C", k["K"] / (2 * k["B"])))
    recs = [{"record": "constants", "measurement_seed": ms, "verification_seed": vs,
             "C": C, **k}]
    for tag in tags:
        recs.extend(SUITES[tag](domain, G, g_B, k, C, samples, vs, tol, cfg))
    return recs, None


def _t31(domain, G, g_B, k, C, samples, seed, tol, cfg):
    pts, vecs = sample_pairs(domain, min(samples, 20), seed)
    worst, ok = None, True
    for z, v in zip(pts, vecs):
        est = squeezing.squeeze_optimize(domain, z, int(cfg.get("budget", 200)), seed)
        rep = bergman.bergman_curvatures(g_B, z, v)
        good = rep.within(bergman.zhang_bounds(domain.dim, est.lower), 1e-6)
        if not good and worst is None:
            worst = {"point": z, "direction": v, "sec": rep.sec, "squeeze_lower": est.lower}
        ok = ok and good
    return [check("T3.1", verdict_of(ok), samples=len(pts), witness=worst)]


def _t41(domain, G, g_B, k, C, samples, seed, tol, cfg):
    if domain.dim < 2:
        return [check("T4.1", "inconclusive", reason="needs dimension >= 2")]
    rep = kahler.pinching_constants_check(g_B, domain, samples, seed)
    rng = np.random.default_rng(seed)
    pts = domain.sample_interior(min(samples, 100), seed=int(rng.integers(2**31)))
    res = 0.0
    for z in pts:
        T = kahler.curvature_tensor(g_B, z)
        X, Y = rng.standard_normal((2, domain.dim)) + 1j * rng.standard_normal((2, domain.dim))
        res = max(res, max(kahler.polarization_check(T, X, Y)))
    ok = rep.passed and res < 1e-8
    return [check("T4.1", verdict_of(ok), C=rep.C, max_mixed=rep.max_mixed,
                  max_bisect=rep.max_bisect, max_real_sec=rep.max_real_sec,
                  max_polarization_residual=res)]


def _t61(domain, G, g_B, k, C, samples, seed, tol, cfg):
    out = equivalence.schwarz_check(g_B, k["C1"], G, k["K"], domain, samples, seed, tol)
    recs = [check("T6.1", verdict_of(out["passed"]), target="metric", max_ratio=out["max_ratio"],
                  factor=out["factor"], witness=list(out["argmax"]))]
    if isinstance(domain, Ball) and domain.radius == 1.0 and not np.any(domain.offset):
        target = finsler.CallableModel(invariant.BallKobayashiModel(), domain.dim, domain)
        K1 = 4.0 / (domain.dim + 1)                    # doubled ball-Bergman HSC is -4/(n+1)
        out = equivalence.schwarz_check(g_B, K1, target, 4.0, domain, samples, seed, tol)
        recs.append(check("T6.1", verdict_of(out["passed"]), target="kobayashi",
                          max_ratio=out["max_ratio"], min_ratio=out["min_ratio"]))
    return recs


def _t64(domain, G, g_B, k, C, samples, seed, tol, cfg):
    conf = equivalence.EquivalenceConfig(C=C, K=k["K"], B=k["B"], C1=k["C1"])
    try:
        H = equivalence.build_H(G, g_B, conf, domain)
    except ConfigurationError as exc:
        raise PreconditionViolation(f"T6.4 window: {exc}") from None
    rep = equivalence.verify_sandwich(H, g_B, conf, domain, samples, seed)
    return [check("T6.4", verdict_of(rep.passed), ratio_min=rep.ratio_min,
                  ratio_max=rep.ratio_max, C2=conf.C2, sides=rep.checks,
                  max_curvature_H=rep.extras["max_curvature_H"],
                  curvature_bound=rep.extras["curvature_bound"],
                  witness_max=list(rep.argmax))]


def _t65(domain, G, g_B, k, C, samples, seed, tol, cfg):
    hyp = invariant.hyperbolicity_check(domain, finsler.HermitianModel(g_B), None,
                                        min(samples, 100), seed, tol)
    recs = [check("T6.5", verdict_of(hyp["passed"]), part="kobayashi-lower", B=hyp["B"],
                  min_margin=hyp["min_margin"])]
    conf = equivalence.EquivalenceConfig(C=C, K=k["K"], B=k["B"], C1=k["C1"])
    H = equivalence.build_H(G, g_B, conf, domain)
    dirs = sphere_directions(domain.dim, 2, seed)
    probe = equivalence.completeness_probe(H, domain, dirs)
    recs.append(check("T6.5", verdict_of(probe["divergent"]), part="completeness",
                      kappas=[r["kappa"] for r in probe["rays"]],
                      r2=[r["r2"] for r in probe["rays"]]))
    # pairs on real diameters, where straight segments are geodesic on model domains
    z0 = np.zeros(domain.dim, complex)
    pairs = []
    for u in sphere_directions(domain.dim, 3, seed + 1):
        T = domain.ray_exit(z0, u)
        pairs.append((-0.3 * T * u, 0.6 * T * u))
    hmodel = finsler.HermitianModel(g_B)
    dist = equivalence.distance_comparison_check(domain, hmodel, hyp["B"], pairs)
    verdicts = {r["verdict"] for r in dist["pairs"]}
    recs.append(check("T6.5", "pass" if dist["all_hold"] else "inconclusive", part="distance",
                      verdicts=sorted(verdicts)))
    return recs


def _t71(domain, G, g_B, k, C, samples, seed, tol, cfg):
    out = equivalence.kobayashi_kahler_equivalence(domain, g_B, min(samples, 100), seed,
                                                   A=k["A"], B=k["B"], tol=1e-6)
    return [check("T7.1", verdict_of(out["passed"]), A=out["A"], B=out["B"],
                  min_lower_margin=out["min_lower_margin"],
                  min_upper_margin=out["min_upper_margin"])]


def _t72(domain, G, g_B, k, C, samples, seed, tol, cfg):
    try:
        out = equivalence.caratheodory_H_check(domain, g_B, None, min(samples, 100), seed,
                                               A=k["A"], B=k["B"])
    except ConfigurationError as exc:
        raise PreconditionViolation(f"T7.2 window: {exc}") from None
    return [check("T7.2", verdict_of(out["passed"]), C=out["C"], C3=out["C3"],
                  ratio_min=out["ratio_min"], ratio_max=out["ratio_max"])]


SUITES = {"T3.1": _t31, "T4.1": _t41, "T6.1": _t61, "T6.4": _t64, "T6.5": _t65,
          "T7.1": _t71, "T7.2": _t72}
COMMANDS = {"curvature": cmd_curvature, "verify": cmd_verify, "squeeze": cmd_squeeze,
            "kobayashi": cmd_kobayashi}


# -- entry point --------------------------------------------------------------

def render(records, table, fmt):
    if fmt == "delimited":
        if table is None:
            rows = [r for r in records if r.get("record") == "check"]
            rows = [dict(r, target=r.get("target", "")) for r in rows]
            return delimited(rows, ["check", "target", "verdict"])
        return delimited(*table)
    return "".join(record_line(r) + "\n" for r in records)


def load_report(text):
    """Parse a records-format report back into a list of dicts."""
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def run(command, cfg):
    """Run a validated config; returns (records, table, exit code)."""
    records, table = COMMANDS[command](cfg)
    records = [header(command, cfg)] + records
    s = summary(records)
    records.append(s)
    return records, table, EXIT_PASS if s["passed"] else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="finslerlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"finslerlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True,
                       help=f"JSON config; relative paths also searched in ${CONFIG_DIR_ENV}")
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--tolerance", type=float)
        s.add_argument("--output", help="write the report here instead of stdout")
        s.add_argument("--format", choices=("records", "delimited"), default="records")
        s.add_argument("--checks", help="comma-separated check tags (verify only)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = merge_flags(load_config(args.config), args)
        records, table, code = run(args.command, cfg)
    except (ConfigurationError, InputError, PreconditionViolation, OSError) as exc:
        print(f"finslerlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegeneracyError as exc:
        print(f"finslerlab: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except FinslerLabError as exc:
        print(f"finslerlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(records, table, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"finslerlab: {args.command} finished in {time.perf_counter() - start:.2f} s "
          f"(exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
