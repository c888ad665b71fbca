"""Command-line runner: ``hypconc run | acceptance | list-models``."""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .acceptance import run_suite, suite_names
from .bounds import (BoundValue, a0, c_const, concentration_bound, d_const, frostman_exponent,
                     simple_concentration_bound)
from .hypspace import Mobius, Word, plane_model, tree_model
from .matprod import (MatrixMeasure, estimate_c_matrix, example_measure,
                      matrix_concentration_check, reference_lyapunov)
from .pingpong import tits_experiment
from .poisson import FiniteChain, azuma_experiment, estimate_c_walk, random_chain
from .report import TailRow, rows_to_csv
from .spectral import kesten_norm, lazy_norm, return_prob_estimate
from .walk import FiniteMeasure, drift_continuity_scan, empirical_tails, estimate_drift

KINDS = ("drift", "tail", "bounds-table", "poisson", "matrix", "frostman", "tits",
         "continuity", "spectral")


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"config line {line}: {msg}" if line else f"config: {msg}")


class Config:
    """Parsed JSON config that remembers the source text for line diagnostics."""

    def __init__(self, text, path=None):
        self.text = text
        self.path = path
        try:
            self.data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, e.lineno) from None
        if not isinstance(self.data, dict):
            raise ConfigError("top level must be an object", 1)

    def line_of(self, key):
        needle = f'"{key}"'
        for i, line in enumerate(self.text.splitlines(), start=1):
            if needle in line:
                return i
        return None

    def fail(self, key, msg):
        raise ConfigError(f"{key}: {msg}", self.line_of(key))

    def get(self, key, default=None, required=False):
        if key not in self.data:
            if required:
                raise ConfigError(f"missing required key {key!r}")
            return default
        return self.data[key]

    def grid(self, key, default=None, cast=float):
        v = self.get(key, default, required=default is None)
        if not isinstance(v, list) or not v:
            self.fail(key, "must be a nonempty list")
        try:
            return [cast(x) for x in v]
        except (TypeError, ValueError):
            self.fail(key, "entries must be numbers")


def load_config(path):
    if not os.path.exists(path):
        raise ConfigError(f"file not found: {path}")
    with open(path) as fh:
        return Config(fh.read(), path)


# ---------------------------------------------------------------------------
# model and measure specs


def build_model(cfg):
    spec = cfg.get("model", {"kind": "tree", "rank": 2})
    kind = spec.get("kind", "tree")
    if kind == "tree":
        return tree_model(int(spec.get("rank", 2)))
    if kind == "plane":
        return plane_model(float(spec.get("delta", 0.7)))
    if kind == "matrix":
        return None
    cfg.fail("model", f"unknown model kind {kind!r}")


def build_measure(cfg, model):
    spec = cfg.get("measure", {"srw": True})
    if not isinstance(spec, dict):
        cfg.fail("measure", "must be an object")
    if model is None:
        if spec.get("example"):
            return example_measure()
        try:
            return MatrixMeasure.from_spec(spec)
        except (KeyError, ValueError) as e:
            cfg.fail("measure", str(e))
    lazy = float(spec.get("lazy", 0.0))
    try:
        if model.kind == "tree":
            k = model.rank
            if spec.get("srw"):
                mu = FiniteMeasure.srw(k)
            elif "dirac" in spec:
                mu = FiniteMeasure.dirac(Word.parse(spec["dirac"], k))
            elif "atoms" in spec:
                mu = FiniteMeasure.from_dict({Word.parse(w, k): float(p) for w, p in spec["atoms"].items()})
            else:
                cfg.fail("measure", "tree measures need 'srw', 'dirac' or 'atoms'")
        else:
            atoms = spec.get("atoms")
            if not atoms:
                cfg.fail("measure", "plane measures need 'atoms' of 2x2 matrices")
            mu = FiniteMeasure(tuple((Mobius.from_matrix(a["matrix"]), float(a["weight"])) for a in atoms))
        return mu.lazy(lazy)
    except (ValueError, TypeError, KeyError) as e:
        cfg.fail("measure", str(e))


def _norm_for(mu, cfg):
    """Upper bound on the lazy operator norm: configured, or Kesten for SRW."""
    lam = cfg.get("lambda")
    if lam is not None:
        return float(lam), "lambda configured"
    s = mu.is_srw() if isinstance(mu, FiniteMeasure) else None
    if s is not None:
        k, r = s
        return lazy_norm(kesten_norm(k), r, free_srw=True).value, "lambda exact (Kesten)"
    return 1.0, "lambda unknown, taken as 1"


# ---------------------------------------------------------------------------
# experiments: each returns (rows, results, invariants)


def exp_drift(cfg, mu, model, seed):
    n_grid = cfg.grid("n", cast=int)
    trials = int(cfg.get("trials", 200))
    out = []
    for n in n_grid:
        est = estimate_drift(mu, n, trials, seed)
        out.append({"n": n, "ell_hat": est.value, "radius99": est.radius, "trials": trials})
    return [], {"drift": out}, {"finite": all(math.isfinite(o["ell_hat"]) for o in out)}


def exp_tail(cfg, mu, model, seed):
    n_grid = cfg.grid("n", cast=int)
    t_grid = cfg.grid("t")
    trials = int(cfg.get("trials", 10_000))
    rows = empirical_tails(mu, n_grid, t_grid, trials, seed, cfg.get("ell"))
    kap = mu.kappa_S
    results = {"kappa_S": kap}
    c = cfg.get("c")
    if c is None and mu.kind == "tree":
        est = estimate_c_walk(mu, samples=int(cfg.get("c_samples", 20_000)), seed=seed)
        c, results["c_radius99"] = est.value, est.radius
    if c is not None:
        results["c"] = float(c)
        for row in rows:
            row.attach(simple_concentration_bound(row.n, row.t, kap, float(c)))
    lam, how = _norm_for(mu, cfg)
    A = a0(model)
    D = d_const(kap, lam, A)
    results.update({"lambda": lam, "lambda_source": how, "A0": A, "D": _jnum(D)})
    d_rows = []
    for row in rows:
        r2 = TailRow(row.experiment, row.n, row.t, row.empirical, row.wilson_radius,
                     assumptions=[a for a in row.assumptions if not a.startswith(("kappa=", "c="))],
                     trials=row.trials)
        d_rows.append(r2.attach(concentration_bound(row.n, row.t, kap, D)))
    rows = rows + d_rows
    return rows, results, {"bounds dominate (3 sigma)": all(r.dominated("3sigma") for r in rows)}


def exp_bounds_table(cfg, mu, model, seed):
    n_grid = cfg.grid("n", cast=int)
    t_grid = cfg.grid("t")
    kap = float(cfg.get("kappa", mu.kappa_S if mu is not None else 1.0))
    lam = cfg.get("lambda")
    if lam is None:
        lam, _ = _norm_for(mu, cfg)
    lam = float(lam)
    A = float(cfg.get("A0", a0(model) if model is not None else 1.0))
    D = d_const(kap, lam, A)
    C = c_const(kap, lam, A) if lam < 1 else math.inf
    rows = []
    for n in n_grid:
        for t in t_grid:
            row = TailRow("bounds-table", n, t, math.nan, math.nan, trials=0)
            rows.append(row.attach(concentration_bound(n, t, kap, D)))
            row = TailRow("bounds-table", n, t, math.nan, math.nan, trials=0)
            # the proof's substitution c = 2 C(kappa, lambda)
            b = (simple_concentration_bound(n, t, kap, 2 * C) if math.isfinite(C)
                 else BoundValue(1.0, "c-form", True, (f"kappa={kap!r}", "C=inf", "C infinite")))
            rows.append(row.attach(b))
    results = {"kappa": kap, "lambda": lam, "A0": A, "D": _jnum(D), "C": _jnum(C)}
    return rows, results, {"bounds in [0, 1]": all(0 <= r.bound <= 1 for r in rows)}


def exp_poisson(cfg, mu, model, seed):
    if "P" in cfg.data:
        try:
            chain = FiniteChain(cfg.get("P"), cfg.get("f", required=True))
        except ValueError as e:
            cfg.fail("P", str(e))
    else:
        chain = random_chain(int(cfg.get("states", 5)), seed)
    rep = azuma_experiment(chain, cfg.grid("n", cast=int), cfg.grid("t"),
                           int(cfg.get("trials", 100_000)), int(cfg.get("start", 0)), seed)
    results = {"alpha": rep.solution.alpha, "phi": rep.solution.phi.tolist(),
               "residual": rep.solution.residual,
               "max_decomposition_error": rep.max_decomposition_error}
    inv = {"residual <= 1e-10": rep.solution.residual <= 1e-10,
           "decomposition error <= 1e-9": rep.max_decomposition_error <= 1e-9,
           "bounds dominate (3 Wilson)": all(r.empirical <= min(1, r.bound) + 3 * r.wilson_radius
                                             for r in rep.rows)}
    return rep.rows, results, inv


def exp_matrix(cfg, mu, model, seed):
    ell = cfg.get("ell")
    if ell is None:
        ell = reference_lyapunov(mu, seed).value
    c = cfg.get("c")
    clipped = 0
    if c is None:
        est = estimate_c_matrix(mu, samples=int(cfg.get("c_samples", 20_000)), seed=seed)
        c, clipped = est.value, est.clipped
    rows = matrix_concentration_check(mu, cfg.grid("n", cast=int), cfg.grid("t"),
                                      int(cfg.get("trials", 100_000)), seed, float(ell), float(c))
    results = {"lyapunov": float(ell), "c": float(c), "clipped": clipped, "kappa_S": mu.kappa_S}
    return rows, results, {"bounds dominate (3 sigma)": all(r.dominated("3sigma") for r in rows),
                           "no clipped samples": clipped == 0}


def exp_frostman(cfg, mu, model, seed):
    lam, how = _norm_for(mu, cfg)
    s = frostman_exponent(mu.kappa_S, {0.0: lam}) if lam < 1 else 0.0
    return [], {"frostman_exponent": s, "lambda": lam, "lambda_source": how}, {"s >= 0": s >= 0}


def exp_tits(cfg, mu, model, seed):
    rep = tits_experiment(mu, int(cfg.get("n", 200)), int(cfg.get("trials", 10_000)), seed,
                          L=int(cfg.get("L", 6)), delta=model.delta)
    results = {"frequency": rep.frequency, "sigma": rep.sigma, "certified": rep.certified,
               "certified_at_Dn": rep.certified_at_Dn, "oracle_failures": rep.oracle_failures,
               "notes": rep.notes}
    rows = []
    if rep.bounds is not None:
        for b in (rep.bounds.prop, rep.bounds.thm):
            results[b.kind] = {"value": b.value, "vacuous": b.vacuous}
    return rows, results, {"oracle failures = 0": rep.oracle_failures == 0,
                           "empirical >= bounds - 3 sigma": rep.consistent()}


def exp_continuity(cfg, mu, model, seed):
    rs = cfg.grid("r", [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
    scan = drift_continuity_scan([(r, mu.lazy(r)) for r in rs], int(cfg.get("n", 10_000)),
                                 int(cfg.get("trials", 200)), seed)
    results = {"r": list(scan.params), "drift": list(scan.drifts), "radius99": list(scan.radii),
               "max_jump": scan.max_jump}
    return [], results, {"finite": all(math.isfinite(d) for d in scan.drifts)}


def exp_spectral(cfg, mu, model, seed):
    est = return_prob_estimate(mu, int(cfg.get("n_max", 20)), form=cfg.get("form", "reflected"))
    vals = [e.value for e in est]
    results = {"estimates": vals, "kind": "lower-estimate"}
    s = mu.is_srw()
    if s is not None and s[1] == 0:
        results["kesten_norm"] = kesten_norm(s[0]).value
    return [], results, {"terms in [0, 1]": all(0 <= v <= 1 for v in vals)}


RUNNERS = {
    "drift": exp_drift, "tail": exp_tail, "bounds-table": exp_bounds_table,
    "poisson": exp_poisson, "matrix": exp_matrix, "frostman": exp_frostman,
    "tits": exp_tits, "continuity": exp_continuity, "spectral": exp_spectral,
}


def _jnum(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def _versions():
    import numba
    import scipy
    return {"hypconc": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def _set_threads(n):
    if n is None:
        return
    import numba
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def run(cfg, seed=None, out=None, threads=None):
    """Run one experiment; returns (exit code, csv text, envelope dict)."""
    kind = cfg.get("experiment", required=True)
    if kind not in RUNNERS:
        cfg.fail("experiment", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    if seed is None:
        seed = cfg.get("seed", required=True)
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        cfg.fail("seed", "must be an unsigned 64-bit integer")
    _set_threads(threads)
    model = build_model(cfg)
    mu = None
    if kind != "poisson" and not (kind == "bounds-table" and "measure" not in cfg.data):
        mu = build_measure(cfg, model)
        if kind not in ("matrix",) and model is None:
            cfg.fail("model", f"experiment {kind!r} needs a tree or plane model")
        if kind == "matrix" and model is not None:
            cfg.fail("model", "matrix experiments need model kind 'matrix'")
    t0 = time.perf_counter()
    rows, results, inv = RUNNERS[kind](cfg, mu, model, seed)
    wall = time.perf_counter() - t0
    text = rows_to_csv(rows)
    env = {"config": cfg.data, "seed": seed, "experiment": kind, "versions": _versions(),
           "wall_time_s": wall, "results": results, "invariants": inv, "rows": len(rows)}
    code = 0 if all(inv.values()) else 1
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, f"{kind}.csv"), "w") as fh:
            fh.write(text)
        with open(os.path.join(out, f"{kind}.json"), "w") as fh:
            json.dump(env, fh, indent=2, default=_json_default)
            fh.write("\n")
    return code, text, env


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def list_models():
    return "\n".join([
        "models:",
        "  tree    free group F_k acting on its Cayley tree; delta = 0, D0 = 1   {\"kind\": \"tree\", \"rank\": k}",
        "  plane   upper half-plane, basepoint i; delta configurable (default 0.7)   {\"kind\": \"plane\", \"delta\": d}",
        "  matrix  products of invertible d x d real matrices   {\"kind\": \"matrix\"}",
        "measures:",
        "  tree    {\"srw\": true} | {\"dirac\": \"ab\"} | {\"atoms\": {\"a\": 0.5, \"B\": 0.5}}; optional \"lazy\": r",
        "  plane   {\"atoms\": [{\"matrix\": [[a, b], [c, d]], \"weight\": w}, ...]}",
        "  matrix  {\"matrices\": [[[...]], ...], \"weights\": [...]} | {\"example\": true}",
        "experiments: " + ", ".join(KINDS),
        "acceptance suites: " + ", ".join(suite_names()),
    ])


def main(argv=None):
    p = argparse.ArgumentParser(prog="hypconc")
    sub = p.add_subparsers(dest="verb", required=True)
    pr = sub.add_parser("run", help="run one experiment from a JSON config")
    pr.add_argument("--config", required=True)
    pr.add_argument("--seed", type=int)
    pr.add_argument("--threads", type=int)
    pr.add_argument("--out", default="out")
    pa = sub.add_parser("acceptance", help="run acceptance suites")
    pa.add_argument("suites", nargs="*", help="suite names (default: all)")
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("--threads", type=int)
    pa.add_argument("--out")
    pa.add_argument("--quick", action="store_true", help="reduced trial counts")
    sub.add_parser("list-models", help="describe models, measures and suites")
    args = p.parse_args(argv)

    if args.verb == "list-models":
        print(list_models())
        return 0
    if args.verb == "run":
        try:
            cfg = load_config(args.config)
            code, _, env = run(cfg, args.seed, args.out, args.threads)
        except ConfigError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        print(json.dumps({"experiment": env["experiment"], "results": env["results"],
                          "invariants": env["invariants"]}, indent=2, default=_json_default))
        return code
    _set_threads(args.threads)
    names = args.suites or suite_names()
    bad = [n for n in names if n not in suite_names()]
    if bad:
        print(f"error: unknown suite {bad[0]!r}; available: {', '.join(suite_names())}", file=sys.stderr)
        return 2
    ok = True
    for name in names:
        res = run_suite(name, args.seed, args.quick)
        print(res.summary(), flush=True)
        ok &= res.passed
        if args.out and res.rows:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, f"acceptance-{name}.csv"), "w") as fh:
                fh.write(res.csv())
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
