"""Batch experiment driver.

    fracpot <subcommand> --config cfg.json [--out dir] [--seed n]

Each subcommand maps to library calls, writes ``<subcommand>.csv`` (``#``
header lines document the columns) and ``<subcommand>.json`` (summary
with ``"schema": 1``), and exits 0 only if every check passes.  Exit 1
means a check failed, 2 a bad configuration, 3 an unexpected numerical
error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .config import QuadratureConfig
from .errors import ConfigError, FracPotError
from .multiterm import MultiTermSpec

log = logging.getLogger("fracpot")

SCHEMA = 1


# ---------------------------------------------------------------------------
# Formatting


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


class Table:
    """Rows with a fixed column list and one description per column."""

    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []

    def add(self, **row):
        unknown = set(row) - {c for c, _ in self.columns}
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append(row)

    def write(self, path, title):
        with open(path, "w", newline="") as fh:
            fh.write(f"# fracpot {title}\n")
            for name, doc in self.columns:
                fh.write(f"# {name}: {doc}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([c for c, _ in self.columns])
            for r in self.rows:
                w.writerow([_fmt(r.get(c)) for c, _ in self.columns])


# ---------------------------------------------------------------------------
# Config helpers


def _spec(cfg):
    d = cfg.get("spec")
    if not isinstance(d, dict) or "orders" not in d or "weights" not in d:
        raise ConfigError("config needs spec.orders and spec.weights")
    return MultiTermSpec(tuple(map(float, d["orders"])), tuple(map(float, d["weights"])))


def _quad(cfg):
    return QuadratureConfig.from_dict(cfg.get("quad"))


def _need(cfg, key):
    if key not in cfg:
        raise ConfigError(f"config is missing {key!r}")
    return cfg[key]


def _status(exc):
    return "ok" if exc is None else type(exc).__name__


# ---------------------------------------------------------------------------
# Experiments; each returns (table, summary dict)


def run_wright_identities(cfg, rng):
    from .fractional import rl_integral_at
    from .wright import (WrightParams, decay_argument, moment_quadrature, wright_moment,
                         wright_neg, wright_profile, wright_rl_shift)

    tol_rec = cfg.get("recurrence_tol", 1e-10)
    tol_mom = cfg.get("moment_tol", 1e-6)
    tol_rl = cfg.get("rl_tol", 1e-5)
    tab = Table([("check", "recurrence | moment | rl_shift"),
                 ("beta", "order parameter"), ("delta", "shift parameter"),
                 ("arg", "z (recurrence) or nu (moment, rl_shift)"),
                 ("c", "argument scale for rl_shift"),
                 ("value", "left side"), ("reference", "right side or closed form"),
                 ("rel_err", "|value - reference| / |reference|"),
                 ("status", "ok or error class")])
    worst = {"recurrence": 0.0, "moment": 0.0, "rl_shift": 0.0}
    failed = 0

    def record(check, b, d, arg, c, fn):
        nonlocal failed
        try:
            v, r = fn()
            rel = abs(v - r) / abs(r) if r != 0 else abs(v)
            worst[check] = max(worst[check], rel)
            tab.add(check=check, beta=b, delta=d, arg=arg, c=c, value=v, reference=r,
                    rel_err=rel, status="ok")
        except FracPotError as exc:
            failed += 1
            tab.add(check=check, beta=b, delta=d, arg=arg, c=c, status=_status(exc))

    opts = dict(tol=1e-30, rtol=1e-13, max_terms=4096)
    for _ in range(int(cfg.get("n_recurrence", 100))):
        b = float(rng.uniform(0.05, 0.95))
        z = float(decay_argument(rng.uniform(0.0, 15.0), b))
        record("recurrence", b, 0.0, z, None, lambda b=b, z=z: (
            wright_neg(z, WrightParams(b, 0.0), **opts).value,
            z * b * wright_neg(z, WrightParams(b, 1.0 - b), **opts).value))
    for _ in range(int(cfg.get("n_moment", 20))):
        nu, b, d = float(rng.uniform(0.2, 3.0)), float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.0, 2.0))
        record("moment", b, d, nu, None, lambda nu=nu, b=b, d=d: (
            moment_quadrature(nu, WrightParams(b, d)).value, wright_moment(nu, WrightParams(b, d))))
    for _ in range(int(cfg.get("n_rl_shift", 10))):
        nu, c = float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.5, 2.0))
        b, d = float(rng.uniform(0.3, 0.9)), float(rng.uniform(-0.5, 1.5))

        def rl(nu=nu, c=c, b=b, d=d):
            p = WrightParams(b, d)
            v = rl_integral_at(lambda s: wright_profile(s, c, p), nu, 1.0).value
            return float(v), float(wright_rl_shift(nu, c, 1.0, p))
        record("rl_shift", b, d, nu, c, rl)
    ok = (worst["recurrence"] <= tol_rec and worst["moment"] <= tol_mom
          and worst["rl_shift"] <= tol_rl and failed == 0)
    return tab, {"metrics": {f"max_rel_err_{k}": v for k, v in worst.items()} | {"failed": failed},
                 "pass": ok,
                 "params": {"recurrence_tol": tol_rec, "moment_tol": tol_mom, "rl_tol": tol_rl}}


_KERNELS = {
    "E": ("kernel_E", 0), "E_x": ("kernel_E_dx", 1), "E_xx": ("kernel_E_dxx", 2),
    "Z": ("kernel_Z", 0), "Z_x": ("kernel_Z_dx", 1), "Z_xx": ("kernel_Z_dxx", 2),
}


def run_kernel_eval(cfg, rng):
    from . import kernels as K

    spec, quad = _spec(cfg), _quad(cfg)
    names = cfg.get("kernels", ["E", "Z"])
    xs = list(map(float, cfg.get("xs", [])))
    ts = list(map(float, cfg.get("ts", [])))
    tol_cf = cfg.get("closed_form_tol", 1e-6)
    tol_mass = cfg.get("mass_tol", 1e-5)
    tol_lap = cfg.get("laplacian_tol", 1e-5)
    tab = Table([("check", "value | mass | laplacian"), ("kernel", "kernel name"),
                 ("x", "space point"), ("t", "time"), ("value", "computed value"),
                 ("err_est", "quadrature error estimate"),
                 ("reference", "closed form (one term), 1 (mass) or right side (laplacian)"),
                 ("rel_err", "relative deviation from reference"), ("status", "ok or error class")])
    worst = {"closed_form": 0.0, "mass": 0.0, "laplacian": 0.0}
    failed = 0
    for name in names:
        if name not in _KERNELS:
            raise ConfigError(f"unknown kernel {name!r}")
        fn = getattr(K, _KERNELS[name][0])
        for t in ts:
            for x in xs:
                try:
                    r = fn(x, t, spec, quad)
                    ref = rel = None
                    if spec.m == 1 and name in ("E", "E_x", "Z", "Z_x"):
                        ref = K.single_term_closed_form(name, x, t, spec.orders[0], spec.weights[0])
                        rel = abs(r.value - ref) / max(abs(ref), 1e-300) if ref != 0 else abs(r.value)
                        worst["closed_form"] = max(worst["closed_form"], rel)
                    tab.add(check="value", kernel=name, x=x, t=t, value=r.value, err_est=r.err_est,
                            reference=ref, rel_err=rel, status="ok")
                except FracPotError as exc:
                    failed += 1
                    tab.add(check="value", kernel=name, x=x, t=t, status=_status(exc))
    for t in map(float, cfg.get("mass_ts", [])):
        r = K.mass_Z(t, spec, quad)
        rel = abs(r.value - 1.0)
        worst["mass"] = max(worst["mass"], rel)
        tab.add(check="mass", kernel="Z", t=t, value=r.value, err_est=r.err_est,
                reference=1.0, rel_err=rel, status="ok")
    lap = cfg.get("laplacian")
    if lap:
        mu = float(_need(lap, "mu"))
        for x, t in lap.get("points", []):
            lhs = K.gamma1(mu, x, t, spec, quad, order=2)
            rhs = sum(lam * K.gamma1(mu - a, x, t, spec, quad).value
                      for a, lam in zip(spec.orders, spec.weights))
            rel = abs(lhs.value - rhs) / abs(rhs)
            worst["laplacian"] = max(worst["laplacian"], rel)
            tab.add(check="laplacian", kernel=f"gamma1(mu={mu!r})", x=float(x), t=float(t),
                    value=lhs.value, err_est=lhs.err_est, reference=rhs, rel_err=rel, status="ok")
    ok = (failed == 0 and worst["closed_form"] <= tol_cf and worst["mass"] <= tol_mass
          and worst["laplacian"] <= tol_lap)
    return tab, {"metrics": worst | {"failed": failed}, "pass": ok,
                 "params": {"closed_form_tol": tol_cf, "mass_tol": tol_mass,
                            "laplacian_tol": tol_lap}}


def run_estimate_sweep(cfg, rng):
    from .estimates import KINDS, EstimateParams, stability

    spec = _spec(cfg)
    quad = QuadratureConfig.from_dict(cfg["quad"]) if "quad" in cfg else None
    kinds = cfg.get("kinds", [k for k in KINDS if k.startswith("ls")])
    frac = float(cfg.get("kappa_fraction", 0.8))
    T = float(cfg.get("T", 1.0))
    mu = float(cfg.get("mu", 0.0))
    n = int(cfg.get("n", 20))
    tol = float(cfg.get("stability_tol", 0.1))
    tab = Table([("kind", "bound"), ("x", "space point"), ("t", "time"),
                 ("ratio", "|kernel| / majorant on the n x n grid (empty if unreliable)")])
    fitted, changes, flags = {}, {}, {}
    for kind in kinds:
        params = EstimateParams.at_fraction(spec, kind, frac, T, mu)
        change, coarse, fine = stability(kind, spec, params, n, quad)
        for i, t in enumerate(coarse.ts):
            for j, x in enumerate(coarse.xs):
                r = coarse.ratios[i, j]
                tab.add(kind=kind, x=x, t=t, ratio=None if np.isnan(r) else r)
        fitted[kind] = {"C": coarse.C, "C_fine": fine.C, "argmax": coarse.argmax,
                        "failed_points": coarse.failed, "kappa": params.kappa}
        changes[kind] = change
        flags[kind] = coarse.flags
    ok = all(math.isfinite(f["C"]) for f in fitted.values()) and all(c < tol for c in changes.values())
    return tab, {"metrics": {"stability_change": changes}, "pass": ok,
                 "fitted_constants": fitted, "flags": flags,
                 "params": {"kappa_fraction": frac, "T": T, "mu": mu, "n": n}}


def run_window_identity(cfg, rng):
    from .multiterm import s0_window_direct, s0_window_nested
    from .potentials import ej1_window

    spec, quad = _spec(cfg), _quad(cfg)
    tol = float(cfg.get("tol", 1e-5 if spec.m == 1 else 1e-4))
    t = float(cfg.get("t", 1.0))
    cases = cfg.get("cases")
    if cases is None:
        cases = []
        for _ in range(int(cfg.get("n_cases", 10))):
            cases.append({"delta": float(rng.uniform(0.05, 0.95)) * t,
                          "p": float(10 ** rng.uniform(-1.0, 0.5))})
    tab = Table([("check", "window | ej1"), ("t", "time"), ("delta", "window length"),
                 ("p", "Laplace-side parameter (arguments lambda_k p)"),
                 ("y", "offset from the boundary (ej1)"),
                 ("direct", "quadrature of the kernel over the window"),
                 ("nested", "iterated tail representation"),
                 ("abs_diff", "|direct - nested| (window) or value - 1/2 (ej1)"),
                 ("status", "ok or error class")])
    worst, worst_ej1, failed = 0.0, -math.inf, 0
    for c in cases:
        d, p = float(c["delta"]), float(c["p"])
        lfs = [lam * p for lam in spec.weights]
        try:
            a = s0_window_direct(t, d, lfs, spec.orders, quad)
            b = s0_window_nested(d, lfs, spec.orders, quad)
            diff = abs(a.value - b.value)
            worst = max(worst, diff)
            tab.add(check="window", t=t, delta=d, p=p, direct=a.value, nested=b.value,
                    abs_diff=diff, status="ok")
        except FracPotError as exc:
            failed += 1
            tab.add(check="window", t=t, delta=d, p=p, status=_status(exc))
    ej = cfg.get("ej1")
    ej_tol = 1e-4
    if ej:
        ej_tol = float(ej.get("tol", 1e-4))
        for y in ej["ys"]:
            for d in ej["deltas"]:
                r = ej1_window(float(y), float(d), float(ej.get("t", t)), spec, quad)
                worst_ej1 = max(worst_ej1, r.value - 0.5)
                tab.add(check="ej1", t=float(ej.get("t", t)), delta=float(d), y=float(y),
                        direct=r.value, abs_diff=r.value - 0.5, status="ok")
    ok = failed == 0 and worst <= tol and worst_ej1 <= ej_tol
    return tab, {"metrics": {"max_abs_diff": worst, "max_ej1_excess": worst_ej1, "failed": failed},
                 "pass": ok, "params": {"tol": tol, "ej1_tol": ej_tol, "t": t}}


def run_jump_table(cfg, rng):
    from .potentials import boundary_from_dict, density_from_dict, jump_limit_E

    spec, quad = _spec(cfg), _quad(cfg)
    t = float(_need(cfg, "t"))
    T = float(cfg.get("T", t))
    s = boundary_from_dict(_need(cfg, "boundary"), T)
    phi = density_from_dict(_need(cfg, "density"), spec.alpha_m)
    tol = float(cfg.get("tol", 1e-2))
    n = int(cfg.get("n", 10))
    tab = Table([("side", "left: x < s(t), right: x > s(t)"), ("k", "refinement index"),
                 ("offset", "x - s(t)"), ("value", "x-derivative of the E-potential"),
                 ("err_est", "quadrature error estimate"),
                 ("discrepancy", "|value - (+-phi(t)/2 + on-boundary integral)|")])
    reports = {}
    ok = True
    from .potentials import approach_offsets
    for side in cfg.get("sides", ["left", "right"]):
        offs = approach_offsets(t, spec, cfg.get("d0"), n, side)
        r = jump_limit_E(phi, s, t, spec, side, offs, quad, strict=False)
        for k, (o, v, e, dd) in enumerate(zip(r.offsets, r.values, r.errors, r.discrepancies)):
            tab.add(side=side, k=k, offset=o, value=v, err_est=e, discrepancy=dd)
        good = r.discrepancy <= tol * max(1.0, abs(r.phi_t)) and r.monotone
        ok = ok and good
        reports[side] = {"limit": r.limit, "predicted": r.predicted, "direct": r.direct,
                         "phi_t": r.phi_t, "discrepancy": r.discrepancy, "order": r.order,
                         "monotone": r.monotone, "hypothesis_ok": r.hypothesis_ok,
                         "pass": good, "flags": r.flags}
    return tab, {"metrics": reports, "pass": ok, "params": {"t": t, "tol": tol, "n": n}}


def run_continuity_table(cfg, rng):
    from .potentials import (approach_offsets, boundary_from_dict, continuity_check_Z,
                             density_from_dict)

    spec, quad = _spec(cfg), _quad(cfg)
    t = float(_need(cfg, "t"))
    T = float(cfg.get("T", t))
    tol = float(cfg.get("tol", 1e-2))
    n = int(cfg.get("n", 20))
    cases = _need(cfg, "cases")
    if not cases:
        raise ConfigError("continuity-table needs at least one case")
    tab = Table([("case", "case index"), ("boundary", "boundary kind"),
                 ("density", "density kind"), ("side", "left or right"),
                 ("k", "refinement index"), ("offset", "x - s(t)"),
                 ("value", "x-derivative of the Z-potential"), ("err_est", "error estimate"),
                 ("discrepancy", "|value - on-boundary value|")])
    metrics = []
    ok = True
    for i, c in enumerate(cases):
        s = boundary_from_dict(c["boundary"], T)
        phi = density_from_dict(c["density"], spec.alpha_m)
        offs = approach_offsets(t, spec, cfg.get("d0"), n, "right")
        r = continuity_check_Z(phi, s, t, spec, offs, quad)
        for rep in (r.left, r.right):
            for k, (o, v, e, dd) in enumerate(zip(rep.offsets, rep.values, rep.errors,
                                                  rep.discrepancies)):
                tab.add(case=i, boundary=s.name, density=phi.name, side=rep.side, k=k,
                        offset=o, value=v, err_est=e, discrepancy=dd)
        good = r.discrepancy <= tol
        ok = ok and good
        metrics.append({"case": i, "boundary": s.name, "density": phi.name,
                        "boundary_value": r.boundary_value, "left_limit": r.left.limit,
                        "right_limit": r.right.limit, "discrepancy": r.discrepancy,
                        "pass": good})
    return tab, {"metrics": {"cases": metrics}, "pass": ok, "params": {"t": t, "tol": tol, "n": n}}


def run_solve(cfg, rng):
    from .solver import data_from_dict, solve

    spec, quad = _spec(cfg), _quad(cfg)
    T = float(_need(cfg, "T"))
    data, exact = data_from_dict(_need(cfg, "problem"), spec, T)
    xs = np.asarray(_need(cfg, "xs"), float)
    ts = np.asarray(_need(cfg, "ts"), float)
    tol = float(cfg.get("tol", 5e-3))
    r = solve(data, spec, xs, ts, quad)
    tab = Table([("x", "space point"), ("t", "time"), ("value", "solution"),
                 ("err_est", "quadrature error estimate"),
                 ("exact", "known solution, if any"), ("abs_err", "|value - exact|")])
    worst = 0.0
    for i, t in enumerate(ts):
        for j, x in enumerate(xs):
            ex = err = None
            if exact is not None:
                ex = float(exact(x, t))
                err = abs(r.value[i, j] - ex)
                worst = max(worst, err)
            tab.add(x=x, t=t, value=r.value[i, j], err_est=r.err_est[i, j], exact=ex, abs_err=err)
    ok = exact is None or worst <= tol
    return tab, {"metrics": {"max_abs_err": worst if exact is not None else None,
                             "max_err_est": float(np.max(r.err_est))},
                 "pass": ok, "params": {"T": T, "tol": tol}}


def run_residual(cfg, rng):
    from .fractional import TimeGrid
    from .solver import data_from_dict, residual, solve

    spec, quad = _spec(cfg), _quad(cfg)
    T = float(_need(cfg, "T"))
    data, _ = data_from_dict(_need(cfg, "problem"), spec, T)
    xg = _need(cfg, "x")
    xs = np.linspace(float(xg["lo"]), float(xg["hi"]), int(xg["n"]))
    Ns = [int(n) for n in cfg.get("Ns", [8, 16, 32])]
    grading = float(cfg.get("grading", 2.0 / spec.alpha_m))
    t_min = float(cfg.get("t_min", 0.1 * T))
    tab = Table([("N", "time intervals"), ("max_residual", "max |residual| on the interior subgrid"),
                 ("initial_error", "max |u(x, t_1) - u0(x)|")])
    res = []
    for N in Ns:
        grid = TimeGrid.graded(T, N, grading)
        sol = solve(data, spec, xs, grid.nodes[1:], quad).value
        u0 = data.u0(xs) if data.u0 is not None else np.zeros_like(xs)
        u = np.vstack([u0, sol])
        rep = residual(u, data, spec, grid, xs, t_min)
        res.append(rep.max_residual)
        tab.add(N=N, max_residual=rep.max_residual, initial_error=rep.initial_error)
    rates = [math.log2(a / b) for a, b in zip(res, res[1:]) if a > 0 and b > 0]
    ok = all(b < a for a, b in zip(res, res[1:]))
    return tab, {"metrics": {"residuals": res, "observed_rates": rates}, "pass": ok,
                 "params": {"T": T, "Ns": Ns, "grading": grading, "t_min": t_min}}


EXPERIMENTS = {
    "wright-identities": run_wright_identities,
    "kernel-eval": run_kernel_eval,
    "estimate-sweep": run_estimate_sweep,
    "window-identity": run_window_identity,
    "jump-table": run_jump_table,
    "continuity-table": run_continuity_table,
    "solve": run_solve,
    "residual": run_residual,
}


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not text.strip():
        raise ConfigError("config file is empty")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict) or not cfg:
        raise ConfigError("config must be a non-empty JSON object")
    return cfg


def run(subcommand, cfg, out_dir, seed=0):
    """Run one experiment, write its outputs and return whether it passed."""
    if subcommand not in EXPERIMENTS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    exp = cfg.get("experiment", subcommand)
    if exp != subcommand:
        raise ConfigError(f"config is for {exp!r}, not {subcommand!r}")
    rng = np.random.default_rng(seed)
    table, summary = EXPERIMENTS[subcommand](cfg, rng)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table.write(out / f"{subcommand}.csv", subcommand)
    doc = {"schema": SCHEMA, "experiment": subcommand, "seed": seed,
           "params": summary.get("params", {}), "config": cfg,
           "metrics": summary.get("metrics", {}), "pass": bool(summary["pass"]),
           "flags": summary.get("flags", []),
           "fitted_constants": summary.get("fitted_constants", {}),
           "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    (out / f"{subcommand}.json").write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")
    return bool(summary["pass"])


def _threads():
    n = os.environ.get("FRACPOT_THREADS")
    if n:
        import numba
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def main(argv=None):
    parser = argparse.ArgumentParser(prog="fracpot", description=__doc__.split("\n\n")[0])
    parser.add_argument("subcommand", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomized suites")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        _threads()
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        passed = run(args.subcommand, cfg, args.out, seed)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2
    except FracPotError as exc:
        log.error("numerical failure: %s: %s", type(exc).__name__, exc)
        return 3
    log.info("%s: %s", args.subcommand, "pass" if passed else "FAIL")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
