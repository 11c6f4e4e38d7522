"""Experiment orchestration: JSON config in, reports out.

Subcommands:

* ``hk-lab run --config cfg.json [--out dir] [--seed k]`` builds the space,
  order field, kernel and form once, runs the configured checks in order,
  writes one report file per check plus a summary, and exits 0 iff every
  pass-mode check passed (diagnostic checks never fail the run), 2 on a
  config schema violation, 3 when a point cap is exceeded.
* ``hk-lab list-checks`` prints the catalog of checks with the inequality
  each one measures and its parameter schema.
* ``hk-lab counterexample report --epsilon e [--levels l] [--axes n]`` emits
  the sharpness-construction bundle (parameters, exponents, desk-scale
  condition reports, diagnostic profile) plus a CSV of the profile.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import counterexample as cx
from . import form as form_mod
from . import kernel as kernel_mod
from . import scale as scale_mod
from . import semigroup as semi_mod
from . import space as space_mod
from .errors import ParameterError, PointCapExceeded, UnsupportedKernelError
from .report import ConditionReport, canonical_json, config_hash

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_SCHEMA = 2
EXIT_POINT_CAP = 3


class SchemaError(Exception):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# Builders from config
# ---------------------------------------------------------------------------

def _require(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return cfg[key]


def build_space(cfg: dict) -> space_mod.FiniteMMSpace:
    kind = _require(cfg, "kind", "space")
    cap = int(cfg.get("point_cap", space_mod.DEFAULT_POINT_CAP))
    if kind == "cantor":
        return space_mod.build_cantor_product(
            _require(cfg, "xi", "space"), int(_require(cfg, "n", "space")),
            int(_require(cfg, "level", "space")), point_cap=cap)
    if kind == "grid":
        return space_mod.build_grid(int(_require(cfg, "d", "space")),
                                    int(_require(cfg, "side", "space")), point_cap=cap)
    if kind == "two_point":
        return space_mod.build_two_point(float(cfg.get("gap", 1.0)),
                                         tuple(cfg.get("weights", (0.5, 0.5))))
    if kind == "custom":
        return space_mod.build_custom(_require(cfg, "coords", "space"),
                                      _require(cfg, "weights", "space"),
                                      metric_matrix=cfg.get("metric_matrix"))
    raise SchemaError("space.kind", f"unknown space kind {kind!r}")


def build_scale(cfg: dict, space: space_mod.FiniteMMSpace) -> scale_mod.ScaleField:
    kind = _require(cfg, "kind", "scale")
    T0 = cfg.get("T0")
    T0 = math.inf if T0 in (None, "inf") else float(T0)
    if kind == "constant":
        return scale_mod.constant_field(space, float(_require(cfg, "beta", "scale")), T0=T0)
    if kind == "balls":
        anchors = [(a["center"], float(a["radius"]), float(a["value"]))
                   for a in _require(cfg, "anchors", "scale")]
        return scale_mod.field_from_balls(space, anchors,
                                          float(_require(cfg, "beta1", "scale")),
                                          float(_require(cfg, "beta2", "scale")), T0=T0)
    if kind == "table":
        return scale_mod.field_from_table(space, _require(cfg, "values", "scale"),
                                          float(_require(cfg, "beta1", "scale")),
                                          float(_require(cfg, "beta2", "scale")), T0=T0,
                                          lipschitz=bool(cfg.get("lipschitz", False)))
    raise SchemaError("scale.kind", f"unknown scale kind {kind!r}")


def build_kernel(cfg: dict, space: space_mod.FiniteMMSpace,
                 scale: scale_mod.ScaleField) -> kernel_mod.JumpKernel:
    kind = _require(cfg, "kind", "kernel")
    if kind == "cantor_axis":
        kern = kernel_mod.build_cantor_axis_kernel(space, scale)
    elif kind == "stable_like":
        kern = kernel_mod.build_stable_like_kernel(space, scale,
                                                   float(cfg.get("lower_constant", 1.0)))
    elif kind == "cylindrical":
        kern = kernel_mod.build_cylindrical_kernel(space, scale)
    elif kind == "nearest_neighbor":
        kern = kernel_mod.build_nearest_neighbor_kernel(space, float(cfg.get("value", 1.0)))
    elif kind == "uniform":
        kern = kernel_mod.build_uniform_kernel(space, float(cfg.get("value", 1.0)))
    elif kind == "zero":
        kern = kernel_mod.build_zero_kernel(space)
    else:
        raise SchemaError("kernel.kind", f"unknown kernel kind {kind!r}")
    rho = cfg.get("rho")
    if rho is not None:
        kern = kernel_mod.truncate(kern, float(rho))[0]
    return kern


# ---------------------------------------------------------------------------
# Check registry
# ---------------------------------------------------------------------------

def _default_radius_grid(space, check_cfg):
    if check_cfg.get("radius_grid"):
        return np.asarray(check_cfg["radius_grid"], dtype=float)
    return space_mod.dyadic_radius_grid(space)


def _default_time_grid(ctx, check_cfg):
    if check_cfg.get("time_grid"):
        return np.asarray(check_cfg["time_grid"], dtype=float)
    return semi_mod.default_time_grid(ctx["form"])


def _ball_sample(ctx, check_cfg, n_centers=4):
    space = ctx["space"]
    radii = check_cfg.get("ball_radii")
    if radii is None:
        grid = space_mod.dyadic_radius_grid(space)
        radii = grid[-3:] if grid.size >= 3 else grid
    return form_mod.sample_balls(space, n_centers, [float(r) for r in radii], ctx["rng"])


def _run_scale_axioms(ctx, p):
    return scale_mod.verify_scale_axioms(ctx["scale"], ctx["space"],
                                         _default_radius_grid(ctx["space"], p),
                                         rng=ctx["rng"])


def _run_quasi_metric(ctx, p):
    dstar, comp = scale_mod.induced_quasi_metric(ctx["scale"], ctx["space"],
                                                 p.get("beta_star"))
    return ConditionReport(condition="quasi_metric",
                           params={"beta_star": p.get("beta_star")},
                           best_constant=comp, witness={"comparability": comp},
                           passed=math.isfinite(comp),
                           series=[{"comparability": comp}])


def _run_vd_fit(ctx, p):
    alpha_hat, ratio = space_mod.fit_vd_exponent(ctx["space"],
                                                 _default_radius_grid(ctx["space"], p))
    return ConditionReport(condition="vd_fit", params={},
                           best_constant=alpha_hat,
                           witness={"alpha_hat": alpha_hat, "max_ratio": ratio},
                           passed=None, series=[{"alpha_hat": alpha_hat,
                                                 "max_ratio": ratio}])


def _run_rvd_fit(ctx, p):
    alpha0 = space_mod.fit_rvd_exponent(ctx["space"],
                                        _default_radius_grid(ctx["space"], p))
    return ConditionReport(condition="rvd_fit", params={}, best_constant=alpha0,
                           witness={"alpha0_hat": alpha0}, passed=None,
                           series=[{"alpha0_hat": alpha0}])


def _run_tj(ctx, p):
    return kernel_mod.tj_check(ctx["kernel"], ctx["space"], ctx["scale"],
                               _default_radius_grid(ctx["space"], p),
                               threshold=p.get("threshold"))


def _run_tjq(ctx, p):
    return kernel_mod.tjq_check(ctx["kernel"], ctx["space"], ctx["scale"],
                                float(p.get("q", 2.0)),
                                _default_radius_grid(ctx["space"], p),
                                threshold=p.get("threshold"))


def _run_ij(ctx, p):
    grid = _default_radius_grid(ctx["space"], p)
    pairs = p.get("pairs") or [(float(r), float(R)) for r in grid for R in grid if r <= R]
    return kernel_mod.ij_check(ctx["kernel"], ctx["space"], ctx["scale"],
                               float(p.get("gamma", 0.0)), pairs)


def _run_lre(ctx, p):
    return form_mod.lre_check(ctx["form"], ctx["space"], ctx["scale"],
                              float(p.get("kappa", 1.0)), _ball_sample(ctx, p))


def _run_cs(ctx, p):
    triples = [(x0, r / 2.0, r / 4.0) for x0, r in _ball_sample(ctx, p)]
    return form_mod.cs_check(ctx["form"], ctx["space"], ctx["scale"],
                             ctx["kernel"], triples)


def _run_capacity(ctx, p):
    return form_mod.capacity_check(ctx["form"], ctx["space"], ctx["scale"],
                                   ctx["kernel"], _ball_sample(ctx, p))


def _run_fk(ctx, p):
    return form_mod.fk_family_check(ctx["form"], ctx["space"], ctx["scale"],
                                    p.get("variant", "FK"),
                                    {"nu": p.get("nu", 0.5), "b": p.get("b", 1.0),
                                     "Cprime": p.get("Cprime", 1.0),
                                     "delta": p.get("delta", 0.5)},
                                    _ball_sample(ctx, p),
                                    subset_strategy=p.get("subset_strategy", "mixed"),
                                    rng=ctx["rng"])


def _run_nash(ctx, p):
    return form_mod.nash_check(ctx["form"], ctx["space"], ctx["scale"],
                               {"nu": p.get("nu", 0.5), "b": p.get("b", 1.0)},
                               _ball_sample(ctx, p),
                               test_family=p.get("test_family", "mixed"),
                               rng=ctx["rng"])


def _run_fk_nash(ctx, p):
    return form_mod.fk_nash_consistency(ctx["form"], ctx["space"], ctx["scale"],
                                        float(p.get("nu", 0.5)), float(p.get("b", 1.0)),
                                        float(p.get("Cprime", 1.0)),
                                        _ball_sample(ctx, p), rng=ctx["rng"])


def _run_se(ctx, p):
    return semi_mod.se_check(ctx["form"], ctx["space"], ctx["scale"],
                             _ball_sample(ctx, p),
                             a0_grid=p.get("a0_grid", (0.125, 0.25, 0.5)))


def _run_se_from_lre(ctx, p):
    return semi_mod.se_from_lre_chain(ctx["form"], ctx["space"], ctx["scale"],
                                      float(p.get("kappa", 1.0)), _ball_sample(ctx, p))


def _run_te(ctx, p):
    return semi_mod.te_check(ctx["form"], ctx["space"], ctx["scale"],
                             float(p.get("T0", ctx["scale"].T0)),
                             _ball_sample(ctx, p), _default_time_grid(ctx, p))


def _run_due(ctx, p):
    return semi_mod.due_check(ctx["form"], ctx["space"], ctx["scale"],
                              float(p.get("T0", 1.0)), _default_time_grid(ctx, p),
                              k=float(p.get("k", 1.0)), rng=ctx["rng"])


def _run_conservativeness(ctx, p):
    return semi_mod.conservativeness_check(ctx["form"],
                                           p.get("time_grid", (0.01, 0.1, 1.0, 10.0)),
                                           tol=float(p.get("tolerance", 1e-9)))


def _run_invariants(ctx, p):
    return semi_mod.heat_kernel_invariants(ctx["form"],
                                           times=p.get("times", (0.01, 0.1, 1.0, 10.0)))


def _near_far_forms(ctx, rho):
    near, far = kernel_mod.truncate(ctx["kernel"], rho)
    return form_mod.assemble(ctx["space"], near), far


def _run_truncation_l2(ctx, p):
    rho = float(p.get("rho", ctx["space"].diameter / 4.0))
    form_near, _ = _near_far_forms(ctx, rho)
    rep = semi_mod.truncation_l2_check(ctx["form"], form_near, ctx["space"])
    rep.params["rho"] = rho
    return rep


def _run_truncation_semigroup(ctx, p):
    rho = float(p.get("rho", ctx["space"].diameter / 4.0))
    form_near, _ = _near_far_forms(ctx, rho)
    f = np.asarray(p["f"], dtype=float) if "f" in p else np.ones(ctx["space"].n_points)
    rep = semi_mod.truncation_semigroup_check(ctx["form"], form_near, ctx["space"], f,
                                              _default_time_grid(ctx, p))
    rep.params["rho"] = rho
    return rep


def _run_meyer(ctx, p):
    rho = float(p.get("rho", ctx["space"].diameter / 4.0))
    near, far = kernel_mod.truncate(ctx["kernel"], rho)
    form_near = form_mod.assemble(ctx["space"], near)
    D = np.asarray(p["domain"], dtype=int) if "domain" in p else \
        ctx["space"].ball(0, ctx["space"].diameter / 2.0).member_idx
    return semi_mod.meyer_check(ctx["form"], form_near, far, ctx["space"],
                                D, float(p.get("t", 0.5)),
                                quadrature_steps=int(p.get("quadrature_steps", 16)),
                                tol=float(p.get("tolerance", 1e-6)))


def _run_cross_jump(ctx, p):
    radii = p.get("radii", [2.0 ** (-k) for k in range(2, 8)])
    return cx.cross_jump_exponent_fit(ctx["kernel"], ctx["space"],
                                      sorted(float(r) for r in radii),
                                      eta=float(p.get("eta", 0.5)))


CHECKS: dict[str, dict[str, Any]] = {
    "scale_axioms": {
        "fn": _run_scale_axioms,
        "measures": "order-field constants: phi(y,r) <= C1 phi(x,r) for r >= d(x,y); "
                    "(R/r)^b1 / C2 <= phi(x,R)/phi(x,r) <= C2 (R/r)^b2",
        "params": {"radius_grid": "list[float]"}},
    "quasi_metric": {
        "fn": _run_quasi_metric,
        "measures": "comparability of the shortest-chain metric power with phi(x, d(x,y))",
        "params": {"beta_star": "float|None"}},
    "vd_fit": {
        "fn": _run_vd_fit,
        "measures": "volume-growth exponent: slope of log V(x,r) against log r",
        "params": {"radius_grid": "list[float]"}},
    "rvd_fit": {
        "fn": _run_rvd_fit,
        "measures": "reverse volume-growth exponent: smallest per-point slope",
        "params": {"radius_grid": "list[float]"}},
    "tj_check": {
        "fn": _run_tj,
        "measures": "jump tail bound: sum_{d(x,y)>=r} j(x,y) mu(y) <= C / phi(x,r)",
        "params": {"radius_grid": "list[float]", "threshold": "float|None"}},
    "tjq_check": {
        "fn": _run_tjq,
        "measures": "L^q jump tail: (sum_{d>=r} j^q mu)^(1/q) <= C / (V(x,r)^((q-1)/q) phi(x,r))",
        "params": {"q": "float>=1", "radius_grid": "list[float]"}},
    "ij_check": {
        "fn": _run_ij,
        "measures": "annulus jump mass weighted by 1/sqrt(V(y, .)) <= C (R/r)^gamma / (R sqrt(V(x, .)))",
        "params": {"gamma": "float>=0", "pairs": "list[(r,R)]"}},
    "lre_check": {
        "fn": _run_lre,
        "measures": "resolvent floor: min over the quarter ball of (L_B + kappa/phi)^-1 1_B >= c1 phi",
        "params": {"kappa": "float>0", "ball_radii": "list[float]"}},
    "cs_check": {
        "fn": _run_cs,
        "measures": "cutoff energy density: sum_y (cut(x)-cut(y))^2 j mu <= c / phi(x,r)",
        "params": {"ball_radii": "list[float]"}},
    "capacity_check": {
        "fn": _run_capacity,
        "measures": "cutoff capacity: E(cut,cut) <= C V(x0,r) / phi(x0,r)",
        "params": {"ball_radii": "list[float]"}},
    "fk_family_check": {
        "fn": _run_fk,
        "measures": "first Dirichlet eigenvalue vs volume ratio: "
                    "lambda_1(D) >= C/phi [damping^b (V/mu(D))^nu - C']",
        "params": {"variant": "FK|WFK|GFK", "nu": "float>0", "b": "float>=0",
                   "Cprime": "float", "subset_strategy": "subballs|ground_superlevel|random|mixed"}},
    "nash_check": {
        "fn": _run_nash,
        "measures": "ball Nash display: ||f||_2^(2+2nu) <= C phi/V^nu damping^-b "
                    "[E(f,f) + ||f||_2^2/phi] ||f||_1^(2nu)",
        "params": {"nu": "float>0", "b": "float>=0", "test_family": "eigen|indicator|random|mixed"}},
    "fk_nash_consistency": {
        "fn": _run_fk_nash,
        "measures": "two-way algebra between the eigenvalue and Nash constants",
        "params": {"nu": "float>0", "b": "float>=0", "Cprime": "float"}},
    "se_check": {
        "fn": _run_se,
        "measures": "survival floor: quarter-ball min of P^B_t 1_B >= eps0 for t <= a0 phi",
        "params": {"a0_grid": "list[float]", "ball_radii": "list[float]"}},
    "se_from_lre": {
        "fn": _run_se_from_lre,
        "measures": "survival from resolvent: min P^B_t 1_B >= (min u - t)/max u",
        "params": {"kappa": "float>0"}},
    "te_check": {
        "fn": _run_te,
        "measures": "tail estimate: quarter-ball max of P_t 1_{B^c} <= C t/(phi ^ T0)",
        "params": {"T0": "float", "time_grid": "list[float]"}},
    "due_check": {
        "fn": _run_due,
        "measures": "diagonal bound: p(t,x,x) V(x, phi^-1(x,t)) <= C for t < k T0",
        "params": {"T0": "float", "k": "float", "time_grid": "list[float]"}},
    "conservativeness_check": {
        "fn": _run_conservativeness,
        "measures": "mass conservation: max |P_t 1 - 1| <= tol",
        "params": {"time_grid": "list[float]", "tolerance": "float"}},
    "heat_kernel_invariants": {
        "fn": _run_invariants,
        "measures": "symmetry, stochasticity, semigroup property, nonnegativity, t=0 identity",
        "params": {"times": "list[float]"}},
    "truncation_l2_check": {
        "fn": _run_truncation_l2,
        "measures": "removed-energy bound: largest eigenvalue of (L - L_near) <= 4 max_x far-tail(x)",
        "params": {"rho": "float>0"}},
    "truncation_semigroup_check": {
        "fn": _run_truncation_semigroup,
        "measures": "semigroup truncation bound: |P_t f - P^(rho)_t f| <= 2 t ||f|| max far-tail",
        "params": {"rho": "float>0", "f": "list[float]"}},
    "meyer_check": {
        "fn": _run_meyer,
        "measures": "jump-interchange comparison between a Dirichlet kernel and its truncation",
        "params": {"rho": "float>0", "domain": "list[int]", "t": "float>0",
                   "quadrature_steps": "int", "tolerance": "float"}},
    "cross_jump_exponent": {
        "fn": _run_cross_jump,
        "measures": "corner-to-corner long-jump mass scaling exponent",
        "params": {"radii": "list[float]", "eta": "float>0"}},
}


def list_checks(file=None) -> None:
    file = file or sys.stdout
    for name in sorted(CHECKS):
        entry = CHECKS[name]
        print(f"{name}", file=file)
        print(f"  measures: {entry['measures']}", file=file)
        print(f"  params:   {json.dumps(entry['params'], sort_keys=True)}", file=file)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _validate_config(cfg: dict) -> None:
    for key in ("space", "scale", "kernel", "checks"):
        if key not in cfg:
            raise SchemaError(key, "missing required section")
    if not isinstance(cfg["checks"], list):
        raise SchemaError("checks", "must be a list")
    for i, check in enumerate(cfg["checks"]):
        if "name" not in check:
            raise SchemaError(f"checks[{i}].name", "missing required field")
        if check["name"] not in CHECKS:
            raise SchemaError(f"checks[{i}].name", f"unknown check {check['name']!r}")
        if check.get("mode", "pass") not in ("pass", "diagnostic"):
            raise SchemaError(f"checks[{i}].mode", "must be 'pass' or 'diagnostic'")


def run_config(cfg: dict, out_dir: Path, seed: int | None = None) -> int:
    _validate_config(cfg)
    seed = int(cfg.get("seed", 0)) if seed is None else int(seed)
    rng = np.random.default_rng(seed)
    space = build_space(cfg["space"])
    scale = build_scale(cfg["scale"], space)
    kern = build_kernel(cfg["kernel"], space, scale)
    form = form_mod.assemble(space, kern)
    ctx = {"space": space, "scale": scale, "kernel": kern, "form": form, "rng": rng}

    out_dir.mkdir(parents=True, exist_ok=True)
    formats = cfg.get("output", {}).get("formats", ["json", "csv"])
    summary_checks = []
    all_pass = True
    for i, check in enumerate(cfg["checks"]):
        name = check["name"]
        params = dict(check.get("params", {}))
        for grid_key in ("radius_grid", "time_grid", "tolerance", "ball_radii"):
            if grid_key in check:
                params[grid_key] = check[grid_key]
        try:
            report = CHECKS[name]["fn"](ctx, params)
        except (ParameterError, UnsupportedKernelError) as exc:
            raise SchemaError(f"checks[{i}]", f"{name} cannot run here: {exc}") from exc
        mode = check.get("mode", "pass")
        if mode == "diagnostic":
            report.note("diagnostic mode: verdict does not gate the run")
        if "json" in formats:
            (out_dir / f"report_{name}.json").write_text(report.to_json() + "\n")
        if "csv" in formats:
            (out_dir / f"report_{name}.csv").write_text(report.to_csv())
        if "plotdata" in formats and name == "due_check":
            rows = ["t,p_diag,due_bound,ratio"]
            rows += [f"{r['t']!r},{r['p_diag']!r},{r['due_bound']!r},{r['ratio']!r}"
                     for r in report.series]
            (out_dir / "plotdata_due.csv").write_text("\n".join(rows) + "\n")
        summary_checks.append({"name": name, "mode": mode, "verdict": report.verdict,
                               "best_constant": report.best_constant,
                               "witness": report.witness})
        if mode == "pass" and report.passed is False:
            all_pass = False
    summary = {"config_hash": config_hash(cfg), "seed": seed,
               "checks": summary_checks, "all_pass": all_pass}
    (out_dir / "summary.json").write_text(canonical_json(summary) + "\n")
    return EXIT_OK if all_pass else EXIT_FAIL


def counterexample_report(epsilon: float, level: int, axes: int,
                          out_dir: Path) -> int:
    config = cx.synthesize_config(epsilon, xi=None, level=level)
    exponents = cx.exponent_report(config)

    cap = 2 ** (axes * level)
    space = space_mod.build_cantor_product(config.xi, axes, level,
                                           point_cap=max(cap, space_mod.DEFAULT_POINT_CAP))
    field = cx.build_counterexample_field(config, space)
    kern = kernel_mod.build_cantor_axis_kernel(space, field)
    form = form_mod.assemble(space, kern)
    rng = np.random.default_rng(0)

    grid = space_mod.dyadic_radius_grid(space)
    balls = form_mod.sample_balls(space, 3, grid[-2:], rng)
    reports = {
        "tj": kernel_mod.tj_check(kern, space, field, grid),
        "cs": form_mod.cs_check(form, space, field,
                                kern, [(x0, r / 2.0, r / 4.0) for x0, r in balls]),
        "ij": kernel_mod.ij_check(kern, space, field, config.gamma,
                                  [(r, R) for r in grid for R in grid if r <= R]),
        "wfk": form_mod.fk_family_check(form, space, field, "WFK",
                                        {"nu": 1.0 / (axes * config.alpha_xi),
                                         "b": 1.0, "Cprime": 1.0},
                                        balls, rng=rng),
    }
    times = np.logspace(-4.5, 0.5, 11)
    diagnostic = cx.due_violation_diagnostic(config, space, times, form=form)
    bundle = {
        "config": {"epsilon": config.epsilon, "xi": str(config.xi), "n": config.n,
                   "alpha_xi": config.alpha_xi, "beta1": config.beta1,
                   "beta2": config.beta2, "gamma": config.gamma, "nu": config.nu,
                   "desk_axes": axes, "level": level},
        "exponents": exponents,
        "condition_reports": {k: v.to_dict() for k, v in reports.items()},
        "diagnostic_series": diagnostic,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "counterexample_report.json").write_text(canonical_json(bundle) + "\n")
    rows = ["t,p,r"]
    rows += [f"{row['t']!r},{row['p']!r},{row['r']!r}" for row in diagnostic["series"]]
    (out_dir / "counterexample_profile.csv").write_text("\n".join(rows) + "\n")
    print(f"gap = {exponents['gap']:.6f} (must be positive); "
          f"reports in {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hk-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run checks from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)

    sub.add_parser("list-checks", help="print the check catalog")

    p_cx = sub.add_parser("counterexample", help="sharpness construction tools")
    cx_sub = p_cx.add_subparsers(dest="cx_command", required=True)
    p_rep = cx_sub.add_parser("report", help="emit the construction report bundle")
    p_rep.add_argument("--epsilon", type=float, required=True)
    p_rep.add_argument("--levels", type=int, default=5)
    p_rep.add_argument("--axes", type=int, default=2)
    p_rep.add_argument("--out", default="counterexample_out")

    args = parser.parse_args(argv)
    try:
        if args.command == "list-checks":
            list_checks()
            return EXIT_OK
        if args.command == "run":
            cfg_path = Path(args.config)
            try:
                cfg = json.loads(cfg_path.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return EXIT_SCHEMA
            out_dir = Path(args.out) if args.out else Path(cfg.get("output", {}).get("dir", "hk_out"))
            return run_config(cfg, out_dir, seed=args.seed)
        if args.command == "counterexample":
            return counterexample_report(args.epsilon, args.levels, args.axes,
                                         Path(args.out))
    except SchemaError as exc:
        print(f"config schema violation at {exc.path}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except PointCapExceeded as exc:
        print(f"point cap exceeded: {exc}", file=sys.stderr)
        return EXIT_POINT_CAP
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
