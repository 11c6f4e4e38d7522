import math
from fractions import Fraction

import numpy as np
import pytest

import hklab as hk
from hklab.errors import ParameterError

ALPHA_THIRD = math.log(2) / math.log(3)


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0, 4.0, 8.0])
def test_synthesized_config_invariants(eps):
    cfg = hk.synthesize_config(eps)
    cfg.validate()
    assert cfg.alpha_xi <= eps / 2 + 1e-12
    assert 1.0 < cfg.beta2 < 2.0
    identity = cfg.n * cfg.alpha_xi / 2 - cfg.n * cfg.alpha_xi / (2 * cfg.beta2)
    assert identity == pytest.approx(1.0 + eps, abs=1e-12)
    assert (1 - cfg.nu) * cfg.gamma < 1 + cfg.nu + eps


def test_config_eps4_xi_third_instance():
    cfg = hk.synthesize_config(4.0, xi=1 / 3)
    assert cfg.n == 32
    assert cfg.alpha_xi == pytest.approx(ALPHA_THIRD, abs=1e-12)
    assert cfg.beta2 == pytest.approx(1.9814, abs=5e-4)
    rep = hk.exponent_report(cfg)
    assert rep["gap"] == pytest.approx(1 + 4 - cfg.alpha_xi - cfg.beta2, abs=1e-12)
    assert rep["gap"] == pytest.approx(2.388, abs=2e-3)
    assert rep["lower_exponent"] == pytest.approx(31 * ALPHA_THIRD - cfg.beta2, abs=1e-9)
    assert rep["due_exponent"] == pytest.approx(
        (1 + 1 / cfg.beta2) * 32 * ALPHA_THIRD / 2, abs=1e-9)


def test_synthesize_rejects_inadmissible_xi():
    # epsilon below 2 caps the admissible volume exponent
    with pytest.raises(ParameterError, match="admissible"):
        hk.synthesize_config(0.5, xi=1 / 3)


def test_minimal_axes_grow_as_epsilon_shrinks():
    # the first smallness condition forces n > 4(1+eps)/alpha
    n_small = hk.synthesize_config(0.5).n
    n_mid = hk.synthesize_config(1.0).n
    assert n_small > n_mid
    for eps in (0.5, 1.0, 2.0):
        cfg = hk.synthesize_config(eps)
        assert cfg.n > 4 * (1 + eps) / cfg.alpha_xi


def test_gap_equals_closed_form_to_1e12():
    for eps in (0.5, 1.0, 2.0, 4.0, 8.0):
        cfg = hk.synthesize_config(eps)
        rep = hk.exponent_report(cfg)
        assert rep["gap"] == pytest.approx(1 + eps - cfg.alpha_xi - cfg.beta2,
                                           abs=1e-12)
        assert rep["gap"] > 0


def test_field_plateaus_feasible_config():
    cfg = hk.synthesize_config(0.5, level=4)       # beta2 - beta1 < 1/2
    assert cfg.beta2 - cfg.beta1 < 0.5
    sp = hk.build_cantor_product(cfg.xi, 2, 4)
    field = hk.build_counterexample_field(cfg, sp)
    d0 = sp.dist_from_coord(sp.meta["corner_zero"])
    d1 = sp.dist_from_coord(sp.meta["corner_e1"])
    assert np.all(np.abs(field.beta_values[d0 < 0.25] - cfg.beta2) < 1e-12)
    assert np.all(np.abs(field.beta_values[d1 < 0.25] - cfg.beta1) < 1e-12)
    assert "plateau_clamped" not in field.meta


def test_field_clamp_note_when_orders_too_far_apart():
    cfg = hk.synthesize_config(4.0, xi=1 / 3, level=3)   # beta2 - beta1 > 1/2
    sp = hk.build_cantor_product(1 / 3, 2, 3)
    field = hk.build_counterexample_field(cfg, sp)
    assert "plateau_clamped" in field.meta
    # the bridge is still 1-Lipschitz and respects the low plateau
    d1 = sp.dist_from_coord(sp.meta["corner_e1"])
    assert np.all(np.abs(field.beta_values[d1 < 0.25] - 1.0) < 1e-12)


def test_field_lipschitz_scan_level5():
    cfg = hk.synthesize_config(1.0, level=5)
    sp = hk.build_cantor_product(cfg.xi, 2, 5)           # 1024 atoms
    field = hk.build_counterexample_field(cfg, sp)
    d = sp.pairwise()
    gap = np.abs(field.beta_values[:, None] - field.beta_values[None, :]) - d
    assert gap.max() <= 1e-12


def test_field_rejects_wrong_space():
    cfg = hk.synthesize_config(1.0)
    grid = hk.build_grid(2, 4)
    with pytest.raises(ParameterError):
        hk.build_counterexample_field(cfg, grid)
    other = hk.build_cantor_product(1 / 3, 2, 3)
    if abs(float(cfg.xi) - 1 / 3) > 1e-12:
        with pytest.raises(ParameterError):
            hk.build_counterexample_field(cfg, other)


def test_diagnostic_report_structure():
    cfg = hk.synthesize_config(1.0, level=4)
    sp = hk.build_cantor_product(cfg.xi, 2, 4)
    times = np.logspace(-4.5, 0.5, 9)
    rep = hk.due_violation_diagnostic(cfg, sp, times)
    assert rep["verdict"] == "diagnostic"
    assert rep["usable_decades"] >= 4
    assert len(rep["series"]) == 9
    assert "trend_slope" in rep
    assert "not desk-reproducible" in rep["regime_note"]
    control = [row["r"] for row in rep["control_series"]]
    assert all(math.isfinite(r) for r in control)
    assert max(control) < 10.0


def test_diagnostic_inconclusive_cases():
    cfg = hk.synthesize_config(1.0, level=3)
    sp = hk.build_cantor_product(cfg.xi, 2, 3)
    assert hk.due_violation_diagnostic(cfg, sp, [])["verdict"] == "inconclusive"
    narrow = hk.due_violation_diagnostic(cfg, sp, [0.1, 0.2, 0.4, 0.8])
    assert narrow["verdict"] == "inconclusive"
    assert "decades" in narrow["reason"]


def test_desk_scale_conditions_all_finite():
    cfg = hk.synthesize_config(1.0, level=4)
    sp = hk.build_cantor_product(cfg.xi, 2, 4)
    field = hk.build_counterexample_field(cfg, sp)
    kern = hk.build_cantor_axis_kernel(sp, field)
    form = hk.assemble(sp, kern)
    rng = np.random.default_rng(0)
    grid = hk.dyadic_radius_grid(sp)
    balls = hk.sample_balls(sp, 2, grid[-2:], rng)

    tj = hk.tj_check(kern, sp, field, grid)
    assert math.isfinite(tj.best_constant) and tj.best_constant > 0
    cs = hk.cs_check(form, sp, field, kern, [(x0, r / 2, r / 4) for x0, r in balls])
    assert math.isfinite(cs.best_constant)
    n_desk = sp.meta["n_axes"]
    wfk = hk.fk_family_check(form, sp, field, "WFK",
                             {"nu": 1.0 / (n_desk * cfg.alpha_xi), "b": 1.0,
                              "Cprime": 1.0}, balls, rng=rng)
    assert wfk.passed and wfk.best_constant > 0
    pairs = [(r, R) for r in grid for R in grid if r <= R]
    ij = hk.ij_check(kern, sp, field, cfg.gamma, pairs)
    assert math.isfinite(ij.best_constant)
    assert ij.witness["gamma_hat"] <= cfg.gamma + 0.25
