import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hklab as hk
from hklab.errors import ParameterError


def energy_oracle(space, kern, f):
    # plain ordered-pair double sum, independent of the assembled generator
    total = 0.0
    for x in range(space.n_points):
        for y in range(space.n_points):
            total += (f[x] - f[y]) ** 2 * kern.j(x, y) * space.weights[x] * space.weights[y]
    return total


def test_assemble_two_point(two_point):
    space, kern, form = two_point
    assert np.allclose(form.L, [[1.0, -1.0], [-1.0, 1.0]])
    f = np.array([1.0, 0.0])
    assert form.energy(f) == pytest.approx(0.5, abs=1e-14)
    assert form.energy(f) == pytest.approx(energy_oracle(space, kern, f), abs=1e-14)


def test_assemble_constant_function_energy_zero(two_point):
    _, _, form = two_point
    c = np.full(2, 3.7)
    assert form.energy(c) == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(form.L @ c, 0.0, atol=1e-12)


def test_assemble_zero_kernel():
    sp = hk.build_grid(1, 4)
    form = hk.assemble(sp, hk.build_zero_kernel(sp))
    assert np.abs(form.L).max() == 0.0


def test_assemble_rejects_asymmetric_kernel():
    sp = hk.build_grid(1, 3)
    bad = hk.JumpKernel(sp, lambda rows, cols: (rows[:, None] + 2.0 * cols[None, :]))
    with pytest.raises(ParameterError, match="symmetric"):
        hk.assemble(sp, bad)


def test_quadratic_form_identity_random_functions():
    rng = np.random.default_rng(3)
    sp = hk.build_cantor_product(1 / 3, 1, 5)
    field = hk.constant_field(sp, 0.8)
    kern = hk.build_cantor_axis_kernel(sp, field)
    form = hk.assemble(sp, kern)
    jmat = kern.matrix()
    w = sp.weights
    for _ in range(50):
        f = rng.normal(size=sp.n_points)
        double_sum = float(((f[:, None] - f[None, :]) ** 2 * jmat
                            * w[:, None] * w[None, :]).sum())
        assert form.energy(f) == pytest.approx(double_sum, rel=1e-10, abs=1e-10)


def test_part_two_point(two_point):
    _, _, form = two_point
    part = hk.part_on(form, [0])
    assert part.L == pytest.approx(np.array([[1.0]]))
    assert hk.lambda1(form, [0]) == pytest.approx(1.0, abs=1e-12)
    # Rayleigh quotient over vectors supported on D
    f = np.array([2.5, 0.0])
    quotient = form.energy(f) / (f[0] ** 2 * 0.5)
    assert quotient == pytest.approx(1.0, abs=1e-12)


def test_part_full_space_lambda_zero(two_point):
    _, _, form = two_point
    assert hk.lambda1(form) == pytest.approx(0.0, abs=1e-12)


def test_part_disjoint_components_spectrum_union():
    g = hk.build_grid(1, 12)
    kern = hk.build_nearest_neighbor_kernel(g)
    form = hk.assemble(g, kern)
    d1 = np.array([0, 1, 2])
    d2 = np.array([8, 9, 10])           # separated by more than one spacing
    both = hk.part_on(form, np.concatenate([d1, d2]))
    merged = np.sort(np.concatenate([hk.part_on(form, d1).eigvals,
                                     hk.part_on(form, d2).eigvals]))
    assert np.allclose(np.sort(both.eigvals), merged, atol=1e-10)


def test_lambda1_is_rayleigh_infimum():
    rng = np.random.default_rng(5)
    sp = hk.build_cantor_product(1 / 3, 1, 5)
    field = hk.constant_field(sp, 0.8)
    form = hk.assemble(sp, hk.build_cantor_axis_kernel(sp, field))
    D = sp.ball(0, 0.4).member_idx
    part = hk.part_on(form, D)
    lam = part.eigvals[0]
    w = sp.weights[D]
    for _ in range(25):
        f = rng.normal(size=D.size)
        assert part.energy(f) / float(f**2 @ w) >= lam - 1e-10
    ground = part.psi[:, 0]
    assert part.energy(ground) == pytest.approx(lam, rel=1e-10)


def test_domain_monotonicity_of_lambda1():
    sp = hk.build_cantor_product(1 / 3, 1, 6)
    field = hk.constant_field(sp, 0.8)
    form = hk.assemble(sp, hk.build_cantor_axis_kernel(sp, field))
    for r_small, r_big in [(0.1, 0.3), (0.3, 0.7), (0.05, 0.9)]:
        small = sp.ball(0, r_small).member_idx
        big = sp.ball(0, r_big).member_idx
        assert hk.lambda1(form, small) >= hk.lambda1(form, big) - 1e-12


def test_resolvent_examples(two_point):
    _, _, form = two_point
    part = hk.part_on(form, [0])
    assert part.resolvent(1.0, np.ones(1))[0] == pytest.approx(0.5, abs=1e-14)
    # full space: u = 1/lam exactly
    for lam in (0.5, 3.0):
        u = form.resolvent(lam, np.ones(2))
        assert np.allclose(u, 1.0 / lam, atol=1e-12)
    # lam -> inf: lam * G 1 -> 1; defect shrinks ~10x from 1e3 to 1e4
    d3 = np.abs(1e3 * part.resolvent(1e3, np.ones(1)) - 1.0).max()
    d4 = np.abs(1e4 * part.resolvent(1e4, np.ones(1)) - 1.0).max()
    assert d4 < d3 / 5


def test_resolvent_contraction_bound():
    sp = hk.build_cantor_product(1 / 3, 1, 5)
    field = hk.constant_field(sp, 0.8)
    form = hk.assemble(sp, hk.build_cantor_axis_kernel(sp, field))
    for r in (0.2, 0.5):
        D = sp.ball(3, r).member_idx
        part = hk.part_on(form, D)
        for lam in (0.1, 1.0, 10.0):
            u = lam * part.resolvent(lam, np.ones(D.size))
            assert u.min() >= -1e-12
            assert u.max() <= 1.0 + 1e-10


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_markovian_clamp_contraction(seed):
    rng = np.random.default_rng(seed)
    sp = hk.build_grid(1, 10)
    field = hk.constant_field(sp, 1.0)
    form = hk.assemble(sp, hk.build_stable_like_kernel(sp, field))
    f = rng.normal(scale=2.0, size=sp.n_points)
    clamped = np.clip(f, 0.0, 1.0)
    assert form.energy(clamped) <= form.energy(f) + 1e-12


def test_build_cutoff_profile():
    sp = hk.build_grid(1, 21)
    cut = hk.build_cutoff(sp, 0, 0.3, 0.2)
    d = sp.dist_from(0)
    assert np.all(cut[d <= 0.3] == 1.0)
    assert np.all(cut[d >= 0.5] == 0.0)
    mid = np.argmin(np.abs(d - 0.4))
    assert cut[mid] == pytest.approx(0.5, abs=0.03)


def test_lre_whole_space_ratio(two_point):
    space, _, form = two_point
    field = hk.constant_field(space, 1.0)
    for kappa in (0.5, 1.0, 4.0):
        rep = hk.lre_check(form, space, field, kappa, [(0, 2.0)])
        assert rep.best_constant == pytest.approx(1.0 / kappa, rel=1e-12)


def test_lre_positive_on_cantor_instance(cantor6):
    space, scale, kern = cantor6
    form = hk.assemble(space, kern)
    balls = [(0, 0.25), (13, 0.25), (40, 0.125)]
    rep = hk.lre_check(form, space, scale, 1.0, balls)
    assert rep.passed
    assert rep.best_constant > 0
    assert len(rep.series) == len(balls)


def test_lre_zero_kernel_degenerate():
    sp = hk.build_grid(1, 8)
    field = hk.constant_field(sp, 1.0)
    form = hk.assemble(sp, hk.build_zero_kernel(sp))
    rep = hk.lre_check(form, sp, field, 1.0, [(0, 0.9)])
    assert rep.best_constant == pytest.approx(1.0, rel=1e-12)   # u = 1/lam
    assert any("zero" in n for n in rep.notes)


def test_lre_skips_empty_quarter_ball():
    sp = hk.build_grid(1, 9)
    field = hk.constant_field(sp, 1.0)
    form = hk.assemble(sp, hk.build_nearest_neighbor_kernel(sp))
    spacing = sp.meta["spacing"]
    rep = hk.lre_check(form, sp, field, 1.0, [(4, 2.0 * spacing)])
    # quarter radius spacing/2 only contains the center itself -> usable
    assert rep.series


def test_cs_check_edge_cases(cantor6):
    space, scale, kern = cantor6
    form = hk.assemble(space, kern)
    zero = hk.build_zero_kernel(space)
    zform = hk.assemble(space, zero)
    rep = hk.cs_check(zform, space, scale, zero, [(0, 0.2, 0.1)])
    assert rep.best_constant == 0.0
    # cutoff identically 1: plateau covers the space
    rep_one = hk.cs_check(form, space, scale, kern, [(0, 2.0, 0.5)])
    assert rep_one.best_constant == 0.0
    rep_real = hk.cs_check(form, space, scale, kern,
                           [(0, 0.125, 0.125), (9, 0.25, 0.125)])
    assert math.isfinite(rep_real.best_constant) and rep_real.best_constant > 0


def test_capacity_check_cases(two_point, cantor6):
    space2, kern2, form2 = two_point
    field2 = hk.constant_field(space2, 1.0)
    rep = hk.capacity_check(form2, space2, field2, kern2, [(0, 3.0)])
    assert rep.best_constant == pytest.approx(0.0, abs=1e-14)   # cutoff constant 1

    space, scale, kern = cantor6
    zform = hk.assemble(space, hk.build_zero_kernel(space))
    assert hk.capacity_check(zform, space, scale, hk.build_zero_kernel(space),
                             [(0, 0.3)]).best_constant == 0.0
    form = hk.assemble(space, kern)
    rep6 = hk.capacity_check(form, space, scale, kern, [(0, 0.25), (13, 0.25)])
    assert math.isfinite(rep6.best_constant) and rep6.best_constant > 0


def test_capacity_stable_across_levels():
    vals = []
    for lvl in (5, 6):
        sp = hk.build_cantor_product(1 / 3, 1, lvl)
        field = hk.constant_field(sp, 0.8, T0=1.0)
        kern = hk.build_cantor_axis_kernel(sp, field)
        form = hk.assemble(sp, kern)
        rep = hk.capacity_check(form, sp, field, kern, [(0, 0.25)])
        vals.append(rep.best_constant)
    assert abs(vals[1] - vals[0]) / vals[0] <= 0.25


def test_fk_ball_itself_reduces_to_lambda_phi(cantor6):
    space, scale, kern = cantor6
    form = hk.assemble(space, kern)
    x0, r = 0, 0.25
    rep = hk.fk_family_check(form, space, scale, "FK", {"nu": 0.5},
                             [(x0, r)], subset_strategy="subballs")
    ball = space.ball(x0, r)
    direct = hk.lambda1(form, ball.member_idx) * hk.phi(scale, x0, r)
    whole_rows = [row for row in rep.series if row["size_D"] == ball.member_idx.size]
    assert whole_rows and whole_rows[0]["C"] == pytest.approx(direct, rel=1e-10)


def test_fk_two_point_closed_form(two_point):
    space, _, form = two_point
    field = hk.constant_field(space, 1.0)
    nu = 0.7
    rep = hk.fk_family_check(form, space, field, "FK", {"nu": nu}, [(0, 2.0)],
                             subset_strategy="subballs")
    # subset {atom 0} inside the whole-space ball: lambda1 = 1, V/mu(D) = 2
    expected = 1.0 * hk.phi(field, 0, 2.0) / 2.0**nu
    singles = [row["C"] for row in rep.series if row["size_D"] == 1]
    assert singles and min(singles) == pytest.approx(expected, rel=1e-10)
    # the whole compact space as a subset has lambda1 = 0: the display can
    # only hold there with C = 0, and the sweep reports exactly that
    whole = [row["C"] for row in rep.series if row["size_D"] == 2]
    assert whole and whole[0] == pytest.approx(0.0, abs=1e-12)


def test_gfk_with_derived_exponent_finite(cantor6):
    space, scale, kern = cantor6
    form = hk.assemble(space, kern)
    radii = np.sort(2.0 ** -np.arange(1, 6, dtype=float))
    alpha_hat, _ = hk.fit_vd_exponent(space, radii)
    nu = scale.beta1 / alpha_hat
    b = (1 + nu) * alpha_hat / scale.beta1
    rng = np.random.default_rng(0)
    balls = hk.sample_balls(space, 3, [0.2, 0.45], rng)
    rep = hk.fk_family_check(form, space, scale, "GFK",
                             {"nu": nu, "b": b, "Cprime": 1.0}, balls, rng=rng)
    assert rep.passed
    assert math.isfinite(rep.best_constant) and rep.best_constant > 0


def test_nash_single_atom_closed_form(cantor6):
    space, scale, kern = cantor6
    form = hk.assemble(space, kern)
    x0, r, nu = 0, 0.3, 0.8
    D = space.ball(x0, r).member_idx
    y = 2                                  # an atom inside the ball
    assert y in D
    f = np.zeros(D.size)
    f[np.searchsorted(D, y)] = 1.0 / math.sqrt(space.weights[y])
    part = hk.part_on(form, D)
    phival = hk.phi(scale, x0, r)
    damping = min(1.0, scale.T0 / phival)
    l1 = math.sqrt(space.weights[y])
    expected = (1.0 * space.volume(x0, r) ** nu * damping
                / (phival * (part.energy(f) + 1.0 / phival) * l1 ** (2 * nu)))
    got = hk.form.nash_witness_constant(form, space, scale, x0, r, nu, 1.0, f, D)
    assert got == pytest.approx(expected, rel=1e-12)


def test_nash_zero_kernel_finite():
    sp = hk.build_grid(1, 12)
    field = hk.constant_field(sp, 1.0, T0=1.0)
    form = hk.assemble(sp, hk.build_zero_kernel(sp))
    rep = hk.nash_check(form, sp, field, {"nu": 0.5}, [(0, 0.6)])
    assert math.isfinite(rep.best_constant) and rep.best_constant > 0


def test_fk_nash_consistency_two_configs():
    rng = np.random.default_rng(11)
    for build in (lambda: hk.build_cantor_product(1 / 3, 1, 5),
                  lambda: hk.build_grid(1, 24)):
        sp = build()
        field = hk.constant_field(sp, 0.9, T0=1.0)
        if sp.meta["kind"] == "cantor":
            kern = hk.build_cantor_axis_kernel(sp, field)
        else:
            kern = hk.build_stable_like_kernel(sp, field)
        form = hk.assemble(sp, kern)
        balls = hk.sample_balls(sp, 2, [0.25, 0.5], rng)
        rep = hk.fk_nash_consistency(form, sp, field, nu=0.6, b=1.0,
                                     Cprime=1.0, ball_sample=balls, rng=rng)
        assert rep.passed, rep.witness


def test_fk_passes_where_due_confirmed():
    # homogeneous instance: constant order on a grid
    sp = hk.build_grid(1, 32)
    field = hk.constant_field(sp, 1.0, T0=1.0)
    kern = hk.build_stable_like_kernel(sp, field)
    form = hk.assemble(sp, kern)
    due = hk.due_check(form, sp, field, 1.0, [0.01, 0.05, 0.2])
    assert math.isfinite(due.best_constant)
    radii = np.sort(2.0 ** -np.arange(2, 6, dtype=float))
    alpha_hat, _ = hk.fit_vd_exponent(sp, radii)
    rng = np.random.default_rng(2)
    rep = hk.fk_family_check(form, sp, field, "FK",
                             {"nu": field.beta1 / alpha_hat},
                             hk.sample_balls(sp, 3, [0.2, 0.4], rng), rng=rng)
    assert rep.passed and rep.best_constant > 0


def test_part_empty_domain_rejected(two_point):
    _, _, form = two_point
    with pytest.raises(ParameterError):
        hk.part_on(form, [])
