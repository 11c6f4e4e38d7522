"""Dirichlet form assembly, spectra, resolvents, and eigenvalue checkers.

The generator convention is the ordered-pair one:

    (L f)(x) = 2 * sum_y (f(x) - f(y)) j(x,y) mu(y),

so that <L f, f>_mu equals the double sum over ordered pairs
sum_{x,y} (f(x)-f(y))^2 j(x,y) mu(x) mu(y).  Dirichlet parts are principal
submatrices of L: the diagonal keeps the jumps that leave the domain, which
act as killing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .errors import ParameterError
from .kernel import JumpKernel
from .report import ConditionReport
from .scale import ScaleField, phi, phi_inverse
from .space import FiniteMMSpace


@dataclass
class SpectralForm:
    """Assembled generator restricted to a domain, with spectral data.

    ``domain`` indexes the ambient space; ``eigvals`` are ascending and the
    eigenfunction columns of ``psi`` are mu-orthonormal on the domain.
    """

    space: FiniteMMSpace
    jmat: np.ndarray
    domain: np.ndarray
    L: np.ndarray
    eigvals: np.ndarray
    psi: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.space.weights[self.domain]

    @property
    def is_part(self) -> bool:
        return self.domain.size != self.space.n_points

    def energy(self, f) -> float:
        """Quadratic form <L f, f>_mu on the domain."""
        f = np.asarray(f, dtype=float)
        return float((self.L @ f) @ (f * self.weights))

    def energy_double_sum(self, f) -> float:
        """Independent ordered-pair double sum, restricted to the domain."""
        f = np.asarray(f, dtype=float)
        jd = self.jmat[np.ix_(self.domain, self.domain)]
        w = self.weights
        diff = f[:, None] - f[None, :]
        interior = float((diff**2 * jd * w[:, None] * w[None, :]).sum())
        # jumps leaving the domain act on f extended by zero
        all_idx = np.arange(self.space.n_points)
        outside = np.setdiff1d(all_idx, self.domain, assume_unique=False)
        if outside.size:
            jout = self.jmat[np.ix_(self.domain, outside)]
            wout = self.space.weights[outside]
            interior += 2.0 * float(((f**2)[:, None] * jout * w[:, None] * wout[None, :]).sum())
        return interior

    def apply_semigroup(self, t: float, f) -> np.ndarray:
        """P_t f on the domain by spectral calculus."""
        f = np.asarray(f, dtype=float)
        coef = self.psi.T @ (f * self.weights)
        return self.psi @ (np.exp(-t * self.eigvals) * coef)

    def heat_kernel(self, t: float) -> np.ndarray:
        """Kernel values p(t, x, y) on domain x domain."""
        if t < 0:
            raise ParameterError("time must be nonnegative")
        decay = np.exp(-t * self.eigvals)
        return (self.psi * decay) @ self.psi.T

    def resolvent(self, lam: float, f) -> np.ndarray:
        """Solve (L + lam) u = f on the domain."""
        if lam <= 0:
            raise ParameterError("resolvent parameter must be positive")
        f = np.asarray(f, dtype=float)
        coef = self.psi.T @ (f * self.weights)
        return self.psi @ (coef / (self.eigvals + lam))


def _spectral_data(L: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sqrt_w = np.sqrt(w)
    sym = (L * sqrt_w[:, None]) / sqrt_w[None, :]
    sym = 0.5 * (sym + sym.T)
    eigvals, vecs = np.linalg.eigh(sym)
    psi = vecs / sqrt_w[:, None]
    return eigvals, psi


def assemble(space: FiniteMMSpace, kernel: JumpKernel) -> SpectralForm:
    """Assemble the generator of the pure-jump form for the whole space."""
    jmat = kernel.matrix()
    scale_ref = np.abs(jmat).max()
    if not np.allclose(jmat, jmat.T, atol=1e-10 * max(scale_ref, 1.0)):
        raise ParameterError("kernel must be symmetric")
    jmat = 0.5 * (jmat + jmat.T)
    w = space.weights
    L = -2.0 * jmat * w[None, :]
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    eigvals, psi = _spectral_data(L, w)
    return SpectralForm(space=space, jmat=jmat, domain=np.arange(space.n_points),
                        L=L, eigvals=eigvals, psi=psi)


def part_on(form: SpectralForm, D) -> SpectralForm:
    """Dirichlet part on D: principal submatrix of the ambient generator."""
    D = np.asarray(D, dtype=int)
    if D.size == 0:
        raise ParameterError("domain must be nonempty")
    if form.is_part:
        raise ParameterError("take parts of the full-space form")
    LD = form.L[np.ix_(D, D)]
    eigvals, psi = _spectral_data(LD, form.space.weights[D])
    return SpectralForm(space=form.space, jmat=form.jmat, domain=D,
                        L=LD, eigvals=eigvals, psi=psi)


def lambda1(form: SpectralForm, D=None) -> float:
    """Bottom eigenvalue of the Dirichlet part (the Rayleigh-quotient infimum)."""
    part = form if D is None else part_on(form, D)
    return float(part.eigvals[0])


def resolvent(form: SpectralForm, D, lam: float, f) -> np.ndarray:
    """Solve (L_D + lam) u = f on the part over D."""
    return part_on(form, D).resolvent(lam, f)


def build_cutoff(space: FiniteMMSpace, x0: int, R: float, r: float) -> np.ndarray:
    """Profile cutoff: 1 on B(x0,R), 0 outside B(x0,R+r), slope 1/r between."""
    if R <= 0 or r <= 0:
        raise ParameterError("cutoff needs positive plateau and ramp widths")
    d = space.dist_from(x0)
    return np.clip(1.0 - (d - R) / r, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Ball sampling helper
# ---------------------------------------------------------------------------

def sample_balls(space: FiniteMMSpace, n_centers: int, radii: Iterable[float],
                 rng: np.random.Generator) -> list[tuple[int, float]]:
    centers = rng.choice(space.n_points, size=min(n_centers, space.n_points),
                         replace=False)
    return [(int(c), float(r)) for c in centers for r in radii]


# ---------------------------------------------------------------------------
# Checkers
# ---------------------------------------------------------------------------

def lre_check(form: SpectralForm, space: FiniteMMSpace, scale: ScaleField,
              kappa: float, ball_sample) -> ConditionReport:
    """Worst lower-resolvent constant on sampled balls.

    For each ball B(x0, r) with phi(x0, r) < T0, solves
    u = (L_B + kappa/phi(x0,r))^-1 1_B and reports
    c1 = min over the quarter ball of u / phi(x0, r).
    """
    if kappa <= 0:
        raise ParameterError("kappa must be positive")
    worst = math.inf
    witness: dict[str, Any] = {}
    series = []
    skipped = 0
    for x0, r in ball_sample:
        if phi(scale, x0, r) >= scale.T0:
            continue
        ball = space.ball(x0, r)
        quarter = np.flatnonzero(space.dist_from(x0)[ball.member_idx] < r / 4.0)
        if quarter.size == 0:
            skipped += 1
            continue
        part = part_on(form, ball.member_idx)
        lam = kappa / phi(scale, x0, r)
        u = part.resolvent(lam, np.ones(ball.member_idx.size))
        c1 = float(u[quarter].min() / phi(scale, x0, r))
        series.append({"x0": x0, "r": r, "c1": c1})
        if c1 < worst:
            worst = c1
            witness = {"x0": x0, "r": r}
    report = ConditionReport(condition="lre", params={"kappa": kappa},
                             best_constant=(None if worst is math.inf else worst),
                             witness=witness, series=series)
    if skipped:
        report.note(f"skipped {skipped} balls with empty quarter ball")
    if np.abs(form.L).max() == 0.0:
        report.note("degenerate zero kernel: the resolvent is the constant 1/lambda")
    report.passed = bool(series) and worst > 0
    return report


def cs_check(form: SpectralForm, space: FiniteMMSpace, scale: ScaleField,
             kernel: JumpKernel, ball_sample) -> ConditionReport:
    """Pointwise cutoff-energy constant.

    For each sampled (x0, R, r) builds the profile cutoff and reports the
    best c with sup_x sum_y (cut(x)-cut(y))^2 j(x,y) mu(y) <= c / phi(x, r).
    ``ball_sample`` yields (x0, R, r) triples.
    """
    jmat = form.jmat
    w = space.weights
    best = 0.0
    witness: dict[str, Any] = {}
    series = []
    for x0, R, r in ball_sample:
        cut = build_cutoff(space, x0, R, r)
        diff2 = (cut[:, None] - cut[None, :]) ** 2
        energy_per_point = (diff2 * jmat * w[None, :]).sum(axis=1)
        phis = np.array([phi(scale, x, r) for x in range(space.n_points)])
        vals = energy_per_point * phis
        x = int(np.argmax(vals))
        series.append({"x0": x0, "R": R, "r": r, "c": float(vals[x]), "x": x})
        if vals[x] > best:
            best = float(vals[x])
            witness = {"x0": x0, "R": R, "r": r, "x": x}
    return ConditionReport(condition="cs", params={}, best_constant=best,
                           witness=witness, passed=math.isfinite(best),
                           series=series)


def capacity_check(form: SpectralForm, space: FiniteMMSpace, scale: ScaleField,
                   kernel: JumpKernel, ball_sample) -> ConditionReport:
    """Cutoff capacity constant: E(cut,cut) <= C V(x0,r)/phi(x0,r) per ball."""
    best = 0.0
    witness: dict[str, Any] = {}
    series = []
    for x0, r in ball_sample:
        cut = build_cutoff(space, x0, r / 2.0, r / 4.0)
        e = form.energy_double_sum(cut) if form.is_part else form.energy(cut)
        v = space.volume(x0, r)
        c = float(e * phi(scale, x0, r) / v)
        series.append({"x0": x0, "r": r, "C": c, "energy": float(e)})
        if c > best:
            best = c
            witness = {"x0": x0, "r": r}
    return ConditionReport(condition="capacity", params={}, best_constant=best,
                           witness=witness, passed=math.isfinite(best),
                           series=series)


def _ball_cap_radius(scale: ScaleField, x0: int, delta: float) -> float:
    if math.isinf(scale.T0):
        return math.inf
    return phi_inverse(scale, x0, delta * scale.T0)


def _subsets_for_ball(form: SpectralForm, space: FiniteMMSpace, ball_members: np.ndarray,
                      x0: int, r: float, strategy: str,
                      rng: np.random.Generator) -> list[np.ndarray]:
    subsets: list[np.ndarray] = [ball_members]
    if strategy in ("subballs", "mixed"):
        for frac in (0.25, 0.5):
            sub = space.ball(x0, r * frac).member_idx
            if sub.size:
                subsets.append(sub)
    if strategy in ("ground_superlevel", "mixed"):
        part = part_on(form, ball_members)
        ground = np.abs(part.psi[:, 0])
        for dens in (0.25, 0.5, 0.75):
            a = np.quantile(ground, 1.0 - dens)
            sel = ball_members[ground > a]
            if sel.size:
                subsets.append(sel)
    if strategy in ("random", "mixed"):
        for dens in (0.25, 0.5, 0.75):
            k = max(1, int(round(dens * ball_members.size)))
            subsets.append(rng.choice(ball_members, size=k, replace=False))
    # dedupe
    seen = set()
    uniq = []
    for s in subsets:
        key = tuple(sorted(int(i) for i in s))
        if key and key not in seen:
            seen.add(key)
            uniq.append(np.asarray(sorted(key), dtype=int))
    return uniq


def _fk_bracket(variant: str, ratio_pow: float, damping: float, b: float,
                Cprime: float) -> float:
    if variant == "FK":
        return ratio_pow
    if variant == "WFK":
        return ratio_pow - Cprime
    if variant == "GFK":
        return damping**b * ratio_pow - Cprime
    raise ParameterError(f"unknown variant {variant!r}")


def fk_family_check(form: SpectralForm, space: FiniteMMSpace, scale: ScaleField,
                    variant: str, params: dict, ball_sample,
                    subset_strategy: str = "mixed",
                    rng: np.random.Generator | None = None,
                    extra_subsets: dict[tuple[int, float], list[np.ndarray]] | None = None,
                    ) -> ConditionReport:
    """Faber-Krahn family sweep.

    For each sampled ball B(x0, r) and subset D drawn by the strategy, the
    witness constant is lambda_1(D) * phi(x0,r) / bracket where the bracket is
    the variant's volume-ratio term; the reported best constant is the
    smallest witness, i.e. the largest C for which the inequality holds on
    every sample.  Subsets whose bracket is nonpositive satisfy the display
    trivially and are skipped.  Reports never claim more than the sampled
    family.
    """
    nu = float(params["nu"])
    b = float(params.get("b", 1.0))
    Cprime = float(params.get("Cprime", 1.0))
    delta = float(params.get("delta", 0.5))
    rng = rng or np.random.default_rng(0)
    best = math.inf
    witness: dict[str, Any] = {}
    series = []
    trivial = 0
    for x0, r in ball_sample:
        if variant in ("FK", "WFK") and r >= _ball_cap_radius(scale, x0, delta):
            continue
        ball = space.ball(x0, r)
        if ball.member_idx.size == 0:
            continue
        phival = phi(scale, x0, r)
        damping = min(1.0, scale.T0 / phival) if not math.isinf(scale.T0) else 1.0
        subsets = _subsets_for_ball(form, space, ball.member_idx, x0, r,
                                    subset_strategy, rng)
        if extra_subsets:
            subsets.extend(extra_subsets.get((x0, r), []))
        for D in subsets:
            if D.size == 0:
                continue
            mu_D = float(space.weights[D].sum())
            ratio_pow = (ball.volume / mu_D) ** nu
            bracket = _fk_bracket(variant, ratio_pow, damping, b, Cprime)
            if bracket <= 0:
                trivial += 1
                continue
            lam = lambda1(form, D)
            c = lam * phival / bracket
            series.append({"x0": x0, "r": r, "size_D": int(D.size),
                           "lambda1": lam, "C": c})
            if c < best:
                best = c
                witness = {"x0": x0, "r": r, "size_D": int(D.size), "lambda1": lam}
    report = ConditionReport(
        condition=f"fk_{variant.lower()}",
        params={"variant": variant, "nu": nu, "b": b, "Cprime": Cprime,
                "delta": delta, "subset_strategy": subset_strategy},
        best_constant=(None if best is math.inf else best),
        witness=witness, series=series)
    if trivial:
        report.note(f"{trivial} subsets satisfied the display trivially (bracket <= 0)")
    report.passed = bool(series) and best > 0
    return report


def _nash_norms(space: FiniteMMSpace, f: np.ndarray, D: np.ndarray) -> tuple[float, float]:
    w = space.weights[D]
    l1 = float(np.abs(f) @ w)
    l2sq = float(f**2 @ w)
    return l1, l2sq


def nash_witness_constant(form: SpectralForm, space: FiniteMMSpace, scale: ScaleField,
                          x0: int, r: float, nu: float, b: float,
                          f_on_D: np.ndarray, D: np.ndarray) -> float:
    """Witness constant of the ball Nash display for one test function."""
    phival = phi(scale, x0, r)
    damping = min(1.0, scale.T0 / phival) if not math.isinf(scale.T0) else 1.0
    part = part_on(form, D)
    energy = part.energy(f_on_D)
    l1, l2sq = _nash_norms(space, f_on_D, D)
    v = space.volume(x0, r)
    denom = phival * (energy + l2sq / phival) * l1 ** (2 * nu)
    if denom == 0:
        return 0.0
    return l2sq ** (1 + nu) * v**nu * damping**b / denom


def nash_check(form: SpectralForm, space: FiniteMMSpace, scale: ScaleField,
               params: dict, ball_sample, test_family: str = "mixed",
               rng: np.random.Generator | None = None,
               extra_functions: dict[tuple[int, float], list[np.ndarray]] | None = None,
               ) -> ConditionReport:
    """Ball Nash-inequality sweep over a documented test family.

    The family per ball: low Dirichlet eigenfunctions of the ball part,
    indicators of sub-balls, and random sign vectors, all L2-normalized and
    supported in the ball.  The reported best constant is the largest
    witness, i.e. the smallest C for which the display holds on the family.
    """
    nu = float(params["nu"])
    b = float(params.get("b", 1.0))
    rng = rng or np.random.default_rng(0)
    best = 0.0
    witness: dict[str, Any] = {}
    series = []
    for x0, r in ball_sample:
        ball = space.ball(x0, r)
        D = ball.member_idx
        if D.size == 0:
            continue
        family: list[tuple[str, np.ndarray]] = []
        if test_family in ("eigen", "mixed"):
            part = part_on(form, D)
            for k in range(min(3, D.size)):
                family.append((f"eig{k}", part.psi[:, k]))
        if test_family in ("indicator", "mixed"):
            for frac in (0.25, 0.5, 1.0):
                sub = space.ball(x0, r * frac).member_idx
                mask = np.isin(D, sub).astype(float)
                if mask.any():
                    family.append((f"indicator{frac}", mask))
        if test_family in ("random", "mixed"):
            for k in range(3):
                family.append((f"sign{k}", rng.choice([-1.0, 1.0], size=D.size)))
        if extra_functions:
            family.extend(("extra", f) for f in extra_functions.get((x0, r), []))
        w = space.weights[D]
        for name, f in family:
            norm = math.sqrt(float(f**2 @ w))
            if norm == 0:
                continue
            f = f / norm
            c = nash_witness_constant(form, space, scale, x0, r, nu, b, f, D)
            series.append({"x0": x0, "r": r, "family": name, "C": c})
            if c > best:
                best = c
                witness = {"x0": x0, "r": r, "family": name}
    return ConditionReport(condition="nash",
                           params={"nu": nu, "b": b, "family": test_family},
                           best_constant=best, witness=witness,
                           passed=math.isfinite(best) and best > 0, series=series)


def _superlevel_subset(space: FiniteMMSpace, D: np.ndarray, f: np.ndarray) -> np.ndarray | None:
    """Super-level set of |f|/||f||_1 at a quarter of its squared L2 norm."""
    g = np.abs(np.asarray(f, dtype=float))
    w = space.weights[D]
    l1 = float(g @ w)
    if l1 == 0:
        return None
    g = g / l1
    a = float(g**2 @ w) / 4.0
    sel = D[g > a]
    return sel if sel.size else None


def fk_nash_consistency(form: SpectralForm, space: FiniteMMSpace, scale: ScaleField,
                        nu: float, b: float, Cprime: float, ball_sample,
                        rng: np.random.Generator | None = None) -> ConditionReport:
    """Two-way consistency between the eigenvalue sweep and the Nash sweep.

    Forward: with the eigenvalue constant C_G measured over a subset family
    that contains the super-level set of every Nash test function (cut at a
    quarter of its squared L2 norm after L1 normalization), every Nash
    witness obeys

        C_Nash(f) <= 4^nu * max(2 / C_G, Cprime).

    Backward: every asserted subset's ground state is in the Nash family, so
    with the measured Nash constant C_N,

        lambda_1(D) * phi(x0,r) >= [damping^b (V/mu(D))^nu - C_N] / C_N.

    Both chains are exact on a finite space: Markov's inequality, the normal
    contraction, and Cauchy-Schwarz are the only steps besides the measured
    sweeps, so both margins must be nonnegative up to rounding.
    """
    rng = rng or np.random.default_rng(0)
    balls = list(ball_sample)

    funcs_by_ball: dict[tuple[int, float], list[np.ndarray]] = {}
    asserted_subsets: dict[tuple[int, float], list[np.ndarray]] = {}
    sweep_subsets: dict[tuple[int, float], list[np.ndarray]] = {}
    for x0, r in balls:
        D_ball = space.ball(x0, r).member_idx
        if D_ball.size == 0:
            continue
        part = part_on(form, D_ball)
        base = [part.psi[:, k] for k in range(min(2, D_ball.size))]
        base.append(rng.choice([-1.0, 1.0], size=D_ball.size))

        subs = [s for f in base
                if (s := _superlevel_subset(space, D_ball, f)) is not None]
        # ground states of the asserted subsets, extended by zero to the ball
        grounds = []
        for D in subs:
            sub_part = part_on(form, D)
            g = np.zeros(D_ball.size)
            g[np.searchsorted(D_ball, D)] = sub_part.psi[:, 0]
            grounds.append(g)
        funcs = base + grounds
        funcs_by_ball[(x0, r)] = funcs
        asserted_subsets[(x0, r)] = subs + [D_ball]
        sweep_subsets[(x0, r)] = [s for f in funcs
                                  if (s := _superlevel_subset(space, D_ball, f)) is not None]

    gfk = fk_family_check(form, space, scale, "GFK",
                          {"nu": nu, "b": b, "Cprime": Cprime},
                          balls, subset_strategy="mixed", rng=rng,
                          extra_subsets=sweep_subsets)
    c_g = gfk.best_constant

    c_n = 0.0
    for (x0, r), funcs in funcs_by_ball.items():
        D_ball = space.ball(x0, r).member_idx
        for f in funcs:
            c_n = max(c_n, nash_witness_constant(form, space, scale, x0, r,
                                                 nu, b, f, D_ball))

    if c_g is None or c_g <= 0 or c_n <= 0:
        return ConditionReport(condition="fk_nash_consistency",
                               params={"nu": nu, "b": b, "Cprime": Cprime},
                               witness={"C_gfk": c_g, "C_nash": c_n},
                               passed=False,
                               notes=["degenerate sweep; no usable constants"])

    forward_bound = 4.0**nu * max(2.0 / c_g, Cprime)
    forward_margin = float(forward_bound - c_n)

    backward_margin = math.inf
    for (x0, r), subs in asserted_subsets.items():
        phival = phi(scale, x0, r)
        damping = min(1.0, scale.T0 / phival) if not math.isinf(scale.T0) else 1.0
        v = space.volume(x0, r)
        for D in subs:
            mu_D = float(space.weights[D].sum())
            lam = lambda1(form, D)
            rhs = (damping**b * (v / mu_D) ** nu - c_n) / c_n
            backward_margin = min(backward_margin, float(lam * phival - rhs))

    passed = forward_margin >= -1e-9 and backward_margin >= -1e-9
    return ConditionReport(
        condition="fk_nash_consistency",
        params={"nu": nu, "b": b, "Cprime": Cprime},
        best_constant=forward_margin,
        witness={"C_gfk": c_g, "C_nash": c_n,
                 "forward_margin": forward_margin,
                 "backward_margin": backward_margin},
        passed=passed,
        series=[{"C_gfk": c_g, "C_nash": c_n,
                 "forward_margin": forward_margin,
                 "backward_margin": backward_margin}],
    )
