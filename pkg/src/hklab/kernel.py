"""Symmetric jump kernels, truncation, and jump-tail checks.

A :class:`JumpKernel` stores a symmetric atom-to-atom intensity ``j(x, y)``
so that the pair mass between atoms is ``j(x,y) * mu(x) * mu(y)``.  Kernels
are evaluated lazily through a vectorized block function, so tail sums over
small balls work on spaces too large for a dense matrix.
"""

from __future__ import annotations

import math
from typing import Any, Callable

import numpy as np

from .errors import ParameterError, PointCapExceeded, UnsupportedKernelError
from .report import ConditionReport
from .scale import ScaleField, phi, phi_inverse, phi_inverse_vec, phi_vec
from .space import DENSE_MATRIX_CAP, FiniteMMSpace

_AXIS_TOL = 1e-12


class JumpKernel:
    """Symmetric jump intensity with a lazily evaluated block interface."""

    def __init__(self, space: FiniteMMSpace,
                 block_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 support_pattern: str = "full",
                 rho: float | None = None,
                 meta: dict[str, Any] | None = None):
        if support_pattern not in ("full", "axis_aligned", "nearest_neighbor"):
            raise ParameterError(f"unknown support pattern {support_pattern!r}")
        self.space = space
        self._block_fn = block_fn
        self.support_pattern = support_pattern
        self.rho = rho
        self.meta = meta or {}
        self._matrix: np.ndarray | None = None

    def j(self, x: int, y: int) -> float:
        return float(self.block(np.array([x]), np.array([y]))[0, 0])

    def block(self, rows, cols) -> np.ndarray:
        rows = np.atleast_1d(np.asarray(rows, dtype=int))
        cols = np.atleast_1d(np.asarray(cols, dtype=int))
        out = np.asarray(self._block_fn(rows, cols), dtype=float)
        return out.reshape(rows.size, cols.size)

    def matrix(self) -> np.ndarray:
        """Dense intensity matrix; cached, refused above the dense cap."""
        if self._matrix is None:
            n = self.space.n_points
            if n > DENSE_MATRIX_CAP:
                raise PointCapExceeded(n, DENSE_MATRIX_CAP)
            idx = np.arange(n)
            m = self.block(idx, idx)
            np.fill_diagonal(m, 0.0)
            self._matrix = m
        return self._matrix


def _masked_kernel(kernel: JumpKernel, keep_near: bool, rho: float) -> JumpKernel:
    space = kernel.space

    def block_fn(rows, cols):
        vals = kernel.block(rows, cols)
        d = np.empty_like(vals)
        for a, x in enumerate(rows):
            d[a] = space.dist_from(int(x))[cols]
        mask = d < rho if keep_near else d >= rho
        return np.where(mask, vals, 0.0)

    meta = dict(kernel.meta)
    meta["truncation"] = {"rho": float(rho), "part": "near" if keep_near else "far"}
    return JumpKernel(space, block_fn, support_pattern=kernel.support_pattern,
                      rho=float(rho) if keep_near else kernel.rho, meta=meta)


def truncate(kernel: JumpKernel, rho: float) -> tuple[JumpKernel, JumpKernel]:
    """Split into (near, far): jumps shorter than rho and the complement."""
    if rho <= 0:
        raise ParameterError("truncation radius must be positive")
    return _masked_kernel(kernel, True, rho), _masked_kernel(kernel, False, rho)


def scale_kernel(kernel: JumpKernel, factor: float) -> JumpKernel:
    def block_fn(rows, cols):
        return factor * kernel.block(rows, cols)
    return JumpKernel(kernel.space, block_fn, kernel.support_pattern, kernel.rho,
                      {**kernel.meta, "scaled_by": factor})


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_zero_kernel(space: FiniteMMSpace) -> JumpKernel:
    def block_fn(rows, cols):
        return np.zeros((rows.size, cols.size))
    return JumpKernel(space, block_fn, "full", meta={"kind": "zero"})


def build_uniform_kernel(space: FiniteMMSpace, value: float = 1.0) -> JumpKernel:
    """j(x, y) = value off the diagonal."""
    def block_fn(rows, cols):
        same = rows[:, None] == cols[None, :]
        return np.where(same, 0.0, float(value))
    return JumpKernel(space, block_fn, "full", meta={"kind": "uniform", "value": value})


def _axis_aligned_block(space: FiniteMMSpace, beta_values: np.ndarray,
                        alpha_axis: float, off_axis_factor: float):
    coords = space.coords

    def block_fn(rows, cols):
        diff = np.abs(coords[rows][:, None, :] - coords[cols][None, :, :])
        moved = (diff > _AXIS_TOL).sum(axis=2)
        axis_dist = diff.max(axis=2)
        bmin = np.minimum(beta_values[rows][:, None], beta_values[cols][None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = axis_dist ** (-(alpha_axis + bmin)) * off_axis_factor
        return np.where(moved == 1, vals, 0.0)

    return block_fn


def build_cantor_axis_kernel(space: FiniteMMSpace, scale: ScaleField) -> JumpKernel:
    """Axis-aligned kernel on a Cantor product.

    Along the moved axis the intensity is |x_i - y_i|^(-(alpha + beta(x) ^ beta(y)))
    with alpha the axis volume exponent; dividing by the off-axis weight
    factor (per-axis atom count to the power n-1) makes the atom pair mass
    j * mu * mu match the per-axis measure times point masses on the frozen
    axes.  Symmetric because the exponent takes the smaller order.
    """
    if space.meta.get("kind") != "cantor":
        raise ParameterError("cantor axis kernel needs a cantor product space")
    alpha = float(space.meta["alpha"])
    n = int(space.meta["n_axes"])
    factor = float(space.meta["axis_atoms"]) ** (n - 1)
    block_fn = _axis_aligned_block(space, scale.beta_values, alpha, factor)
    return JumpKernel(space, block_fn, "axis_aligned",
                      meta={"kind": "cantor_axis", "alpha": alpha})


def build_cylindrical_kernel(space: FiniteMMSpace, scale: ScaleField) -> JumpKernel:
    """Axis-aligned stable-like kernel on a grid product (no joint density)."""
    if space.meta.get("kind") != "grid":
        raise ParameterError("cylindrical kernel needs a grid space")
    d = int(space.meta["n_axes"])
    side = int(space.meta["side"])
    block_fn = _axis_aligned_block(space, scale.beta_values, 1.0, float(side) ** (d - 1))
    return JumpKernel(space, block_fn, "axis_aligned", meta={"kind": "cylindrical"})


def build_stable_like_kernel(space: FiniteMMSpace, scale: ScaleField,
                             lower_constant: float = 1.0) -> JumpKernel:
    """Variable-order stable-like density on a grid.

    j(x,y) = lower_constant / (V(x, |x-y|) * phi(x, |x-y|)), symmetrized by
    arithmetic averaging.  Materialized densely at build time.
    """
    if space.meta.get("kind") != "grid":
        raise ParameterError("stable-like kernel needs a grid space")
    n = space.n_points
    if n > DENSE_MATRIX_CAP:
        raise PointCapExceeded(n, DENSE_MATRIX_CAP)
    dist = space.pairwise()
    raw = np.zeros((n, n))
    for x in range(n):
        row = dist[x]
        order = np.argsort(row, kind="stable")
        cumw = np.concatenate([[0.0], np.cumsum(space.weights[order])])
        vol = cumw[np.searchsorted(row[order], row, side="left")]
        with np.errstate(divide="ignore", invalid="ignore"):
            phi_row = np.where(row <= 1.0, row ** scale.beta_values[x],
                               row ** scale.beta1)
            raw[x] = lower_constant / (vol * phi_row)
    raw[~np.isfinite(raw)] = 0.0
    np.fill_diagonal(raw, 0.0)
    jmat = 0.5 * (raw + raw.T)

    def block_fn(rows, cols):
        return jmat[np.ix_(rows, cols)]

    return JumpKernel(space, block_fn, "full",
                      meta={"kind": "stable_like", "lower_constant": lower_constant})


def build_nearest_neighbor_kernel(space: FiniteMMSpace, value: float = 1.0) -> JumpKernel:
    """Jump surrogate for a local form: jumps only at the minimal atom spacing."""
    n = space.n_points
    if n > DENSE_MATRIX_CAP:
        raise PointCapExceeded(n, DENSE_MATRIX_CAP)
    dist = space.pairwise()
    positive = dist[dist > 0]
    if positive.size == 0:
        raise ParameterError("space has fewer than two distinct points")
    h = float(positive.min())
    jmat = np.where((dist > 0) & (dist <= h * (1 + 1e-9)), value / h**2, 0.0)

    def block_fn(rows, cols):
        return jmat[np.ix_(rows, cols)]

    return JumpKernel(space, block_fn, "nearest_neighbor",
                      meta={"kind": "nearest_neighbor", "spacing": h})


def kernel_to_coo_json(kernel: JumpKernel) -> list[dict[str, Any]]:
    """Coordinate-list dump {i, j, value}; the symmetric half i < j only."""
    m = kernel.matrix()
    i_idx, j_idx = np.nonzero(np.triu(m, k=1))
    return [{"i": int(i), "j": int(j), "value": float(m[i, j])}
            for i, j in zip(i_idx, j_idx)]


def kernel_from_coo_json(space: FiniteMMSpace, entries) -> JumpKernel:
    n = space.n_points
    m = np.zeros((n, n))
    for e in entries:
        m[e["i"], e["j"]] = e["value"]
        m[e["j"], e["i"]] = e["value"]

    def block_fn(rows, cols):
        return m[np.ix_(rows, cols)]

    return JumpKernel(space, block_fn, "full", meta={"kind": "coo"})


# ---------------------------------------------------------------------------
# Tail quantities and checks
# ---------------------------------------------------------------------------

def tail_mass(kernel: JumpKernel, space: FiniteMMSpace, x: int, r: float) -> float:
    """Sum of j(x,y) mu(y) over atoms at distance >= r from x."""
    if r <= 0:
        raise ParameterError("tail radius must be positive")
    far = np.flatnonzero(space.dist_from(x) >= r)
    if far.size == 0:
        return 0.0
    vals = kernel.block(np.array([x]), far)[0]
    return float(vals @ space.weights[far])


def tail_mass_all(kernel: JumpKernel, space: FiniteMMSpace, r: float) -> np.ndarray:
    return np.array([tail_mass(kernel, space, x, r) for x in range(space.n_points)])


def tj_check(kernel: JumpKernel, space: FiniteMMSpace, scale: ScaleField,
             radius_grid, threshold: float | None = None) -> ConditionReport:
    """Best constant C = max over (x, r) of phi(x,r) * tail_mass(x, r)."""
    radii = np.asarray(radius_grid, dtype=float)
    if np.any(radii <= 0) or np.any(radii > space.diameter):
        raise ParameterError("radius grid must lie in (0, diameter]")
    best = 0.0
    witness: dict[str, Any] = {"x": None, "r": None}
    series = []
    for r in radii:
        tails = tail_mass_all(kernel, space, float(r))
        vals = tails * phi_vec(scale, np.arange(space.n_points), float(r))
        x = int(np.argmax(vals))
        series.append({"r": float(r), "C_at_r": float(vals[x]), "x": x})
        if vals[x] > best:
            best = float(vals[x])
            witness = {"x": x, "r": float(r), "tail_mass": float(tails[x])}
    passed = None if threshold is None else bool(best <= threshold)
    return ConditionReport(condition="tj", params={"radii": radii.tolist(),
                                                   "threshold": threshold},
                           best_constant=best, witness=witness, passed=passed,
                           series=series)


def tjq_check(kernel: JumpKernel, space: FiniteMMSpace, scale: ScaleField,
              q: float, radius_grid, threshold: float | None = None) -> ConditionReport:
    """L^q tail check for kernels with a density.

    Best constant over (x, r) of
    (sum_{d(x,y) >= r} j(x,y)^q mu(y))^(1/q) * V(x,r)^((q-1)/q) * phi(x,r).
    Axis-aligned and nearest-neighbor kernels are refused: their atomized
    intensities blow up with refinement, so no density-level bound is meant
    to hold for them.
    """
    if q < 1:
        raise ParameterError("q must be at least 1")
    if kernel.support_pattern != "full":
        raise UnsupportedKernelError(
            f"{kernel.support_pattern} kernel has no jump density; the L^q tail "
            "condition applies only to density kernels")
    radii = np.asarray(radius_grid, dtype=float)
    if np.any(radii <= 0) or np.any(radii > space.diameter):
        raise ParameterError("radius grid must lie in (0, diameter]")
    best = 0.0
    witness: dict[str, Any] = {}
    series = []
    for r in radii:
        worst_at_r = 0.0
        arg = None
        for x in range(space.n_points):
            far = np.flatnonzero(space.dist_from(x) >= r)
            if far.size == 0:
                continue
            vals = kernel.block(np.array([x]), far)[0]
            lq = float((vals ** q) @ space.weights[far]) ** (1.0 / q)
            v = space.volume(x, float(r))
            c = lq * v ** ((q - 1.0) / q) * phi(scale, x, float(r))
            if c > worst_at_r:
                worst_at_r, arg = c, x
        series.append({"r": float(r), "C_at_r": worst_at_r, "x": arg})
        if worst_at_r > best:
            best = worst_at_r
            witness = {"x": arg, "r": float(r)}
    passed = None if threshold is None else bool(best <= threshold)
    return ConditionReport(condition="tjq", params={"q": q, "radii": radii.tolist()},
                           best_constant=best, witness=witness, passed=passed,
                           series=series)


def ij_check(kernel: JumpKernel, space: FiniteMMSpace, scale: ScaleField,
             gamma: float, rR_pairs, x_sample=None) -> ConditionReport:
    """Annulus jump check weighted by inverse square-root ball volumes.

    For each pair (r, R) with r <= R and each sampled x, sums
    j(x,y) mu(y) / sqrt(V(y, phi^-1(y, r))) over the annulus between radii
    phi^-1(x, R) and 2 phi^-1(x, R), and forms
    Q = LHS * R * sqrt(V(x, phi^-1(x, r))).  Reports the best constant C
    making Q <= C (R/r)^gamma, and the exponent fitted from log max_x Q
    against log(R/r).
    """
    pairs = [(float(r), float(R)) for r, R in rR_pairs]
    if any(r <= 0 or r > R for r, R in pairs):
        raise ParameterError("need 0 < r <= R for every pair")
    xs = np.arange(space.n_points) if x_sample is None else np.asarray(x_sample)
    all_idx = np.arange(space.n_points)
    best = 0.0
    witness: dict[str, Any] = {}
    series = []
    fit_pts: dict[float, float] = {}
    vol_cache: dict[float, np.ndarray] = {}
    for r, big_r in pairs:
        if r not in vol_cache:
            inv_radii = phi_inverse_vec(scale, all_idx, r)
            vol_cache[r] = np.array([space.volume(int(y), float(inv_radii[y]))
                                     for y in all_idx])
        vols_r = vol_cache[r]
        q_max = 0.0
        arg = None
        for x in xs:
            r1 = phi_inverse(scale, int(x), big_r)
            d = space.dist_from(int(x))
            ann = np.flatnonzero((d >= r1) & (d < 2 * r1))
            if ann.size == 0:
                continue
            vals = kernel.block(np.array([int(x)]), ann)[0]
            lhs = float((vals * space.weights[ann] / np.sqrt(vols_r[ann])).sum())
            q_val = lhs * big_r * math.sqrt(vols_r[int(x)])
            if q_val > q_max:
                q_max, arg = q_val, int(x)
        ratio = big_r / r
        series.append({"r": r, "R": big_r, "Q_max": q_max, "x": arg})
        if q_max > 0:
            fit_pts[ratio] = max(fit_pts.get(ratio, 0.0), q_max)
        c_val = q_max * (r / big_r) ** gamma
        if c_val > best:
            best = c_val
            witness = {"x": arg, "r": r, "R": big_r}
    if len(fit_pts) >= 2:
        xs_fit = np.log(sorted(fit_pts))
        ys_fit = np.log([fit_pts[k] for k in sorted(fit_pts)])
        raw_slope = float(np.polyfit(xs_fit, ys_fit, 1)[0])
    else:
        raw_slope = math.nan
    # the condition is posed for gamma >= 0; a decaying fit means gamma = 0
    # is already the minimal admissible exponent
    gamma_hat = max(raw_slope, 0.0) if math.isfinite(raw_slope) else raw_slope
    return ConditionReport(
        condition="ij",
        params={"gamma": gamma, "pairs": pairs},
        best_constant=best,
        witness={**witness, "gamma_hat": gamma_hat, "fit_slope": raw_slope},
        passed=None,
        series=series,
    )


def cross_jump_mass(kernel: JumpKernel, space: FiniteMMSpace, r: float,
                    eta: float) -> float:
    """Jump mass between shrinking corner balls, restricted to long jumps.

    Sums j(z, w) mu(z) mu(w) over z within eta*r of the zero corner and w
    within eta*r of the e1 corner, keeping only pairs at distance >= 1/4.
    """
    if space.meta.get("kind") != "cantor":
        raise ParameterError("corner balls are defined only on cantor products")
    if r <= 0 or eta <= 0:
        raise ParameterError("need positive r and eta")
    rad = eta * r
    near0 = np.flatnonzero(space.dist_from_coord(space.meta["corner_zero"]) < rad)
    near1 = np.flatnonzero(space.dist_from_coord(space.meta["corner_e1"]) < rad)
    if near0.size == 0 or near1.size == 0:
        return 0.0
    vals = kernel.block(near0, near1)
    dist = np.empty_like(vals)
    for a, z in enumerate(near0):
        dist[a] = space.dist_from(int(z))[near1]
    vals = np.where(dist >= 0.25, vals, 0.0)
    return float(space.weights[near0] @ vals @ space.weights[near1])
