"""Finite metric measure spaces.

A :class:`FiniteMMSpace` is a finite set of atoms with coordinates, a metric
(sup metric over coordinate axes by default, or an explicit matrix), and
strictly positive weights.  Builders produce Cantor-set products, uniform
grids on the unit cube, the two-point oracle space, and custom spaces.  Ball
queries use strict inequality (open balls).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import ParameterError, PointCapExceeded

DEFAULT_POINT_CAP = 4096

# Dense all-pairs work (distance matrices, eigensolves) is O(N^2)..O(N^3);
# anything above this must stay on the lazy per-point path.
DENSE_MATRIX_CAP = 8192


@dataclass
class FiniteMMSpace:
    """Finite point set with a metric and positive weights.

    coords has shape (n_points, n_axes).  Under the "sup" metric the distance
    is the max of per-axis absolute differences; "explicit" uses a stored
    distance matrix.  Instances are treated as immutable after construction.
    """

    coords: np.ndarray
    weights: np.ndarray
    diameter: float
    metric_kind: str = "sup"
    metric_matrix: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        if self.coords.ndim == 1:
            self.coords = self.coords[:, None]
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights <= 0):
            raise ParameterError("all weights must be strictly positive")
        if self.metric_kind not in ("sup", "explicit"):
            raise ParameterError(f"unknown metric kind {self.metric_kind!r}")
        if self.metric_kind == "explicit":
            if self.metric_matrix is None:
                raise ParameterError("explicit metric requires metric_matrix")
            self.metric_matrix = np.asarray(self.metric_matrix, dtype=float)

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    @property
    def n_axes(self) -> int:
        return self.coords.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def points(self) -> list[int]:
        return list(range(self.n_points))

    def dist(self, i: int, k: int) -> float:
        if self.metric_kind == "explicit":
            return float(self.metric_matrix[i, k])
        return float(np.max(np.abs(self.coords[i] - self.coords[k])))

    def dist_from(self, i: int) -> np.ndarray:
        """Distances from point ``i`` to every point, shape (n_points,)."""
        self._check_index(i)
        if self.metric_kind == "explicit":
            return self.metric_matrix[i].copy()
        return np.max(np.abs(self.coords - self.coords[i]), axis=1)

    def dist_from_coord(self, coord) -> np.ndarray:
        """Sup-metric distances from an ambient coordinate (need not be an atom)."""
        if self.metric_kind != "sup":
            raise ParameterError("ambient coordinates require the sup metric")
        coord = np.asarray(coord, dtype=float)
        return np.max(np.abs(self.coords - coord), axis=1)

    def pairwise(self) -> np.ndarray:
        """Full distance matrix; refuses above the dense-matrix cap."""
        if self.n_points > DENSE_MATRIX_CAP:
            raise PointCapExceeded(self.n_points, DENSE_MATRIX_CAP)
        if self.metric_kind == "explicit":
            return self.metric_matrix.copy()
        diff = np.abs(self.coords[:, None, :] - self.coords[None, :, :])
        return diff.max(axis=2)

    def ball(self, x: int, r: float) -> "BallQuery":
        if r <= 0:
            raise ParameterError("ball radius must be positive")
        self._check_index(x)
        member = np.flatnonzero(self.dist_from(x) < r)
        return BallQuery(center=x, radius=float(r), member_idx=member,
                         volume=float(self.weights[member].sum()))

    def volume(self, x: int, r: float) -> float:
        return self.ball(x, r).volume

    def volumes(self, x: int, radii) -> np.ndarray:
        """Ball volumes at several radii around ``x`` in one sorted sweep."""
        dist = self.dist_from(x)
        order = np.argsort(dist, kind="stable")
        cumw = np.concatenate([[0.0], np.cumsum(self.weights[order])])
        idx = np.searchsorted(dist[order], np.asarray(radii, dtype=float), side="left")
        return cumw[idx]

    def _check_index(self, i: int) -> None:
        if not (0 <= int(i) < self.n_points):
            raise ParameterError(f"unknown point id {i}")


@dataclass
class BallQuery:
    center: int
    radius: float
    member_idx: np.ndarray
    volume: float


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**9)


def cantor_axis_endpoints(xi: Fraction, level: int) -> list[Fraction]:
    """Left endpoints of the level-``level`` middle-``xi`` construction intervals."""
    offset = (1 + xi) / 2
    child = (1 - xi) / 2
    endpoints = [Fraction(0)]
    length = Fraction(1)
    for _ in range(level):
        endpoints = sorted(e for a in endpoints for e in (a, a + offset * length))
        length *= child
    return endpoints


def cantor_volume_exponent(xi: float) -> float:
    """Mass-scaling exponent of the middle-``xi`` construction: log2 / log(2/(1-xi))."""
    return math.log(2.0) / math.log(2.0 / (1.0 - float(xi)))


def build_cantor_product(xi, n: int, level: int,
                         point_cap: int = DEFAULT_POINT_CAP) -> FiniteMMSpace:
    """n-fold product of a level-``level`` middle-``xi`` Cantor approximation.

    Atoms sit at the left endpoints of surviving intervals, each with weight
    2^(-n*level); the metric is the sup metric over axes and the declared
    diameter is the ambient diameter 1.
    """
    xi_frac = _as_fraction(xi)
    if not (0 < xi_frac < 1):
        raise ParameterError("xi must lie strictly between 0 and 1")
    if level < 1 or level > 16:
        raise ParameterError("level must be in 1..16")
    if n < 1:
        raise ParameterError("n must be a positive integer")
    n_points = 2 ** (n * level)
    if n_points > point_cap:
        raise PointCapExceeded(n_points, point_cap)
    axis = [float(e) for e in cantor_axis_endpoints(xi_frac, level)]
    coords = np.array(list(itertools.product(axis, repeat=n)), dtype=float)
    weights = np.full(n_points, 1.0 / n_points)
    meta = {
        "kind": "cantor",
        "xi": float(xi_frac),
        "xi_fraction": (xi_frac.numerator, xi_frac.denominator),
        "n_axes": n,
        "level": level,
        "axis_endpoints": axis,
        "axis_atoms": 2 ** level,
        "alpha": cantor_volume_exponent(float(xi_frac)),
        "corner_zero": [0.0] * n,
        "corner_e1": [1.0] + [0.0] * (n - 1),
    }
    return FiniteMMSpace(coords=coords, weights=weights, diameter=1.0, meta=meta)


def build_grid(d: int, side: int, point_cap: int = DEFAULT_POINT_CAP) -> FiniteMMSpace:
    """Uniform side^d grid on [0,1]^d with sup metric, weight side^-d per atom."""
    if side < 2:
        raise ParameterError("side must be at least 2")
    if d < 1:
        raise ParameterError("d must be a positive integer")
    n_points = side ** d
    if n_points > point_cap:
        raise PointCapExceeded(n_points, point_cap)
    axis = np.linspace(0.0, 1.0, side)
    coords = np.array(list(itertools.product(axis, repeat=d)), dtype=float)
    weights = np.full(n_points, 1.0 / n_points)
    meta = {"kind": "grid", "n_axes": d, "side": side,
            "spacing": 1.0 / (side - 1)}
    return FiniteMMSpace(coords=coords, weights=weights, diameter=1.0, meta=meta)


def build_two_point(gap: float = 1.0, weights=(0.5, 0.5)) -> FiniteMMSpace:
    """The two-point oracle space: atoms at 0 and ``gap``."""
    if gap <= 0:
        raise ParameterError("gap must be positive")
    w = np.asarray(weights, dtype=float)
    if w.shape != (2,):
        raise ParameterError("two-point space needs exactly two weights")
    coords = np.array([[0.0], [float(gap)]])
    meta = {"kind": "two_point", "n_axes": 1, "gap": float(gap)}
    return FiniteMMSpace(coords=coords, weights=w, diameter=float(gap), meta=meta)


def build_custom(coords, weights, metric_matrix=None, diameter: float | None = None,
                 meta: dict | None = None) -> FiniteMMSpace:
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    kind = "explicit" if metric_matrix is not None else "sup"
    space = FiniteMMSpace(coords=coords, weights=np.asarray(weights, dtype=float),
                          diameter=0.0, metric_kind=kind,
                          metric_matrix=metric_matrix,
                          meta={"kind": "custom", **(meta or {})})
    if diameter is None:
        diameter = float(space.pairwise().max()) if space.n_points > 1 else 0.0
    space.diameter = float(diameter)
    return space


# ---------------------------------------------------------------------------
# Doubling-exponent fits
# ---------------------------------------------------------------------------

def _check_radius_grid(space: FiniteMMSpace, radius_grid) -> np.ndarray:
    radii = np.asarray(radius_grid, dtype=float)
    if radii.size < 4:
        raise ParameterError("radius grid needs at least 4 entries")
    if np.any(np.diff(radii) <= 0):
        raise ParameterError("radius grid must be strictly increasing")
    if np.any(radii <= 0):
        raise ParameterError("radii must be positive")
    if np.any(radii >= space.diameter):
        raise ParameterError("radii must stay below the diameter")
    return radii


def _per_point_slopes(space: FiniteMMSpace, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    log_r = np.log(radii)
    slopes = np.empty(space.n_points)
    vols = np.empty((space.n_points, radii.size))
    for x in range(space.n_points):
        v = space.volumes(x, radii)
        if np.any(v <= 0):
            raise ParameterError("a radius captured zero points; refine the grid")
        vols[x] = v
        slopes[x] = np.polyfit(log_r, np.log(v), 1)[0]
    return slopes, vols


def fit_vd_exponent(space: FiniteMMSpace, radius_grid) -> tuple[float, float]:
    """Volume-growth exponent fit.

    Returns ``(alpha_hat, per_point_max_ratio)``: the mean over atoms of the
    log-log least-squares slope of V(x, r), and the largest value of
    (V(x,R)/V(x,r)) / (R/r)^alpha_hat over atoms and grid pairs r <= R, i.e.
    the doubling constant realized by the fitted exponent.
    """
    radii = _check_radius_grid(space, radius_grid)
    slopes, vols = _per_point_slopes(space, radii)
    alpha_hat = float(slopes.mean())
    ratio = vols[:, None, :] / vols[:, :, None]        # (x, r, R)
    scale = (radii[None, :] / radii[:, None]) ** alpha_hat
    upper = np.triu_indices(radii.size, k=1)
    max_ratio = float((ratio[:, upper[0], upper[1]] / scale[upper]).max())
    return alpha_hat, max_ratio


def fit_rvd_exponent(space: FiniteMMSpace, radius_grid) -> float:
    """Reverse-doubling exponent: least-squares slope of the lower volume envelope.

    Fits log min_x V(x, r) against log r, clamped from above by the forward
    exponent estimate: two-sided power bounds force the reverse exponent to
    sit at or below the forward one, so the clamp encodes a structural
    constraint rather than data.
    """
    radii = _check_radius_grid(space, radius_grid)
    slopes, vols = _per_point_slopes(space, radii)
    envelope = np.log(vols.min(axis=0))
    env_slope = float(np.polyfit(np.log(radii), envelope, 1)[0])
    return min(env_slope, float(slopes.mean()))


def dyadic_radius_grid(space: FiniteMMSpace, k_min: int = 1, k_max: int | None = None) -> np.ndarray:
    """Radii 2^-k, ascending, staying above the atom scale and below the diameter."""
    if k_max is None:
        nz = space.dist_from(0)
        atom = float(nz[nz > 0].min()) if np.any(nz > 0) else 1e-6
        k_max = max(k_min + 3, int(np.floor(-np.log2(max(atom, 1e-12)))))
    radii = 2.0 ** (-np.arange(k_min, k_max + 1, dtype=float))
    radii = radii[radii < space.diameter]
    return np.sort(radii)


# ---------------------------------------------------------------------------
# Metric-axiom scan
# ---------------------------------------------------------------------------

def metric_axioms_ok(space: FiniteMMSpace, rng: np.random.Generator | None = None,
                     n_samples: int = 200_000, tol: float = 1e-12) -> bool:
    """Exhaustive triangle/symmetry scan for <= 200 points, sampled triples above."""
    n = space.n_points
    if n <= 200:
        d = space.pairwise()
        if not np.allclose(d, d.T, atol=tol):
            return False
        if np.any(np.abs(np.diag(d)) > tol) or np.any(d < -tol):
            return False
        for k in range(n):
            if np.any(d > d[:, [k]] + d[[k], :] + tol):
                return False
        return True
    rng = rng or np.random.default_rng(0)
    idx = rng.integers(0, n, size=(n_samples, 3))
    for i, j, k in idx:
        dij, djk, dik = space.dist(i, j), space.dist(j, k), space.dist(i, k)
        if dik > dij + djk + tol or abs(dij - space.dist(j, i)) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

def space_to_json(space: FiniteMMSpace) -> str:
    doc = {
        "points": space.points,
        "coords": space.coords.tolist(),
        "weights": space.weights.tolist(),
        "metric": space.metric_kind,
        "diameter": space.diameter,
        "meta": {k: v for k, v in space.meta.items() if not isinstance(v, np.ndarray)},
    }
    if space.metric_kind == "explicit":
        doc["metric_matrix"] = space.metric_matrix.tolist()
    return json.dumps(doc, sort_keys=True)


def space_from_json(text: str) -> FiniteMMSpace:
    doc = json.loads(text)
    return FiniteMMSpace(
        coords=np.asarray(doc["coords"], dtype=float),
        weights=np.asarray(doc["weights"], dtype=float),
        diameter=float(doc["diameter"]),
        metric_kind=doc["metric"],
        metric_matrix=(np.asarray(doc["metric_matrix"], dtype=float)
                       if doc.get("metric_matrix") is not None else None),
        meta=doc.get("meta", {}),
    )
