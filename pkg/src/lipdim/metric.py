"""Finite metric spaces: distance rules, nets, windows, rescaling, scale ladders.

A :class:`FiniteMetricSpace` is an immutable bundle of point labels, optional
ambient coordinates, and a :class:`MetricRule` that evaluates distances between
index arrays. All higher-level operations (component partitions, lightness
profiles, dimension estimators) consume this interface only, so every metric
rule automatically works with every engine.

Distances are always evaluated through a single code path
(:meth:`FiniteMetricSpace.dist_pairs`) so that fast component engines and
brute-force engines see bitwise-identical values.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ._config import (
    AXIOM_EXHAUSTIVE_CAP,
    AXIOM_SAMPLE_TRIPLES,
    DEFAULT_KAPPA,
    DEFAULT_RATIO,
    EXACT_DIAM_CAP,
    PAIR_BLOCK,
    PAIR_CACHE_CAP,
    REL_TOL,
    leq_tol,
)
from .errors import SpecError

__all__ = [
    "MetricRule",
    "EuclideanAmbient",
    "SnowflakePower",
    "Koranyi",
    "UltrametricWords",
    "TreePath",
    "ProductSup",
    "ExplicitMatrix",
    "KoranyiGrid",
    "FiniteMetricSpace",
    "ScaleLadder",
    "eps_net",
    "window",
    "rescale",
    "check_metric_axioms",
]


# ---------------------------------------------------------------------------
# Metric rules
# ---------------------------------------------------------------------------


class MetricRule:
    """Distance rule evaluated elementwise on index arrays of a space."""

    kind: str = "abstract"

    def pairdist(self, space: "FiniteMetricSpace", ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def subset(self, idx: np.ndarray) -> "MetricRule":
        """Rule for the subspace on positions ``idx`` (row-aligned data sliced)."""
        return self

    def rescale_plan(self, lam: float) -> tuple["MetricRule", np.ndarray | None]:
        """Return ``(new_rule, per_axis_coord_factors)`` realizing distances * lam.

        ``per_axis_coord_factors`` is ``None`` when ambient coordinates need no
        transformation (or do not exist).
        """
        return self, None

    def params(self) -> dict[str, Any]:
        """JSON-serializable parameter summary (excluding bulk data arrays)."""
        return {}

    # Per-axis candidate-pruning width: if d(p, q) <= r then every ambient
    # coordinate differs by at most the returned width. ``None`` disables
    # grid-bucket candidate generation for this rule.
    def grid_prune_width(self, space: "FiniteMetricSpace", r: float) -> np.ndarray | None:
        return None


@dataclass(frozen=True)
class EuclideanAmbient(MetricRule):
    """Euclidean distance on the space's ambient coordinates."""

    kind: str = field(default="euclidean", init=False)

    def pairdist(self, space, ia, ib):
        diff = space.coords[ia] - space.coords[ib]
        if diff.ndim == 1:
            return np.abs(diff)
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def rescale_plan(self, lam):
        return self, np.asarray(lam, dtype=float)

    def grid_prune_width(self, space, r):
        return np.full(space.coords.shape[1], r, dtype=float)


@dataclass(frozen=True)
class SnowflakePower(MetricRule):
    """Power transform d_base ** alpha of a base rule, 0 < alpha <= 1."""

    base: MetricRule
    alpha: float
    kind: str = field(default="snowflake", init=False)

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise SpecError(f"snowflake exponent must lie in (0, 1], got {self.alpha}")

    def pairdist(self, space, ia, ib):
        base = self.base.pairdist(space, ia, ib)
        if self.alpha == 1.0:
            return base
        if self.alpha == 0.5:
            return np.sqrt(base)
        return np.power(base, self.alpha)

    def subset(self, idx):
        return SnowflakePower(self.base.subset(idx), self.alpha)

    def rescale_plan(self, lam):
        base_rule, factors = self.base.rescale_plan(lam ** (1.0 / self.alpha))
        return SnowflakePower(base_rule, self.alpha), factors

    def params(self):
        return {"alpha": self.alpha, "base": {"kind": self.base.kind, "params": self.base.params()}}

    def grid_prune_width(self, space, r):
        return self.base.grid_prune_width(space, r ** (1.0 / self.alpha))


@dataclass(frozen=True)
class Koranyi(MetricRule):
    """Gauge quasinorm distance on R^3 coordinates (x, y, t) with group twist.

    d(p, q) = (|z_p - z_q|^4 + 16 * tau^2) ** (1/4) where
    tau = (t_p - t_q) + 0.5 * (y_q * x_p - x_q * y_p).
    The fourth root is evaluated as sqrt(sqrt(.)) so that power-of-two
    rescalings propagate exactly through the metric.
    """

    kind: str = field(default="koranyi", init=False)

    def pairdist(self, space, ia, ib):
        c = space.coords
        xa, ya, ta = c[ia, 0], c[ia, 1], c[ia, 2]
        xb, yb, tb = c[ib, 0], c[ib, 1], c[ib, 2]
        dx = xa - xb
        dy = ya - yb
        tau = (ta - tb) + 0.5 * (yb * xa - xb * ya)
        dz2 = dx * dx + dy * dy
        return np.sqrt(np.sqrt(dz2 * dz2 + 16.0 * (tau * tau)))

    def rescale_plan(self, lam):
        return self, np.array([lam, lam, lam * lam], dtype=float)

    def grid_prune_width(self, space, r):
        c = space.coords
        zmax = float(np.max(np.hypot(c[:, 0], c[:, 1]))) if len(c) else 0.0
        # |z_p - z_q| <= d and |t_p - t_q| <= tau_bound + twist bound.
        t_width = 0.25 * r * r + 0.5 * r * zmax
        return np.array([r, r, t_width], dtype=float)


@dataclass(frozen=True)
class UltrametricWords(MetricRule):
    """scale * 2^-m on fixed-length words, m = first differing position (1-based)."""

    words: np.ndarray
    scale: float = 1.0
    kind: str = field(default="ultrametric_words", init=False)

    def __post_init__(self):
        if self.words.ndim != 2:
            raise SpecError("word array must be 2-dimensional (n_points, depth)")
        if self.scale <= 0:
            raise SpecError("ultrametric scale must be positive")

    def pairdist(self, space, ia, ib):
        wa = self.words[ia]
        wb = self.words[ib]
        neq = wa != wb
        has = neq.any(axis=1)
        first = np.argmax(neq, axis=1).astype(float)
        return np.where(has, self.scale * np.exp2(-(first + 1.0)), 0.0)

    def subset(self, idx):
        return UltrametricWords(self.words[idx], self.scale)

    def rescale_plan(self, lam):
        return UltrametricWords(self.words, self.scale * lam), None

    def params(self):
        return {"scale": self.scale, "depth": int(self.words.shape[1])}

    @property
    def depth(self) -> int:
        return int(self.words.shape[1])


@dataclass(frozen=True)
class TreePath(MetricRule):
    """Shortest-path distance on a tree, precomputed as a dense matrix."""

    matrix: np.ndarray
    root: int = 0
    edges: tuple[tuple[int, int, float], ...] = ()
    kind: str = field(default="tree_path", init=False)

    def pairdist(self, space, ia, ib):
        return self.matrix[ia, ib]

    def subset(self, idx):
        sub = self.matrix[np.ix_(idx, idx)]
        root_pos = np.nonzero(np.asarray(idx) == self.root)[0]
        new_root = int(root_pos[0]) if root_pos.size else -1
        return TreePath(sub, new_root, ())

    def rescale_plan(self, lam):
        edges = tuple((a, b, w * lam) for a, b, w in self.edges)
        return TreePath(self.matrix * lam, self.root, edges), None

    def params(self):
        return {"root": int(self.root), "n_edges": len(self.edges)}


@dataclass(frozen=True)
class ProductSup(MetricRule):
    """Sup (max) metric on pairs drawn from two factor spaces."""

    left: "FiniteMetricSpace"
    right: "FiniteMetricSpace"
    left_index: np.ndarray
    right_index: np.ndarray
    kind: str = field(default="product_sup", init=False)

    def pairdist(self, space, ia, ib):
        dl = self.left.dist_pairs(self.left_index[ia], self.left_index[ib])
        dr = self.right.dist_pairs(self.right_index[ia], self.right_index[ib])
        return np.maximum(dl, dr)

    def subset(self, idx):
        return ProductSup(self.left, self.right, self.left_index[idx], self.right_index[idx])

    def params(self):
        return {
            "left": {"kind": self.left.metric.kind, "n": self.left.n},
            "right": {"kind": self.right.metric.kind, "n": self.right.n},
        }

    def grid_prune_width(self, space, r):
        wl = self.left.metric.grid_prune_width(self.left, r)
        wr = self.right.metric.grid_prune_width(self.right, r)
        if wl is None or wr is None or space.coords is None:
            return None
        both = np.concatenate([wl, wr])
        if both.size != space.coords.shape[1]:
            return None
        return both


@dataclass(frozen=True)
class ExplicitMatrix(MetricRule):
    """Distances given verbatim as a dense symmetric matrix."""

    matrix: np.ndarray
    kind: str = field(default="explicit", init=False)

    def pairdist(self, space, ia, ib):
        return self.matrix[ia, ib]

    def subset(self, idx):
        return ExplicitMatrix(self.matrix[np.ix_(idx, idx)])

    def rescale_plan(self, lam):
        return ExplicitMatrix(self.matrix * lam), np.asarray(lam, dtype=float)

    def params(self):
        return {"n": int(self.matrix.shape[0])}


# ---------------------------------------------------------------------------
# Lattice metadata for the anisotropic-grid fast path
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KoranyiGrid:
    """Integer lattice indices (ix, iy, it) with spacings (xy: s, t: s_t).

    Coordinates satisfy x = ix * xy_spacing, y = iy * xy_spacing,
    t = it * t_spacing exactly; engines exploit this to enumerate vertical
    runs and evaluate exact minimal cross-column distances in O(1).
    """

    index: np.ndarray
    xy_spacing: float
    t_spacing: float

    def subset(self, idx: np.ndarray) -> "KoranyiGrid":
        return KoranyiGrid(self.index[idx], self.xy_spacing, self.t_spacing)

    def rescaled(self, lam: float) -> "KoranyiGrid":
        return KoranyiGrid(self.index, self.xy_spacing * lam, self.t_spacing * lam * lam)


# ---------------------------------------------------------------------------
# Finite metric space
# ---------------------------------------------------------------------------


class FiniteMetricSpace:
    """Immutable finite metric space: labels, optional coordinates, a rule.

    Parameters
    ----------
    metric:
        Distance rule.
    coords:
        Optional ambient coordinates, shape (n, k).
    ids:
        Original point labels (default ``arange(n)``); preserved by windows
        and subsets so provenance survives restriction.
    resolution:
        Declared sampling fineness (mesh of the net); required to build
        certified scale ladders.
    meta:
        Free-form metadata (generator provenance, lattice info, axis groups).
    """

    def __init__(
        self,
        metric: MetricRule,
        coords: np.ndarray | None = None,
        ids: np.ndarray | None = None,
        resolution: float | None = None,
        meta: dict[str, Any] | None = None,
        n: int | None = None,
        diameter_hint: tuple[float, bool] | None = None,
    ) -> None:
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
            n = coords.shape[0] if n is None else n
        if n is None:
            if isinstance(metric, UltrametricWords):
                n = metric.words.shape[0]
            elif isinstance(metric, (ExplicitMatrix, TreePath)):
                n = metric.matrix.shape[0]
            elif isinstance(metric, ProductSup):
                n = metric.left_index.shape[0]
            else:
                raise SpecError("cannot infer point count: provide coords or n")
        if ids is None:
            ids = np.arange(n, dtype=np.int64)
        else:
            ids = np.asarray(ids, dtype=np.int64)
            if ids.shape[0] != n:
                raise SpecError("ids length does not match point count")
        self.metric = metric
        self.coords = coords
        self.ids = ids
        self.resolution = resolution
        self.meta: dict[str, Any] = dict(meta or {})
        self._n = int(n)
        self._matrix: np.ndarray | None = None
        self._diam: tuple[float, bool] | None = diameter_hint
        self._id_order: np.ndarray | None = None

    # -- basic accessors ----------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def ndim(self) -> int:
        return 0 if self.coords is None else int(self.coords.shape[1])

    def __len__(self) -> int:
        return self._n

    def __repr__(self) -> str:
        name = self.meta.get("name", self.metric.kind)
        return f"FiniteMetricSpace({name!r}, n={self._n}, metric={self.metric.kind})"

    def positions_of(self, ids: Sequence[int] | np.ndarray) -> np.ndarray:
        """Positions (0..n-1) of the given original labels."""
        ids = np.asarray(ids, dtype=np.int64)
        if self._id_order is None:
            self._id_order = np.argsort(self.ids, kind="stable")
        order = self._id_order
        pos = order[np.searchsorted(self.ids[order], ids)]
        if not np.array_equal(self.ids[pos], ids):
            raise SpecError("unknown point id(s) requested")
        return pos

    # -- distance evaluation --------------------------------------------------

    def dist_pairs(self, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
        """Elementwise distances d(ia[k], ib[k]) for position arrays."""
        ia = np.asarray(ia, dtype=np.intp)
        ib = np.asarray(ib, dtype=np.intp)
        return self.metric.pairdist(self, ia, ib)

    def dist(self, i: int, j: int) -> float:
        return float(self.dist_pairs(np.array([i]), np.array([j]))[0])

    def dist_one_to_many(self, i: int, idx: np.ndarray | None = None) -> np.ndarray:
        if idx is None:
            idx = np.arange(self._n, dtype=np.intp)
        else:
            idx = np.asarray(idx, dtype=np.intp)
        return self.dist_pairs(np.full(idx.shape[0], i, dtype=np.intp), idx)

    def dist_cross(self, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
        """Dense block of distances, shape (len(ia), len(ib)), chunked."""
        ia = np.asarray(ia, dtype=np.intp)
        ib = np.asarray(ib, dtype=np.intp)
        out = np.empty((ia.size, ib.size), dtype=float)
        rows = max(1, PAIR_BLOCK // max(ib.size, 1))
        for s in range(0, ia.size, rows):
            e = min(s + rows, ia.size)
            big_a = np.repeat(ia[s:e], ib.size)
            big_b = np.tile(ib, e - s)
            out[s:e] = self.dist_pairs(big_a, big_b).reshape(e - s, ib.size)
        return out

    def pairwise_matrix(self) -> np.ndarray:
        """Full cached distance matrix; only for spaces up to the pair cap."""
        if self._matrix is None:
            if self._n > PAIR_CACHE_CAP:
                raise SpecError(
                    f"pairwise matrix requested for n={self._n} above cap {PAIR_CACHE_CAP}"
                )
            idx = np.arange(self._n, dtype=np.intp)
            self._matrix = self.dist_cross(idx, idx)
        return self._matrix

    # -- global quantities ----------------------------------------------------

    def diameter(self) -> float:
        return self._diameter_info()[0]

    @property
    def diameter_exact(self) -> bool:
        return self._diameter_info()[1]

    def _diameter_info(self) -> tuple[float, bool]:
        if self._diam is None:
            if self._n <= 1:
                self._diam = (0.0, True)
            elif self._n <= EXACT_DIAM_CAP:
                idx = np.arange(self._n, dtype=np.intp)
                best = 0.0
                rows = max(1, PAIR_BLOCK // self._n)
                for s in range(0, self._n, rows):
                    e = min(s + rows, self._n)
                    block = self.dist_cross(idx[s:e], idx)
                    best = max(best, float(block.max()))
                self._diam = (best, True)
            else:
                self._diam = (self._farthest_point_diameter(), False)
        return self._diam

    def _farthest_point_diameter(self, rounds: int = 4) -> float:
        pos = 0
        best = 0.0
        for _ in range(rounds):
            d = self.dist_one_to_many(pos)
            j = int(np.argmax(d))
            if d[j] <= best:
                break
            best = float(d[j])
            pos = j
        return best

    def min_positive_distance(self) -> float:
        """Smallest positive pairwise distance (exact; capped size only)."""
        if self._n > PAIR_CACHE_CAP:
            raise SpecError("min_positive_distance needs n within the pair cap")
        idx = np.arange(self._n, dtype=np.intp)
        best = math.inf
        rows = max(1, PAIR_BLOCK // max(self._n, 1))
        for s in range(0, self._n, rows):
            e = min(s + rows, self._n)
            block = self.dist_cross(idx[s:e], idx)
            positive = block[block > 0]
            if positive.size:
                best = min(best, float(positive.min()))
        if not math.isfinite(best):
            raise SpecError("space has no positive distances")
        return best

    # -- derived spaces ---------------------------------------------------------

    def subset(self, idx: np.ndarray, name: str | None = None) -> "FiniteMetricSpace":
        """Restriction to positions ``idx`` (original ids preserved)."""
        idx = np.asarray(idx, dtype=np.intp)
        meta = dict(self.meta)
        grid = meta.get("koranyi_grid")
        if isinstance(grid, KoranyiGrid):
            meta["koranyi_grid"] = grid.subset(idx)
        if name:
            meta["name"] = name
        coords = None if self.coords is None else self.coords[idx]
        return FiniteMetricSpace(
            metric=self.metric.subset(idx),
            coords=coords,
            ids=self.ids[idx],
            resolution=self.resolution,
            meta=meta,
            n=idx.shape[0],
        )

    def rescale(self, lam: float) -> "FiniteMetricSpace":
        """Space with every distance multiplied by ``lam`` (> 0)."""
        if not lam > 0:
            raise SpecError(f"rescale factor must be positive, got {lam}")
        meta = dict(self.meta)
        grid = meta.get("koranyi_grid")
        if isinstance(grid, KoranyiGrid):
            meta["koranyi_grid"] = grid.rescaled(lam)
        if isinstance(self.metric, ProductSup):
            rule = ProductSup(
                self.metric.left.rescale(lam),
                self.metric.right.rescale(lam),
                self.metric.left_index,
                self.metric.right_index,
            )
            coords = _product_coords(rule)
        else:
            rule, factors = self.metric.rescale_plan(lam)
            coords = self.coords
            if coords is not None and factors is not None:
                coords = coords * factors
        diam_hint = None
        if self._diam is not None:
            diam_hint = (self._diam[0] * lam, self._diam[1])
        out = FiniteMetricSpace(
            metric=rule,
            coords=coords,
            ids=self.ids,
            resolution=None if self.resolution is None else self.resolution * lam,
            meta=meta,
            n=self._n,
            diameter_hint=diam_hint,
        )
        return out

    def window(self, center: int, radius: float) -> "FiniteMetricSpace":
        """Closed metric ball around the point with original id ``center``."""
        pos = int(self.positions_of([center])[0])
        d = self.dist_one_to_many(pos)
        sel = np.nonzero(d <= radius * (1.0 + REL_TOL))[0]
        return self.subset(sel, name=f"window(id={center}, r={radius:g})")


def _product_coords(rule: ProductSup) -> np.ndarray | None:
    if rule.left.coords is None or rule.right.coords is None:
        return None
    return np.hstack([rule.left.coords[rule.left_index], rule.right.coords[rule.right_index]])


# ---------------------------------------------------------------------------
# Module-level operation wrappers (spec-facing API)
# ---------------------------------------------------------------------------


def eps_net(space: FiniteMetricSpace, eps: float) -> np.ndarray:
    """Greedy farthest-point eps-net; returns positions in insertion order.

    The result is eps-separated and covers the space within eps. Seeded at the
    lowest original id; ties on the farthest distance break to the lowest id.
    """
    if eps <= 0:
        raise SpecError(f"eps must be positive, got {eps}")
    if space.n == 0:
        return np.empty(0, dtype=np.intp)
    start = int(np.argmin(space.ids))
    chosen = [start]
    dmin = space.dist_one_to_many(start)
    while True:
        far = float(dmin.max())
        if far < eps:
            break
        cands = np.nonzero(dmin == far)[0]
        nxt = int(cands[np.argmin(space.ids[cands])])
        chosen.append(nxt)
        np.minimum(dmin, space.dist_one_to_many(nxt), out=dmin)
    return np.asarray(chosen, dtype=np.intp)


def window(space: FiniteMetricSpace, center: int, radius: float) -> FiniteMetricSpace:
    """Closed ball restriction; original ids preserved."""
    return space.window(center, radius)


def rescale(space: FiniteMetricSpace, lam: float) -> FiniteMetricSpace:
    """Metrically rescaled copy of the space (distances multiplied by lam)."""
    return space.rescale(lam)


# ---------------------------------------------------------------------------
# Scale ladders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaleLadder:
    """Strictly decreasing geometric sequence of certified scales.

    ``r_values[j+1] = ratio * r_values[j]`` exactly (floating product), and no
    certified scale is allowed below ``kappa *`` the space's declared
    resolution.
    """

    r_values: tuple[float, ...]
    ratio: float = DEFAULT_RATIO
    kappa: float = DEFAULT_KAPPA
    floor: float = 0.0

    def __post_init__(self):
        vals = tuple(float(v) for v in self.r_values)
        if not vals:
            raise SpecError("scale ladder must contain at least one scale")
        if any(v <= 0 for v in vals):
            raise SpecError("ladder scales must be positive")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise SpecError("ladder scales must be strictly decreasing")
        object.__setattr__(self, "r_values", vals)

    def __len__(self) -> int:
        return len(self.r_values)

    def __iter__(self):
        return iter(self.r_values)

    @classmethod
    def for_space(
        cls,
        space: FiniteMetricSpace,
        ratio: float = DEFAULT_RATIO,
        kappa: float = DEFAULT_KAPPA,
        r_max: float | None = None,
    ) -> "ScaleLadder":
        """Ladder from ~diam/2 down to the resolution floor ``kappa * resolution``."""
        if not (0 < ratio < 1):
            raise SpecError(f"ladder ratio must lie in (0, 1), got {ratio}")
        res = space.resolution
        if res is None:
            if space.n <= PAIR_CACHE_CAP:
                res = space.min_positive_distance()
            else:
                raise SpecError("space has no declared resolution; cannot certify a ladder")
        floor = kappa * res
        if r_max is None:
            diam = space.diameter()
            r_max = diam / 2.0
        if r_max <= 0:
            raise SpecError("ladder upper scale must be positive (empty or singleton space?)")
        values = []
        r = float(r_max)
        while r >= floor:
            values.append(r)
            r = r * ratio
        if not values:
            raise SpecError(
                "no certified scales: top scale "
                f"{r_max:g} is below kappa*resolution = {kappa:g}*{res:g} = {floor:g}; "
                "lower kappa or refine the space"
            )
        return cls(tuple(values), ratio=ratio, kappa=kappa, floor=floor)

    def validate_for(self, space: FiniteMetricSpace, kappa: float | None = None) -> None:
        """Raise SpecError if any scale dips below kappa * resolution."""
        k = self.kappa if kappa is None else kappa
        res = space.resolution
        if res is None:
            return
        floor = k * res
        bad = [r for r in self.r_values if r < floor * (1.0 - REL_TOL)]
        if bad:
            raise SpecError(
                f"scales {bad} fall below the certification floor kappa*resolution = "
                f"{k:g}*{res:g} = {floor:g}"
            )

    def rescaled(self, lam: float) -> "ScaleLadder":
        return ScaleLadder(
            tuple(r * lam for r in self.r_values),
            ratio=self.ratio,
            kappa=self.kappa,
            floor=self.floor * lam,
        )


# ---------------------------------------------------------------------------
# Metric-axiom validation
# ---------------------------------------------------------------------------


def check_metric_axioms(
    space: FiniteMetricSpace,
    rng: np.random.Generator | None = None,
    slack: float | None = None,
) -> dict[str, Any]:
    """Validate identity, symmetry, and the (strong) triangle inequality.

    Exhaustive for spaces up to the axiom cap; randomized triple sampling
    beyond it. Returns a report dict with per-axiom verdicts and the worst
    observed violation.
    """
    n = space.n
    report: dict[str, Any] = {"n": n}
    if n == 0:
        report.update(identity_ok=True, symmetry_ok=True, triangle_ok=True, mode="empty")
        return report
    if slack is None:
        diam = space.diameter() if n <= EXACT_DIAM_CAP else space._farthest_point_diameter()
        slack = 1e-12 * max(diam, 1.0)
    idx = np.arange(n, dtype=np.intp)
    self_d = space.dist_pairs(idx, idx)
    report["identity_ok"] = bool(np.all(self_d == 0.0))
    ultra = isinstance(space.metric, UltrametricWords) or (
        isinstance(space.metric, SnowflakePower)
        and isinstance(space.metric.base, UltrametricWords)
    )
    if n <= AXIOM_EXHAUSTIVE_CAP:
        m = space.dist_cross(idx, idx)
        report["symmetry_ok"] = bool(np.array_equal(m, m.T))
        worst = 0.0
        worst_strong = 0.0
        for k in range(n):
            bound = m[:, k][:, None] + m[k, :][None, :]
            worst = max(worst, float((m - bound).max()))
            if ultra:
                strong = np.maximum(m[:, k][:, None], m[k, :][None, :])
                worst_strong = max(worst_strong, float((m - strong).max()))
        report["triangle_violation"] = worst
        report["triangle_ok"] = worst <= slack
        if ultra:
            report["strong_triangle_violation"] = worst_strong
            report["strong_triangle_ok"] = worst_strong <= slack
        report["mode"] = "exhaustive"
    else:
        rng = rng or np.random.default_rng(0)
        m3 = rng.integers(0, n, size=(AXIOM_SAMPLE_TRIPLES, 3))
        i, j, k = m3[:, 0], m3[:, 1], m3[:, 2]
        dik = space.dist_pairs(i, k)
        dij = space.dist_pairs(i, j)
        djk = space.dist_pairs(j, k)
        worst = float((dik - (dij + djk)).max())
        report["triangle_violation"] = worst
        report["triangle_ok"] = worst <= slack
        pairs = rng.integers(0, n, size=(AXIOM_SAMPLE_TRIPLES, 2))
        dab = space.dist_pairs(pairs[:, 0], pairs[:, 1])
        dba = space.dist_pairs(pairs[:, 1], pairs[:, 0])
        report["symmetry_ok"] = bool(np.array_equal(dab, dba))
        if ultra:
            worst_strong = float((dik - np.maximum(dij, djk)).max())
            report["strong_triangle_violation"] = worst_strong
            report["strong_triangle_ok"] = worst_strong <= slack
        report["mode"] = "sampled"
    return report
