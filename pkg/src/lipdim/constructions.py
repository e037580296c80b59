"""Map constructions: projections, products, extensions, codings, foldings.

These build :class:`~lipdim.lightness.SampledMap` objects from spaces. Linear
projections record a claimed Lipschitz constant of 1 only when the domain
metric is the ambient Euclidean one; for other rules (gauge metrics,
snowflakes) the constant is left to measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._config import DEDUP_CAP, PAIR_BLOCK, REL_TOL
from .errors import SpecError
from .generators import product, word_cantor
from .lightness import SampledMap
from .metric import (
    EuclideanAmbient,
    FiniteMetricSpace,
    ProductSup,
    TreePath,
)

__all__ = [
    "MapSpec",
    "build_map",
    "identity_map",
    "constant_map",
    "projection",
    "product_map",
    "restrict_domain",
    "rescale_map",
    "mcshane_extend",
    "union_map",
    "cantor_coding_map",
    "tree_root_map",
    "abs_fold_map",
]


@dataclass(frozen=True)
class MapSpec:
    """Declarative recipe for a map built against a loaded space."""

    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MapSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise SpecError("map spec must be an object with a 'kind' field")
        return cls(kind=str(data["kind"]), params=dict(data.get("params", {})))


# ---------------------------------------------------------------------------
# Elementary maps
# ---------------------------------------------------------------------------


def identity_map(space: FiniteMetricSpace) -> SampledMap:
    return SampledMap(
        space, space, np.arange(space.n, dtype=np.intp), name="identity", claimed_lipschitz=1.0
    )


def constant_map(space: FiniteMetricSpace) -> SampledMap:
    cod = FiniteMetricSpace(
        EuclideanAmbient(), coords=np.zeros((1, 1)), meta={"name": "point"}
    )
    return SampledMap(
        space, cod, np.zeros(space.n, dtype=np.intp), name="constant", claimed_lipschitz=0.0
    )


def _materialize_euclidean(img: np.ndarray, name: str) -> tuple[FiniteMetricSpace, np.ndarray]:
    if img.ndim == 1:
        img = img[:, None]
    if img.shape[0] <= DEDUP_CAP:
        uniq, inverse = np.unique(img, axis=0, return_inverse=True)
        cod = FiniteMetricSpace(EuclideanAmbient(), coords=uniq, meta={"name": name})
        return cod, inverse.astype(np.intp)
    cod = FiniteMetricSpace(
        EuclideanAmbient(), coords=img, meta={"name": name, "dedup": False}
    )
    return cod, np.arange(img.shape[0], dtype=np.intp)


def _normalize_rows(basis: np.ndarray) -> np.ndarray:
    out = basis.copy()
    for row in out:
        nz = np.nonzero(np.abs(row) > 1e-12)[0]
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return out


def projection(
    space: FiniteMetricSpace,
    axes: list[int] | None = None,
    direction: np.ndarray | None = None,
    onto: str = "complement",
    name: str | None = None,
) -> SampledMap:
    """Linear projection of the ambient coordinates.

    Either select coordinate ``axes`` directly, or give a ``direction`` and
    project onto its span (``onto='line'``, scalar values) or its orthogonal
    complement (``onto='complement'``).
    """
    if space.coords is None:
        raise SpecError("projection requires ambient coordinates")
    k = space.coords.shape[1]
    if axes is not None:
        axes = list(axes)
        if any(a < 0 or a >= k for a in axes) or not axes:
            raise SpecError(f"projection axes out of range for dimension {k}")
        img = space.coords[:, axes]
        label = name or f"proj_axes{''.join(str(a) for a in axes)}"
    elif direction is not None:
        v = np.asarray(direction, dtype=float).ravel()
        if v.shape[0] != k:
            raise SpecError("direction dimension does not match coordinates")
        nrm = float(np.linalg.norm(v))
        if nrm == 0.0:
            raise SpecError("direction must be nonzero")
        v = v / nrm
        if onto == "line":
            img = space.coords @ v
            label = name or "proj_line"
        elif onto == "complement":
            _, _, vt = np.linalg.svd(v[None, :], full_matrices=True)
            basis = _normalize_rows(vt[1:])
            img = space.coords @ basis.T
            label = name or "proj_complement"
        else:
            raise SpecError(f"unknown projection mode {onto!r}")
    else:
        raise SpecError("projection needs either axes or a direction")
    cod, pairing = _materialize_euclidean(np.asarray(img), f"{label}_image")
    claimed = 1.0 if isinstance(space.metric, EuclideanAmbient) else None
    return SampledMap(space, cod, pairing, name=label, claimed_lipschitz=claimed)


def restrict_domain(m: SampledMap, positions: np.ndarray, name: str | None = None) -> SampledMap:
    """The same map on a domain restriction (codomain unchanged)."""
    positions = np.asarray(positions, dtype=np.intp)
    return SampledMap(
        m.domain.subset(positions),
        m.codomain,
        m.pairing[positions],
        name=name or f"{m.name}|sub",
        claimed_lipschitz=m.claimed_lipschitz,
        meta=dict(m.meta),
    )


def rescale_map(m: SampledMap, lam: float, name: str | None = None) -> SampledMap:
    """Simultaneously rescale domain and codomain by ``lam`` (pairing kept).

    The Lipschitz constant is invariant under this transform, so the claimed
    constant carries over unchanged.
    """
    return SampledMap(
        m.domain.rescale(lam),
        m.codomain.rescale(lam),
        m.pairing,
        name=name or f"{m.name}@{lam:g}",
        claimed_lipschitz=m.claimed_lipschitz,
        meta=dict(m.meta),
    )


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


def product_map(f: SampledMap, g: SampledMap, name: str | None = None) -> SampledMap:
    """(f, g) on the sup-metric product of domains, into the product codomain."""
    dom = product(f.domain, g.domain)
    cod = product(f.codomain, g.codomain)
    rule: ProductSup = dom.metric  # type: ignore[assignment]
    pairing = f.pairing[rule.left_index] * g.codomain.n + g.pairing[rule.right_index]
    claimed = None
    if f.claimed_lipschitz is not None and g.claimed_lipschitz is not None:
        claimed = max(f.claimed_lipschitz, g.claimed_lipschitz)
    return SampledMap(
        dom, cod, pairing.astype(np.intp),
        name=name or f"product({f.name},{g.name})",
        claimed_lipschitz=claimed,
        meta={"factors": (f.name, g.name)},
    )


# ---------------------------------------------------------------------------
# Extension by infimal convolution
# ---------------------------------------------------------------------------


def mcshane_extend(
    space: FiniteMetricSpace,
    anchor_positions: np.ndarray,
    values: np.ndarray,
    L: float,
) -> np.ndarray:
    """Extend anchor values to the whole space without increasing L.

    Uses the minimal-extension formula ``f(z) = min_a (f(a) + L * d(a, z))``;
    the anchors must already satisfy |f(a) - f(b)| <= L * d(a, b) (validated),
    and the result restricted to the anchors equals the input exactly.
    """
    anchor_positions = np.asarray(anchor_positions, dtype=np.intp)
    values = np.asarray(values, dtype=float)
    if values.shape[0] != anchor_positions.shape[0]:
        raise SpecError("one value per anchor position required")
    if L < 0:
        raise SpecError("extension constant must be nonnegative")
    na = anchor_positions.size
    if na == 0:
        raise SpecError("extension needs at least one anchor")
    # Validate the hypothesis on the anchor set.
    dm = space.dist_cross(anchor_positions, anchor_positions)
    gap = np.abs(values[:, None] - values[None, :]) - L * dm * (1.0 + REL_TOL)
    worst = float(gap.max())
    if worst > REL_TOL * max(1.0, float(np.abs(values).max())):
        raise SpecError(
            f"anchor values violate the {L}-Lipschitz hypothesis by {worst:g}"
        )
    out = np.empty(space.n, dtype=float)
    all_pos = np.arange(space.n, dtype=np.intp)
    rows = max(1, PAIR_BLOCK // max(na, 1))
    for s in range(0, space.n, rows):
        e = min(s + rows, space.n)
        block = space.dist_cross(all_pos[s:e], anchor_positions)
        out[s:e] = (values[None, :] + L * block).min(axis=1)
    out[anchor_positions] = values
    return out


def union_map(
    space: FiniteMetricSpace,
    part_a: np.ndarray,
    values_a: np.ndarray,
    part_b: np.ndarray,
    values_b: np.ndarray,
    name: str = "union",
) -> SampledMap:
    """Glue two partial vector-valued maps by extending each across the space.

    ``part_a`` and ``part_b`` are position arrays covering the space (overlap
    allowed if the values agree). Each map is extended with its own measured
    Lipschitz constant, and the pair of extensions is bundled into a map to
    the sup-metric product of the two value spaces.
    """
    part_a = np.asarray(part_a, dtype=np.intp)
    part_b = np.asarray(part_b, dtype=np.intp)
    values_a = np.atleast_2d(np.asarray(values_a, dtype=float))
    values_b = np.atleast_2d(np.asarray(values_b, dtype=float))
    if values_a.shape[0] == 1 and part_a.size > 1:
        values_a = values_a.T
    if values_b.shape[0] == 1 and part_b.size > 1:
        values_b = values_b.T
    covered = np.union1d(part_a, part_b)
    if covered.size != space.n or covered[0] != 0 or covered[-1] != space.n - 1:
        raise SpecError("the two parts must cover the space")
    overlap = np.intersect1d(part_a, part_b)
    if overlap.size:
        ia = np.searchsorted(part_a, overlap)
        ib = np.searchsorted(part_b, overlap)
        if not np.allclose(values_a[ia], values_b[ib], atol=1e-12):
            raise SpecError("parts overlap with conflicting values")

    def _partial_lipschitz(pos: np.ndarray, vals: np.ndarray) -> float:
        dm = space.dist_cross(pos, pos)
        best = 0.0
        for col in range(vals.shape[1]):
            diff = np.abs(vals[:, col][:, None] - vals[:, col][None, :])
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(dm > 0, diff / np.where(dm > 0, dm, 1.0), 0.0)
            best = max(best, float(ratio.max()))
        return best

    L_a = _partial_lipschitz(part_a, values_a)
    L_b = _partial_lipschitz(part_b, values_b)
    ext_a = np.stack(
        [mcshane_extend(space, part_a, values_a[:, c], L_a) for c in range(values_a.shape[1])],
        axis=1,
    )
    ext_b = np.stack(
        [mcshane_extend(space, part_b, values_b[:, c], L_b) for c in range(values_b.shape[1])],
        axis=1,
    )
    rows = np.hstack([ext_a, ext_b])
    uniq_rows, inverse = np.unique(rows, axis=0, return_inverse=True)
    ua, ia = np.unique(uniq_rows[:, : ext_a.shape[1]], axis=0, return_inverse=True)
    ub, ib = np.unique(uniq_rows[:, ext_a.shape[1]:], axis=0, return_inverse=True)
    left = FiniteMetricSpace(EuclideanAmbient(), coords=ua, meta={"name": f"{name}_left"})
    right = FiniteMetricSpace(EuclideanAmbient(), coords=ub, meta={"name": f"{name}_right"})
    rule = ProductSup(left, right, ia.astype(np.intp), ib.astype(np.intp))
    cod = FiniteMetricSpace(
        rule,
        coords=uniq_rows,
        meta={"name": f"{name}_codomain", "axis_groups": [ext_a.shape[1], ext_b.shape[1]]},
        n=uniq_rows.shape[0],
    )
    return SampledMap(
        space,
        cod,
        inverse.astype(np.intp),
        name=name,
        meta={"L_a": L_a, "L_b": L_b, "extension_a": ext_a, "extension_b": ext_b},
    )


# ---------------------------------------------------------------------------
# Word coding of a doubling space
# ---------------------------------------------------------------------------


def cantor_coding_map(
    target: FiniteMetricSpace,
    depth: int,
    alphabet_cap: int = 64,
) -> SampledMap:
    """Code a unit-diameter space by words over nested greedy nets.

    Builds nested 2^-k nets N_1 through N_D as prefixes of the farthest-point
    traversal, then maps each word letter-by-letter: the state at level k
    moves to one of the 2^-k-close level-(k+1) net points (nearest-first
    ordering, letter 0 keeps the current point, surplus letters also keep the
    current point). The image of the full word space is exactly N_D.
    """
    if depth < 1:
        raise SpecError("coding depth must be at least 1")
    diam = target.diameter()
    if not math.isclose(diam, 1.0, rel_tol=1e-9):
        raise SpecError(
            f"coding requires a unit-diameter target (got {diam:g}); rescale first"
        )
    n = target.n
    # Farthest-point traversal with insertion radii.
    start = int(np.argmin(target.ids))
    order = [start]
    radii = [math.inf]
    dmin = target.dist_one_to_many(start)
    for _ in range(n - 1):
        far = float(dmin.max())
        if far == 0.0:
            break
        cands = np.nonzero(dmin == far)[0]
        nxt = int(cands[np.argmin(target.ids[cands])])
        order.append(nxt)
        radii.append(far)
        np.minimum(dmin, target.dist_one_to_many(nxt), out=dmin)
    order_arr = np.asarray(order, dtype=np.intp)
    radii_arr = np.asarray(radii, dtype=float)
    nets: list[np.ndarray] = []
    for k in range(1, depth + 1):
        eps = 2.0 ** (-k)
        cut = int(np.searchsorted(-radii_arr, -eps, side="right"))
        nets.append(order_arr[:max(cut, 1)])
    # Letter tables.
    level_tables: list[np.ndarray] = []
    max_neighbors = nets[0].size
    row_of: list[np.ndarray] = []
    for k in range(depth):
        lookup = np.full(n, -1, dtype=np.intp)
        lookup[nets[k]] = np.arange(nets[k].size, dtype=np.intp)
        row_of.append(lookup)
    for k in range(depth - 1):
        src = nets[k]
        dst = nets[k + 1]
        eps = 2.0 ** (-(k + 1))
        dm = target.dist_cross(src, dst)
        close = dm <= eps * (1.0 + REL_TOL)
        counts = close.sum(axis=1)
        max_neighbors = max(max_neighbors, int(counts.max()))
        rows = []
        for i in range(src.size):
            sel = np.nonzero(close[i])[0]
            key = np.lexsort((target.ids[dst[sel]], dm[i, sel]))
            ordered = dst[sel[key]]
            # The current point stays first (letter 0 keeps the state).
            self_pos = np.nonzero(ordered == src[i])[0]
            if self_pos.size == 0:
                raise SpecError("nested nets broken: point missing from its own ball")
            if self_pos[0] != 0:
                ordered = np.concatenate([
                    [src[i]], ordered[:self_pos[0]], ordered[self_pos[0] + 1:]
                ])
            rows.append(ordered)
        level_tables.append(rows)  # type: ignore[arg-type]
    M = int(max_neighbors)
    if M > alphabet_cap:
        raise SpecError(
            f"coding alphabet needs {M} letters, above the cap {alphabet_cap}"
        )
    M = max(M, 2)
    words_space = word_cantor(M, depth)
    words = words_space.metric.words  # type: ignore[union-attr]
    # Dense tables with surplus letters keeping the state.
    dense: list[np.ndarray] = []
    for k in range(depth - 1):
        rows = level_tables[k]
        tab = np.empty((nets[k].size, M), dtype=np.intp)
        for i, ordered in enumerate(rows):
            take = min(M, ordered.size)
            tab[i, :take] = ordered[:take]
            tab[i, take:] = nets[k][i]
        dense.append(tab)
    first = np.empty(M, dtype=np.intp)
    take = min(M, nets[0].size)
    first[:take] = nets[0][:take]
    first[take:] = nets[0][0]
    state = first[words[:, 0].astype(np.intp)]
    for k in range(1, depth):
        rows_idx = row_of[k - 1][state]
        state = dense[k - 1][rows_idx, words[:, k].astype(np.intp)]
    return SampledMap(
        words_space,
        target,
        state.astype(np.intp),
        name=f"coding_D{depth}_M{M}",
        meta={"nets": nets, "alphabet": M, "depth": depth},
    )


# ---------------------------------------------------------------------------
# Tree and folding maps
# ---------------------------------------------------------------------------


def tree_root_map(space: FiniteMetricSpace) -> SampledMap:
    """Distance-to-root functional on a tree-metric space."""
    rule = space.metric
    if not isinstance(rule, TreePath) or rule.root < 0:
        raise SpecError("tree_root_map requires a tree-path space with a root")
    vals = rule.matrix[rule.root]
    cod, pairing = _materialize_euclidean(vals, "root_distances")
    return SampledMap(space, cod, pairing, name="tree_root", claimed_lipschitz=1.0)


def abs_fold_map(space: FiniteMetricSpace) -> SampledMap:
    """x -> |x| on a 1-D Euclidean space."""
    if space.coords is None or space.ndim != 1 or not isinstance(space.metric, EuclideanAmbient):
        raise SpecError("abs_fold_map requires a 1-D Euclidean space")
    vals = np.abs(space.coords[:, 0])
    cod, pairing = _materialize_euclidean(vals, "abs_image")
    return SampledMap(space, cod, pairing, name="abs_fold", claimed_lipschitz=1.0)


# ---------------------------------------------------------------------------
# Spec dispatch
# ---------------------------------------------------------------------------


def build_map(space: FiniteMetricSpace, spec: MapSpec | dict[str, Any]) -> SampledMap:
    """Materialize a map over a loaded space from its declarative spec."""
    if isinstance(spec, dict):
        spec = MapSpec.from_dict(spec)
    kind = spec.kind
    params = dict(spec.params)
    if kind == "identity":
        return identity_map(space)
    if kind == "constant":
        return constant_map(space)
    if kind == "projection":
        direction = params.pop("direction", None)
        if direction is not None:
            direction = np.asarray(direction, dtype=float)
        return projection(space, axes=params.pop("axes", None), direction=direction, **params)
    if kind == "tree_root":
        return tree_root_map(space)
    if kind == "abs_fold":
        return abs_fold_map(space)
    if kind == "coding":
        return cantor_coding_map(space, int(params.pop("depth")), **params)
    raise SpecError(f"unknown map kind {kind!r}")
