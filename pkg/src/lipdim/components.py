"""Scale-r component partitions, single-linkage dendrograms, multiscale profiles.

Two points are linked at scale r when their distance is at most ``r`` up to
the shared relative tolerance; r-components are the transitive closure of that
relation. Strategy dispatch keeps the semantics identical across engines:

- ``dense``: evaluate all pairs (default for small point sets);
- ``grid``: bucket candidates by ambient cells whose widths come from the
  metric rule's pruning bound, then evaluate candidates exactly;
- ``line``: sorted sweep for metrics that are monotone functions of the
  1-D coordinate gap;
- ``ultra``: prefix grouping for word ultrametrics (components at scale r are
  exactly the groups sharing a fixed-length prefix);
- ``koranyi``: column-run engine for anisotropic grid nets — points sharing an
  (x, y) column form vertical runs, and the minimal distance between two runs
  in different columns is computed in closed form because the group twist is
  constant per column pair.

Every engine reports per-component diameters: exact below the pair-scan cap,
otherwise a certified upper bound plus an achieved (realized-pair) lower
bound, flagged approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order
from scipy.sparse.csgraph import connected_components as _cc

from ._config import (
    EXACT_DIAM_CAP,
    PAIR_BLOCK,
    PAIR_CACHE_CAP,
    DENDROGRAM_CAP,
    PATH_CAP,
    REL_TOL,
)
from .errors import SpecError
from .metric import (
    EuclideanAmbient,
    FiniteMetricSpace,
    Koranyi,
    KoranyiGrid,
    ScaleLadder,
    SnowflakePower,
    UltrametricWords,
)

__all__ = [
    "UnionFind",
    "ComponentPartition",
    "MergeEvent",
    "Dendrogram",
    "r_components",
    "dendrogram",
    "components_profile",
    "component_path",
]

#: Point sets up to this size always use the dense all-pairs engine.
DENSE_CAP = 2_000

#: The Koranyi column-run engine engages above this subset size.
KORANYI_FAST_MIN = 256

#: Dense fallback refuses beyond this size (no applicable fast strategy).
DENSE_HARD_CAP = 25_000
PATH_EDGE_CAP = 4 * PAIR_BLOCK


# ---------------------------------------------------------------------------
# Union-find
# ---------------------------------------------------------------------------


class UnionFind:
    """Array-based disjoint-set forest with path halving and union by size."""

    __slots__ = ("parent", "size", "n_sets")

    def __init__(self, n: int) -> None:
        self.parent = np.arange(n, dtype=np.intp)
        self.size = np.ones(n, dtype=np.intp)
        self.n_sets = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_sets -= 1
        return True

    def roots(self) -> np.ndarray:
        """Root representative per element (vectorized pointer jumping)."""
        r = self.parent.copy()
        while True:
            rr = r[r]
            if np.array_equal(rr, r):
                return r
            r = rr

    def labels(self) -> np.ndarray:
        """Compact labels in order of first appearance of each root."""
        _, labels = np.unique(self.roots(), return_inverse=True)
        return labels


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------


@dataclass
class ComponentPartition:
    """Partition of a point subset into r-components with diameter data.

    ``positions`` index into the parent space; ``ids`` carry original labels.
    ``diameters`` holds the achieved diameter per component (exact when
    ``diameters_exact``); ``diam_upper`` is a certified upper bound (equal to
    ``diameters`` in exact mode); ``diam_pairs`` holds positions realizing the
    achieved value.
    """

    r: float
    positions: np.ndarray
    ids: np.ndarray
    labels: np.ndarray
    n_components: int
    diameters: np.ndarray
    diam_upper: np.ndarray
    diam_pairs: np.ndarray
    diameters_exact: bool
    approx_mask: np.ndarray

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_components)

    def members(self, label: int) -> np.ndarray:
        """Positions (into the parent space) of one component."""
        return self.positions[self.labels == label]

    def max_diameter(self) -> float:
        return float(self.diameters.max()) if self.n_components else 0.0

    def argmax_component(self) -> int:
        return int(np.argmax(self.diameters)) if self.n_components else -1

    def assignment_ids(self) -> dict[int, int]:
        """Original id -> component label mapping."""
        return {int(i): int(l) for i, l in zip(self.ids, self.labels)}


@dataclass(frozen=True)
class MergeEvent:
    """Single-linkage merge: two components join at ``scale``."""

    scale: float
    a: int  # smallest original id of one merged component
    b: int  # smallest original id of the other
    diameter: float  # exact (or flagged) diameter of the resulting component
    pos_a: int = field(repr=False, default=-1)
    pos_b: int = field(repr=False, default=-1)


@dataclass
class Dendrogram:
    """Full merge history of single-linkage clustering over all scales."""

    n: int
    ids: np.ndarray
    events: list[MergeEvent]
    diameters_exact: bool

    def cut(self, r: float) -> np.ndarray:
        """Labels of r-components obtained by replaying merges with scale <= r."""
        uf = UnionFind(self.n)
        thresh = r * (1.0 + REL_TOL)
        for ev in self.events:
            if ev.scale <= thresh:
                uf.union(ev.pos_a, ev.pos_b)
        return uf.labels()

    def merge_scales(self) -> np.ndarray:
        return np.array([ev.scale for ev in self.events], dtype=float)


# ---------------------------------------------------------------------------
# Strategy selection
# ---------------------------------------------------------------------------


def _is_monotone_1d(space: FiniteMetricSpace) -> bool:
    rule = space.metric
    while isinstance(rule, SnowflakePower):
        rule = rule.base
    return isinstance(rule, EuclideanAmbient) and space.ndim == 1


def _choose_strategy(space: FiniteMetricSpace, m: int, r: float) -> str:
    rule = space.metric
    if isinstance(rule, UltrametricWords):
        return "ultra"
    if _is_monotone_1d(space):
        return "line"
    if (
        isinstance(rule, Koranyi)
        and isinstance(space.meta.get("koranyi_grid"), KoranyiGrid)
        and m > KORANYI_FAST_MIN
    ):
        return "koranyi"
    if m <= DENSE_CAP:
        return "dense"
    if rule.grid_prune_width(space, r) is not None:
        return "grid"
    if m <= DENSE_HARD_CAP:
        return "dense"
    raise SpecError(
        f"no component strategy for n={m} points with metric kind '{rule.kind}'"
    )


# ---------------------------------------------------------------------------
# Candidate-pair generation
# ---------------------------------------------------------------------------


def _dense_candidate_chunks(m: int):
    """Yield all (i, j) index pairs with i < j in bounded-size chunks."""
    rows = max(1, PAIR_BLOCK // max(m, 1))
    for s in range(0, m, rows):
        e = min(s + rows, m)
        block_i = np.repeat(np.arange(s, e, dtype=np.intp), m)
        block_j = np.tile(np.arange(m, dtype=np.intp), e - s)
        keep = block_i < block_j
        if keep.any():
            yield block_i[keep], block_j[keep]


def _pack_cells(cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pack integer cell rows into scalar keys; returns (keys, strides)."""
    lo = cells.min(axis=0)
    shifted = cells - lo
    extents = shifted.max(axis=0).astype(object) + 2
    total = 1
    for e in extents:
        total *= int(e)
    if total >= (1 << 62):
        raise SpecError("cell grid too large to pack; use a coarser scale")
    strides = np.ones(cells.shape[1], dtype=np.int64)
    for k in range(cells.shape[1] - 2, -1, -1):
        strides[k] = strides[k + 1] * int(extents[k + 1])
    return shifted @ strides, strides


def _grouped_cross(order, starts, counts, ga, gb, cap=PAIR_BLOCK):
    """All cross pairs between member blocks of matched groups, chunked.

    ``order`` maps sorted slots to element indices; groups ``ga[k]`` and
    ``gb[k]`` are crossed for every k. Yields (i_idx, j_idx) arrays, never
    materializing more than ~``cap`` pairs at once.
    """
    ca = counts[ga].astype(np.int64)
    cb = counts[gb].astype(np.int64)
    tot = ca * cb
    if tot.sum() == 0:
        return
    k = 0
    n = len(ga)
    while k < n:
        if tot[k] > cap:
            # One oversized group pair: stream the A side in row slices.
            sa, sb = int(starts[ga[k]]), int(starts[gb[k]])
            block_a = order[sa: sa + int(ca[k])]
            block_b = order[sb: sb + int(cb[k])]
            rows = max(1, cap // max(int(cb[k]), 1))
            for s in range(0, int(ca[k]), rows):
                e = min(s + rows, int(ca[k]))
                yield np.repeat(block_a[s:e], int(cb[k])), np.tile(block_b, e - s)
            k += 1
            continue
        k2 = k
        acc = 0
        while k2 < n and tot[k2] <= cap and acc + tot[k2] <= cap:
            acc += tot[k2]
            k2 += 1
        sel = slice(k, k2)
        sub_tot = tot[sel]
        sub_bounds = np.concatenate([[0], np.cumsum(sub_tot)])
        total = int(sub_bounds[-1])
        if total:
            gidx = np.repeat(np.arange(k2 - k), sub_tot)
            local = np.arange(total, dtype=np.int64) - sub_bounds[gidx]
            cb_g = cb[sel][gidx]
            a_local = local // cb_g
            b_local = local % cb_g
            i_idx = order[starts[ga[sel]][gidx] + a_local]
            j_idx = order[starts[gb[sel]][gidx] + b_local]
            yield i_idx, j_idx
        k = k2


def _grid_candidate_chunks(space: FiniteMetricSpace, pos: np.ndarray, widths: np.ndarray):
    """Yield candidate (i, j) pairs from same-cell and neighbor-cell buckets."""
    coords = space.coords[pos]
    cells = np.floor(coords / widths).astype(np.int64)
    keys, strides = _pack_cells(cells)
    order = np.argsort(keys, kind="stable").astype(np.intp)
    sorted_keys = keys[order]
    uniq, starts_idx = np.unique(sorted_keys, return_index=True)
    counts = np.diff(np.concatenate([starts_idx, [keys.size]]))
    starts = starts_idx.astype(np.int64)
    offsets = _half_offsets(cells.shape[1])

    # Same-cell pairs (deduplicated to i < j).
    ga = np.arange(len(uniq))
    for bi, bj in _grouped_cross(order, starts, counts, ga, ga):
        keep = bi < bj
        if keep.any():
            yield bi[keep], bj[keep]
    # Neighbor-cell pairs (half of the offsets; the rest are mirror images).
    for off in offsets:
        delta = int(np.dot(off, strides))
        target = uniq + delta
        ins = np.searchsorted(uniq, target)
        ins_clip = np.minimum(ins, len(uniq) - 1)
        valid = uniq[ins_clip] == target
        ga = np.nonzero(valid)[0]
        gb = ins_clip[valid]
        yield from _grouped_cross(order, starts, counts, ga, gb)


def _evaluated_edges(space: FiniteMetricSpace, pos: np.ndarray, r: float, candidates):
    """Filter candidate chunks through the shared edge predicate d <= r(1+tol)."""
    thresh = r * (1.0 + REL_TOL)
    for bi, bj in candidates:
        d = space.dist_pairs(pos[bi], pos[bj])
        hit = d <= thresh
        if hit.any():
            yield bi[hit], bj[hit]


def _half_offsets(k: int) -> list[np.ndarray]:
    """Nonzero offsets in {-1,0,1}^k whose first nonzero entry is positive."""
    grids = np.meshgrid(*([np.array([-1, 0, 1])] * k), indexing="ij")
    all_off = np.stack([g.ravel() for g in grids], axis=1)
    keep = []
    for row in all_off:
        nz = row[row != 0]
        if nz.size and nz[0] > 0:
            keep.append(row.astype(np.int64))
    return keep


# ---------------------------------------------------------------------------
# Labels and diameters
# ---------------------------------------------------------------------------


def _labels_from_edges(m: int, ei: np.ndarray, ej: np.ndarray) -> tuple[int, np.ndarray]:
    if m == 0:
        return 0, np.empty(0, dtype=np.intp)
    if ei.size == 0:
        return m, np.arange(m, dtype=np.intp)
    graph = coo_matrix((np.ones(ei.size, dtype=np.int8), (ei, ej)), shape=(m, m))
    n_comp, raw = _cc(graph, directed=False)
    # Relabel in order of first appearance for determinism.
    _, labels = np.unique(raw, return_inverse=True)
    first = np.full(n_comp, m, dtype=np.intp)
    np.minimum.at(first, labels, np.arange(m, dtype=np.intp))
    rank = np.argsort(np.argsort(first, kind="stable"), kind="stable")
    return n_comp, rank[labels]


def _stream_union(
    space: FiniteMetricSpace, pos: np.ndarray, r: float, candidates
) -> tuple[int, np.ndarray]:
    """Union candidate pair chunks into component labels with bounded memory.

    Pairs whose endpoints are already connected are skipped before the
    distance evaluation, so repeated coverage of an established component
    costs index work only. Each chunk's surviving edges are contracted on
    root ids before the (few) explicit unions. The resulting partition is
    identical to labeling the full edge list: connectivity does not depend
    on evaluation order.
    """
    m = pos.size
    if m == 0:
        return 0, np.empty(0, dtype=np.intp)
    thresh = r * (1.0 + REL_TOL)
    uf = UnionFind(m)
    for bi, bj in candidates:
        if uf.n_sets == 1:
            break
        rt = uf.roots()
        live = rt[bi] != rt[bj]
        if not live.any():
            continue
        bi, bj = bi[live], bj[live]
        d = space.dist_pairs(pos[bi], pos[bj])
        hit = d <= thresh
        if not hit.any():
            continue
        li, lj = rt[bi[hit]], rt[bj[hit]]
        used, inv = np.unique(np.concatenate([li, lj]), return_inverse=True)
        a, b = inv[: li.size], inv[li.size:]
        graph = coo_matrix(
            (np.ones(a.size, dtype=np.int8), (a, b)), shape=(used.size, used.size)
        )
        _, grp = _cc(graph, directed=False)
        first = np.full(grp.max() + 1, used.size, dtype=np.intp)
        np.minimum.at(first, grp, np.arange(used.size, dtype=np.intp))
        for k in range(used.size):
            f = first[grp[k]]
            if f != k:
                uf.union(int(used[k]), int(used[f]))
    _, compact = np.unique(uf.roots(), return_inverse=True)
    labels = _first_appearance_relabel(compact)
    return int(labels.max()) + 1, labels


def _diam_upper_bound(space: FiniteMetricSpace, members: np.ndarray) -> float:
    """Certified upper bound on the diameter of a member set (cheap)."""
    rule = space.metric
    if isinstance(rule, SnowflakePower):
        while isinstance(rule, SnowflakePower):
            rule = rule.base
    if isinstance(rule, EuclideanAmbient) and space.coords is not None:
        c = space.coords[members]
        span = c.max(axis=0) - c.min(axis=0)
        base = float(np.sqrt(np.dot(span, span)))
        return _apply_snowflake(space.metric, base)
    if isinstance(rule, Koranyi) and space.coords is not None:
        c = space.coords[members]
        span = c.max(axis=0) - c.min(axis=0)
        dz = float(np.hypot(span[0], span[1]))
        mx = float(np.abs(c[:, 0]).max())
        my = float(np.abs(c[:, 1]).max())
        tau = float(span[2]) + mx * my
        return float(np.sqrt(np.sqrt(dz ** 4 + 16.0 * tau * tau)))
    # Generic triangle-inequality bound: 2 * eccentricity of the first member.
    ecc = float(space.dist_one_to_many(int(members[0]), members).max())
    return 2.0 * ecc


def _apply_snowflake(rule, base: float) -> float:
    while isinstance(rule, SnowflakePower):
        base = base ** rule.alpha
        rule = rule.base
    return base


def _achieved_diameter(space: FiniteMetricSpace, members: np.ndarray, rounds: int = 3):
    """Farthest-point lower bound: (value, (pos_a, pos_b)), deterministic."""
    start = int(members[np.argmin(space.ids[members])])
    best = (0.0, start, start)
    cur = start
    for _ in range(rounds):
        d = space.dist_one_to_many(cur, members)
        j = int(np.argmax(d))
        if d[j] <= best[0]:
            break
        best = (float(d[j]), cur, int(members[j]))
        cur = int(members[j])
    return best[0], (best[1], best[2])


def _exact_diameter(space: FiniteMetricSpace, members: np.ndarray):
    m = members.size
    if m == 1:
        return 0.0, (int(members[0]), int(members[0]))
    best = -1.0
    best_pair = (int(members[0]), int(members[0]))
    rows = max(1, PAIR_BLOCK // m)
    for s in range(0, m, rows):
        e = min(s + rows, m)
        block = space.dist_cross(members[s:e], members)
        k = int(np.argmax(block))
        val = float(block.flat[k])
        if val > best:
            best = val
            best_pair = (int(members[s + k // m]), int(members[k % m]))
    return max(best, 0.0), best_pair


def _component_diameters(space: FiniteMetricSpace, pos: np.ndarray, labels: np.ndarray, n_comp: int):
    diam = np.zeros(n_comp, dtype=float)
    upper = np.zeros(n_comp, dtype=float)
    pairs = np.zeros((n_comp, 2), dtype=np.intp)
    approx = np.zeros(n_comp, dtype=bool)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_comp + 1))
    for c in range(n_comp):
        members = pos[order[bounds[c]:bounds[c + 1]]]
        if members.size <= 1:
            only = int(members[0]) if members.size else 0
            pairs[c] = (only, only)
            continue
        if members.size <= EXACT_DIAM_CAP:
            d, pr = _exact_diameter(space, members)
            diam[c] = upper[c] = d
            pairs[c] = pr
        else:
            d, pr = _achieved_diameter(space, members)
            ub = _diam_upper_bound(space, members)
            diam[c] = d
            upper[c] = max(ub, d)
            pairs[c] = pr
            approx[c] = True
    return diam, upper, pairs, approx


# ---------------------------------------------------------------------------
# Fast paths
# ---------------------------------------------------------------------------


def _line_partition(space: FiniteMetricSpace, pos: np.ndarray, r: float):
    """Exact components for 1-D-monotone metrics via a sorted sweep."""
    x = space.coords[pos, 0]
    order = np.argsort(x, kind="stable")
    thresh = r * (1.0 + REL_TOL)
    if pos.size == 1:
        labels = np.zeros(1, dtype=np.intp)
        breaks = np.empty(0, dtype=bool)
    else:
        d = space.dist_pairs(pos[order[:-1]], pos[order[1:]])
        breaks = d > thresh
        labels_sorted = np.concatenate([[0], np.cumsum(breaks)]).astype(np.intp)
        labels = np.empty(pos.size, dtype=np.intp)
        labels[order] = labels_sorted
    n_comp = int(labels.max()) + 1 if pos.size else 0
    # Sweep labels run along the sorted axis; renumber to first appearance in
    # subset order (the contract shared by every strategy).
    first = np.full(n_comp, pos.size, dtype=np.intp)
    np.minimum.at(first, labels, np.arange(pos.size, dtype=np.intp))
    rank = np.argsort(np.argsort(first, kind="stable"), kind="stable")
    labels = rank[labels]
    diam = np.zeros(n_comp, dtype=float)
    pairs = np.zeros((n_comp, 2), dtype=np.intp)
    starts = np.concatenate([[0], np.nonzero(breaks)[0] + 1]) if pos.size > 1 else np.array([0])
    ends = np.concatenate([starts[1:] - 1, [pos.size - 1]])
    for c, (s, e) in enumerate(zip(starts, ends)):
        a, b = int(pos[order[s]]), int(pos[order[e]])
        pairs[rank[c]] = (a, b)
        if s != e:
            diam[rank[c]] = space.dist(a, b)
    return n_comp, labels, diam, diam.copy(), pairs, np.zeros(n_comp, dtype=bool)


def _ultra_partition(space: FiniteMetricSpace, pos: np.ndarray, r: float):
    """Exact components for word ultrametrics via shared-prefix grouping."""
    rule: UltrametricWords = space.metric  # type: ignore[assignment]
    words = rule.words[pos]
    depth = words.shape[1]
    thresh_bound = r * (1.0 + REL_TOL)
    m_star = 1
    while m_star <= depth and rule.scale * float(np.exp2(-float(m_star))) > thresh_bound:
        m_star += 1
    prefix_len = m_star - 1
    if prefix_len == 0:
        labels = np.zeros(pos.size, dtype=np.intp)
        n_comp = 1 if pos.size else 0
    elif prefix_len >= depth:
        # Only distance-0 pairs link: group identical words.
        _, labels = np.unique(words, axis=0, return_inverse=True)
        labels = _first_appearance_relabel(labels)
        n_comp = int(labels.max()) + 1 if pos.size else 0
    else:
        _, labels = np.unique(words[:, :prefix_len], axis=0, return_inverse=True)
        labels = _first_appearance_relabel(labels)
        n_comp = int(labels.max()) + 1 if pos.size else 0
    diam = np.zeros(n_comp, dtype=float)
    pairs = np.zeros((n_comp, 2), dtype=np.intp)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_comp + 1))
    for c in range(n_comp):
        sel = order[bounds[c]:bounds[c + 1]]
        members = pos[sel]
        pairs[c] = (int(members[0]), int(members[0]))
        if sel.size <= 1:
            continue
        w = words[sel]
        nonconst = np.nonzero((w != w[0]).any(axis=0))[0]
        if nonconst.size == 0:
            continue
        col = int(nonconst[0])
        diam[c] = rule.scale * float(np.exp2(-(col + 1.0)))
        a = int(members[np.argmin(w[:, col])])
        b = int(members[np.argmax(w[:, col])])
        pairs[c] = (a, b)
    return n_comp, labels, diam, diam.copy(), pairs, np.zeros(n_comp, dtype=bool)


def _first_appearance_relabel(labels: np.ndarray) -> np.ndarray:
    n_comp = int(labels.max()) + 1 if labels.size else 0
    first = np.full(n_comp, labels.size, dtype=np.intp)
    np.minimum.at(first, labels, np.arange(labels.size, dtype=np.intp))
    rank = np.argsort(np.argsort(first, kind="stable"), kind="stable")
    return rank[labels]


@dataclass
class _RunTable:
    """Vertical runs of a Koranyi grid subset (engine-internal)."""

    order: np.ndarray          # sorted slot -> subset slot
    run_of_slot: np.ndarray    # sorted slot -> run index
    starts: np.ndarray         # run -> first sorted slot
    ends: np.ndarray           # run -> last sorted slot (inclusive)
    col_of_run: np.ndarray     # run -> column index
    ilo: np.ndarray            # run -> lowest t index
    ihi: np.ndarray            # run -> highest t index
    contiguous: np.ndarray     # run -> whether t indices form a full range
    col_x: np.ndarray          # column -> x coordinate
    col_y: np.ndarray          # column -> y coordinate
    col_runs_start: np.ndarray # column -> first run index
    col_runs_count: np.ndarray # column -> number of runs
    t_sorted: np.ndarray       # sorted slot -> integer t index


def _koranyi_runs(space: FiniteMetricSpace, pos: np.ndarray, r: float) -> _RunTable:
    grid: KoranyiGrid = space.meta["koranyi_grid"]  # type: ignore[assignment]
    if grid.index.shape[0] != space.n:
        raise SpecError("koranyi grid metadata out of sync with space")
    idx3 = grid.index[pos]
    coords = space.coords[pos]
    colkey, _ = _pack_cells(idx3[:, :2])
    order = np.lexsort((idx3[:, 2], colkey)).astype(np.intp)
    sk = colkey[order]
    sit = idx3[order, 2].astype(np.int64)
    m = pos.size
    thresh = r * (1.0 + REL_TOL)
    if m > 1:
        same_col = sk[1:] == sk[:-1]
        d = space.dist_pairs(pos[order[:-1]], pos[order[1:]])
        breaks = (~same_col) | (d > thresh)
    else:
        breaks = np.empty(0, dtype=bool)
    run_of_slot = np.concatenate([[0], np.cumsum(breaks)]).astype(np.intp) if m else np.empty(0, np.intp)
    n_runs = int(run_of_slot[-1]) + 1 if m else 0
    starts = np.searchsorted(run_of_slot, np.arange(n_runs))
    ends = np.concatenate([starts[1:] - 1, [m - 1]]) if n_runs else np.empty(0, np.intp)
    ilo = sit[starts]
    ihi = sit[ends]
    counts = ends - starts + 1
    contiguous = (ihi - ilo + 1) == counts
    # Columns: group runs by column key.
    col_first_slot = np.nonzero(np.concatenate([[True], sk[1:] != sk[:-1]]))[0] if m else np.empty(0, np.intp)
    col_of_slot = np.cumsum(np.concatenate([[0], (sk[1:] != sk[:-1]).astype(np.intp)])) if m else np.empty(0, np.intp)
    col_of_run = col_of_slot[starts]
    n_cols = int(col_of_slot[-1]) + 1 if m else 0
    col_x = coords[order[col_first_slot], 0]
    col_y = coords[order[col_first_slot], 1]
    col_runs_start = np.searchsorted(col_of_run, np.arange(n_cols))
    col_runs_count = np.diff(np.concatenate([col_runs_start, [n_runs]]))
    return _RunTable(
        order=order,
        run_of_slot=run_of_slot,
        starts=starts,
        ends=ends,
        col_of_run=col_of_run,
        ilo=ilo,
        ihi=ihi,
        contiguous=contiguous,
        col_x=col_x,
        col_y=col_y,
        col_runs_start=col_runs_start,
        col_runs_count=col_runs_count,
        t_sorted=sit,
    )


def _koranyi_run_edges(space: FiniteMetricSpace, pos: np.ndarray, r: float, rt: _RunTable):
    """Edges between runs: exact minimal cross-column distances."""
    grid: KoranyiGrid = space.meta["koranyi_grid"]  # type: ignore[assignment]
    ts = grid.t_spacing
    eps = grid.xy_spacing
    thresh = r * (1.0 + REL_TOL)
    n_cols = rt.col_x.size
    if n_cols == 0:
        return np.empty(0, np.intp), np.empty(0, np.intp)
    # Bucket columns on an integer xy grid with cell width ceil(r'/eps).
    cell_w = max(1, int(np.ceil(thresh / eps)))
    cix = np.round(rt.col_x / eps).astype(np.int64) // cell_w
    ciy = np.round(rt.col_y / eps).astype(np.int64) // cell_w
    cells = np.stack([cix, ciy], axis=1)
    keys, strides = _pack_cells(cells)
    order = np.argsort(keys, kind="stable").astype(np.intp)
    sorted_keys = keys[order]
    uniq, starts_idx = np.unique(sorted_keys, return_index=True)
    counts = np.diff(np.concatenate([starts_idx, [keys.size]]))
    starts = starts_idx.astype(np.int64)

    pair_a: list[np.ndarray] = []
    pair_b: list[np.ndarray] = []

    def _handle(cols_a: np.ndarray, cols_b: np.ndarray, same_cell: bool):
        if same_cell:
            keep = cols_a < cols_b
            cols_a, cols_b = cols_a[keep], cols_b[keep]
        if cols_a.size == 0:
            return
        dx = rt.col_x[cols_a] - rt.col_x[cols_b]
        dy = rt.col_y[cols_a] - rt.col_y[cols_b]
        near = (np.abs(dx) <= thresh) & (np.abs(dy) <= thresh)
        cols_a, cols_b = cols_a[near], cols_b[near]
        if cols_a.size == 0:
            return
        pair_a.append(cols_a)
        pair_b.append(cols_b)

    ga = np.arange(len(uniq))
    for bi, bj in _grouped_cross(order, starts, counts, ga, ga):
        _handle(bi, bj, same_cell=True)
    for off in _half_offsets(2):
        delta = int(np.dot(off, strides))
        target = uniq + delta
        ins = np.searchsorted(uniq, target)
        ins_clip = np.minimum(ins, len(uniq) - 1)
        valid = uniq[ins_clip] == target
        ga_v = np.nonzero(valid)[0]
        gb_v = ins_clip[valid]
        for bi, bj in _grouped_cross(order, starts, counts, ga_v, gb_v):
            _handle(bi, bj, same_cell=False)

    if not pair_a:
        return np.empty(0, np.intp), np.empty(0, np.intp)
    cols_a = np.concatenate(pair_a)
    cols_b = np.concatenate(pair_b)

    # Expand column pairs to run pairs.
    run_starts = rt.col_runs_start
    run_counts = rt.col_runs_count
    runs_order = np.arange(rt.starts.size, dtype=np.intp)  # runs already grouped by column
    ra_list: list[np.ndarray] = []
    rb_list: list[np.ndarray] = []
    for bi, bj in _grouped_cross(runs_order, run_starts.astype(np.int64), run_counts, cols_a, cols_b):
        ra_list.append(bi)
        rb_list.append(bj)
    ra = np.concatenate(ra_list) if ra_list else np.empty(0, np.intp)
    rb = np.concatenate(rb_list) if rb_list else np.empty(0, np.intp)
    if ra.size == 0:
        return np.empty(0, np.intp), np.empty(0, np.intp)

    ca, cb = rt.col_of_run[ra], rt.col_of_run[rb]
    xa, ya = rt.col_x[ca], rt.col_y[ca]
    xb, yb = rt.col_x[cb], rt.col_y[cb]
    dx = xa - xb
    dy = ya - yb
    dz2 = dx * dx + dy * dy
    gamma = 0.5 * (yb * xa - xb * ya)
    lo = rt.ilo[ra] - rt.ihi[rb]
    hi = rt.ihi[ra] - rt.ilo[rb]
    target = -gamma / ts
    di = np.clip(np.round(target), lo, hi)
    tau = di * ts + gamma
    dmin = np.sqrt(np.sqrt(dz2 * dz2 + 16.0 * (tau * tau)))
    hit = dmin <= thresh
    # Optimistic hits on non-contiguous runs must be confirmed exactly.
    needs_check = hit & ~(rt.contiguous[ra] & rt.contiguous[rb])
    for k in np.nonzero(needs_check)[0]:
        ta = rt.t_sorted[rt.starts[ra[k]]: rt.ends[ra[k]] + 1]
        tb = rt.t_sorted[rt.starts[rb[k]]: rt.ends[rb[k]] + 1]
        g = gamma[k]
        # Nearest achieved tau over actual index pairs.
        want = tb.astype(float) - g / ts
        posn = np.searchsorted(ta.astype(float), want)
        best = np.inf
        for shift in (0, -1):
            sel = np.clip(posn + shift, 0, ta.size - 1)
            tau_k = (ta[sel] - tb).astype(float) * ts + g
            cand = float(np.min(np.sqrt(np.sqrt(dz2[k] ** 2 + 16.0 * tau_k * tau_k))))
            best = min(best, cand)
        hit[k] = best <= thresh
    return ra[hit], rb[hit]


def _koranyi_run_diameters(
    space: FiniteMetricSpace, pos: np.ndarray, labels: np.ndarray, n_comp: int, rt: _RunTable
):
    """Exact component diameters from vertical-run extremes.

    Between two runs the twist contribution to tau is a constant, so |tau|
    (and with it the gauge distance, the planar part being fixed per column
    pair) is maximized at run endpoints. Ranking all run pairs by this closed
    form and re-evaluating block winners through the metric rule gives exact
    diameters without an all-pairs scan.
    """
    diam = np.zeros(n_comp, dtype=float)
    upper = np.zeros(n_comp, dtype=float)
    pairs = np.zeros((n_comp, 2), dtype=np.intp)
    approx = np.zeros(n_comp, dtype=bool)
    n_runs = rt.starts.size
    if n_runs == 0:
        return diam, upper, pairs, approx
    rx = rt.col_x[rt.col_of_run]
    ry = rt.col_y[rt.col_of_run]
    slot_lo = rt.order[rt.starts]
    slot_hi = rt.order[rt.ends]
    p_lo = pos[slot_lo]
    p_hi = pos[slot_hi]
    tlo = space.coords[p_lo, 2]
    thi = space.coords[p_hi, 2]
    run_label = labels[slot_lo]
    order_r = np.argsort(run_label, kind="stable")
    bounds = np.searchsorted(run_label[order_r], np.arange(n_comp + 1))
    for c in range(n_comp):
        runs = order_r[bounds[c]:bounds[c + 1]]
        q = runs.size
        if q == 0:
            continue
        cx, cy = rx[runs], ry[runs]
        clo, chi = tlo[runs], thi[runs]
        plo, phi = p_lo[runs], p_hi[runs]
        cand_a: list[int] = []
        cand_b: list[int] = []
        best = -1.0
        rows = max(1, PAIR_BLOCK // q)
        for s in range(0, q, rows):
            e = min(s + rows, q)
            bi = np.repeat(np.arange(s, e, dtype=np.intp), q)
            bj = np.tile(np.arange(q, dtype=np.intp), e - s)
            keep = bi <= bj
            bi, bj = bi[keep], bj[keep]
            twist = 0.5 * (cy[bj] * cx[bi] - cx[bj] * cy[bi])
            tau1 = (chi[bi] - clo[bj]) + twist
            tau2 = (clo[bi] - chi[bj]) + twist
            hi_side = np.abs(tau1) >= np.abs(tau2)
            tau = np.where(hi_side, np.abs(tau1), np.abs(tau2))
            dx = cx[bi] - cx[bj]
            dy = cy[bi] - cy[bj]
            dz2 = dx * dx + dy * dy
            vals = np.sqrt(np.sqrt(dz2 * dz2 + 16.0 * (tau * tau)))
            k = int(np.argmax(vals))
            if float(vals[k]) > best:
                best = float(vals[k])
            i_k, j_k = bi[k], bj[k]
            if hi_side[k]:
                cand_a.append(int(phi[i_k]))
                cand_b.append(int(plo[j_k]))
            else:
                cand_a.append(int(plo[i_k]))
                cand_b.append(int(phi[j_k]))
        ca = np.array(cand_a, dtype=np.intp)
        cb = np.array(cand_b, dtype=np.intp)
        d_exact = space.dist_pairs(ca, cb)
        k = int(np.argmax(d_exact))
        diam[c] = upper[c] = float(d_exact[k])
        pairs[c] = (ca[k], cb[k])
    return diam, upper, pairs, approx


def _koranyi_partition(space: FiniteMetricSpace, pos: np.ndarray, r: float):
    rt = _koranyi_runs(space, pos, r)
    n_runs = rt.starts.size
    ei, ej = _koranyi_run_edges(space, pos, r, rt)
    n_comp, run_labels = _labels_from_edges(n_runs, ei, ej)
    labels_sorted = run_labels[rt.run_of_slot]
    labels = np.empty(pos.size, dtype=np.intp)
    labels[rt.order] = labels_sorted
    labels = _first_appearance_relabel(labels)
    n_comp = int(labels.max()) + 1 if pos.size else 0
    diam, upper, pairs, approx = _koranyi_run_diameters(space, pos, labels, n_comp, rt)
    return n_comp, labels, diam, upper, pairs, approx, rt


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def r_components(
    space: FiniteMetricSpace,
    r: float,
    subset: np.ndarray | None = None,
    strategy: str | None = None,
) -> ComponentPartition:
    """Partition (a subset of) the space into r-components with diameters.

    Edges use the shared tolerance: d <= r * (1 + 1e-9). Components come back
    labeled in order of first appearance along the subset's position order.
    """
    if r <= 0:
        raise SpecError(f"component scale must be positive, got {r}")
    pos = np.arange(space.n, dtype=np.intp) if subset is None else np.asarray(subset, dtype=np.intp)
    m = pos.size
    if m == 0:
        empty = np.empty(0)
        return ComponentPartition(
            r, pos, np.empty(0, np.int64), np.empty(0, np.intp), 0, empty, empty.copy(),
            np.empty((0, 2), np.intp), True, np.empty(0, bool),
        )
    strat = strategy or _choose_strategy(space, m, r)
    if strat == "line":
        n_comp, labels, diam, upper, pairs, approx = _line_partition(space, pos, r)
    elif strat == "ultra":
        n_comp, labels, diam, upper, pairs, approx = _ultra_partition(space, pos, r)
    elif strat == "koranyi":
        n_comp, labels, diam, upper, pairs, approx, _ = _koranyi_partition(space, pos, r)
    else:
        if strat == "dense":
            cand = _dense_candidate_chunks(m)
        elif strat == "grid":
            widths = space.metric.grid_prune_width(space, r)
            if widths is None:
                raise SpecError("grid strategy requires a prunable metric rule")
            cand = _grid_candidate_chunks(space, pos, widths)
        else:
            raise SpecError(f"unknown component strategy '{strat}'")
        n_comp, labels = _stream_union(space, pos, r, cand)
        diam, upper, pairs, approx = _component_diameters(space, pos, labels, n_comp)
    return ComponentPartition(
        r=float(r),
        positions=pos,
        ids=space.ids[pos],
        labels=labels,
        n_components=n_comp,
        diameters=diam,
        diam_upper=upper,
        diam_pairs=pairs,
        diameters_exact=not bool(approx.any()),
        approx_mask=approx,
    )


def dendrogram(space: FiniteMetricSpace) -> Dendrogram:
    """Single-linkage merge history (Kruskal sweep over MST edges).

    Merge scales equal minimum-spanning-tree edge weights of the complete
    distance graph; equal-weight edges are processed in lexicographic
    (smaller id, larger id) order. Resulting-component diameters are exact up
    to the pair cap, bounding-box upper bounds beyond it (flagged).
    """
    n = space.n
    if n > DENDROGRAM_CAP:
        raise SpecError(f"dendrogram capped at {DENDROGRAM_CAP} points, got {n}")
    if n == 0:
        return Dendrogram(0, space.ids, [], True)
    # Dense Prim: O(n) memory, O(n^2) distance evaluations.
    in_tree = np.zeros(n, dtype=bool)
    best_d = np.full(n, np.inf)
    best_src = np.zeros(n, dtype=np.intp)
    in_tree[0] = True
    d0 = space.dist_one_to_many(0)
    best_d = d0.copy()
    best_d[0] = np.inf
    edges: list[tuple[float, int, int]] = []
    for _ in range(n - 1):
        nxt = int(np.argmin(best_d))
        w = float(best_d[nxt])
        edges.append((w, int(best_src[nxt]), nxt))
        in_tree[nxt] = True
        best_d[nxt] = np.inf
        dn = space.dist_one_to_many(nxt)
        improve = (~in_tree) & (dn < best_d)
        best_d[improve] = dn[improve]
        best_src[improve] = nxt
    ids = space.ids
    edges.sort(key=lambda e: (e[0], min(ids[e[1]], ids[e[2]]), max(ids[e[1]], ids[e[2]])))
    uf = UnionFind(n)
    members: list[np.ndarray | None] = [np.array([i], dtype=np.intp) for i in range(n)]
    comp_diam = np.zeros(n, dtype=float)
    min_id = ids.astype(np.int64).copy()
    exact = n <= EXACT_DIAM_CAP
    events: list[MergeEvent] = []
    for w, a, b in edges:
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        ma, mb = members[ra], members[rb]
        assert ma is not None and mb is not None
        if exact:
            cross = space.dist_cross(ma, mb)
            new_diam = max(comp_diam[ra], comp_diam[rb], float(cross.max()))
        else:
            merged_probe = np.concatenate([ma, mb])
            ub = _diam_upper_bound(space, merged_probe)
            new_diam = max(comp_diam[ra], comp_diam[rb], ub)
        id_a = int(min_id[ra])
        id_b = int(min_id[rb])
        uf.union(ra, rb)
        root = uf.find(ra)
        merged = np.concatenate([ma, mb])
        members[ra] = members[rb] = None
        members[root] = merged
        comp_diam[root] = new_diam
        min_id[root] = min(id_a, id_b)
        events.append(MergeEvent(scale=w, a=min(id_a, id_b), b=max(id_a, id_b),
                                 diameter=new_diam, pos_a=a, pos_b=b))
    return Dendrogram(n=n, ids=ids, events=events, diameters_exact=exact)


def components_profile(
    space: FiniteMetricSpace,
    ladder: ScaleLadder,
    subset: np.ndarray | None = None,
) -> list[ComponentPartition]:
    """Component partitions at every ladder scale (aligned with ladder order).

    For small spaces this runs one incremental union-find sweep over globally
    sorted edges; the result is identical to independent per-scale calls (the
    same edge predicate is applied), which larger spaces use directly.
    """
    pos = np.arange(space.n, dtype=np.intp) if subset is None else np.asarray(subset, dtype=np.intp)
    scales_desc = list(ladder.r_values)
    if pos.size > DENSE_CAP or pos.size == 0:
        return [r_components(space, r, subset=pos) for r in scales_desc]
    m = pos.size
    rows = np.triu_indices(m, 1)
    d = space.dist_pairs(pos[rows[0]], pos[rows[1]])
    order = np.lexsort((rows[1], rows[0], d))
    di, ii, jj = d[order], rows[0][order], rows[1][order]
    uf = UnionFind(m)
    out_rev: list[ComponentPartition] = []
    ptr = 0
    for r in sorted(scales_desc):
        thresh = r * (1.0 + REL_TOL)
        while ptr < di.size and di[ptr] <= thresh:
            uf.union(int(ii[ptr]), int(jj[ptr]))
            ptr += 1
        labels = _first_appearance_relabel(uf.labels())
        n_comp = int(labels.max()) + 1
        diam, upper, pairs, approx = _component_diameters(space, pos, labels, n_comp)
        out_rev.append(
            ComponentPartition(
                r=float(r), positions=pos, ids=space.ids[pos], labels=labels,
                n_components=n_comp, diameters=diam, diam_upper=upper,
                diam_pairs=pairs, diameters_exact=not bool(approx.any()), approx_mask=approx,
            )
        )
    out_rev.reverse()
    return out_rev


def component_path(
    space: FiniteMetricSpace,
    partition: ComponentPartition,
    a: int,
    b: int,
) -> np.ndarray | None:
    """An r-path (positions) joining a and b inside their component, or None.

    BFS over the r-graph restricted to the component; feasible only for
    exact-mode components within the path cap.
    """
    label_a = partition.labels[np.nonzero(partition.positions == a)[0]]
    label_b = partition.labels[np.nonzero(partition.positions == b)[0]]
    if label_a.size != 1 or label_b.size != 1 or label_a[0] != label_b[0]:
        return None
    members = partition.members(int(label_a[0]))
    if members.size > PATH_CAP:
        return None
    sub = {int(p): k for k, p in enumerate(members)}
    if members.size > DENSE_CAP:
        widths = space.metric.grid_prune_width(space, partition.r)
        if widths is None:
            return None
        cand = _grid_candidate_chunks(space, members, widths)
    else:
        cand = _dense_candidate_chunks(members.size)
    acc_i: list[np.ndarray] = []
    acc_j: list[np.ndarray] = []
    held = 0
    for ei, ej in _evaluated_edges(space, members, partition.r, cand):
        acc_i.append(ei)
        acc_j.append(ej)
        held += ei.size
        if held > PATH_EDGE_CAP:
            return None
    if held == 0:
        return None
    ei = np.concatenate(acc_i)
    ej = np.concatenate(acc_j)
    m = members.size
    graph = coo_matrix(
        (np.ones(2 * ei.size, dtype=np.int8),
         (np.concatenate([ei, ej]), np.concatenate([ej, ei]))),
        shape=(m, m),
    ).tocsr()
    src, dst = sub[a], sub[b]
    _, parent = breadth_first_order(graph, src, directed=False, return_predecessors=True)
    if dst != src and parent[dst] < 0:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(int(parent[path[-1]]))
    path.reverse()
    return members[np.array(path, dtype=np.intp)]
