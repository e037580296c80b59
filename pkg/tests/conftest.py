"""Shared brute-force oracles and fixture builders for the test suite.

The oracles recompute everything from the full distance matrix with plain
NumPy/SciPy, independently of the engine's strategies, so engine results can
be checked for exact equality.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree

from lipdim import (
    EuclideanAmbient,
    FiniteMetricSpace,
    REL_TOL,
    ScaleLadder,
    SnowflakePower,
    product,
    tree,
    word_cantor,
)


def full_matrix(space: FiniteMetricSpace, pos: np.ndarray | None = None) -> np.ndarray:
    pos = np.arange(space.n, dtype=np.intp) if pos is None else np.asarray(pos, dtype=np.intp)
    return space.dist_cross(pos, pos)


def first_appearance_relabel(labels: np.ndarray) -> np.ndarray:
    out = np.empty_like(labels)
    nxt = 0
    seen: dict[int, int] = {}
    for i, l in enumerate(labels):
        key = int(l)
        if key not in seen:
            seen[key] = nxt
            nxt += 1
        out[i] = seen[key]
    return out


def brute_partition(
    space: FiniteMetricSpace, r: float, pos: np.ndarray | None = None
) -> tuple[int, np.ndarray]:
    """r-component labels straight from the dense adjacency matrix."""
    pos = np.arange(space.n, dtype=np.intp) if pos is None else np.asarray(pos, dtype=np.intp)
    dm = full_matrix(space, pos)
    adj = dm <= r * (1.0 + REL_TOL)
    n_comp, raw = connected_components(coo_matrix(adj), directed=False)
    labels = first_appearance_relabel(raw)
    return int(n_comp), labels


def brute_diameters(
    space: FiniteMetricSpace, pos: np.ndarray, labels: np.ndarray, n_comp: int
) -> np.ndarray:
    dm = full_matrix(space, pos)
    out = np.zeros(n_comp)
    for c in range(n_comp):
        sel = np.nonzero(labels == c)[0]
        if sel.size > 1:
            out[c] = dm[np.ix_(sel, sel)].max()
    return out


def brute_mst_weights(space: FiniteMetricSpace) -> np.ndarray:
    """Sorted minimum-spanning-tree edge weights of the complete graph."""
    dm = full_matrix(space)
    mst = minimum_spanning_tree(dm)
    return np.sort(np.asarray(mst[mst.nonzero()]).ravel())


def quantile_ladder(space: FiniteMetricSpace, k: int = 4) -> ScaleLadder:
    """A small descending ladder drawn from the space's distance quantiles."""
    dm = full_matrix(space)
    vals = dm[np.triu_indices(space.n, 1)]
    vals = vals[vals > 0]
    if vals.size == 0:
        return ScaleLadder((1.0,))
    qs = np.quantile(vals, np.linspace(0.9, 0.1, k))
    scales = sorted({float(q) for q in qs if q > 0}, reverse=True)
    return ScaleLadder(tuple(scales) or (float(vals.max()),))


def random_space(rng: np.random.Generator, max_n: int = 400) -> FiniteMetricSpace:
    """A random finite metric space of a random kind (for engine oracles)."""
    kind = rng.integers(0, 6)
    if kind <= 2:  # euclidean cloud, 1-3 dims
        n = int(rng.integers(2, max_n))
        d = int(rng.integers(1, 4))
        coords = rng.normal(size=(n, d)) * float(rng.uniform(0.5, 20.0))
        return FiniteMetricSpace(EuclideanAmbient(), coords=coords)
    if kind == 3:  # snowflaked cloud
        n = int(rng.integers(2, max_n))
        coords = rng.uniform(size=(n, 2))
        return FiniteMetricSpace(
            SnowflakePower(EuclideanAmbient(), float(rng.uniform(0.4, 1.0))), coords=coords
        )
    if kind == 4:  # word space
        return word_cantor(int(rng.integers(2, 4)), int(rng.integers(2, 6)))
    n = int(rng.integers(2, min(max_n, 200)))
    return tree("random", n, seed=int(rng.integers(0, 1 << 16)), edge_lengths="uniform")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)
