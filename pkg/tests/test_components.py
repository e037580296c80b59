"""Component engine vs dense brute-force oracles: exact agreement required."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipdim import (
    EuclideanAmbient,
    FiniteMetricSpace,
    ScaleLadder,
    SpecError,
    UnionFind,
    component_path,
    components_profile,
    dendrogram,
    r_components,
    heisenberg_net,
    interval_net,
    word_cantor,
)
from lipdim.components import _choose_strategy

from conftest import (
    brute_diameters,
    brute_mst_weights,
    brute_partition,
    quantile_ladder,
    random_space,
)


# ---------------------------------------------------------------------------
# UnionFind
# ---------------------------------------------------------------------------


def test_union_find_basic():
    uf = UnionFind(5)
    assert uf.n_sets == 5
    assert uf.union(0, 1)
    assert not uf.union(1, 0)
    uf.union(2, 3)
    assert uf.n_sets == 3
    assert uf.find(0) == uf.find(1)
    assert uf.find(2) == uf.find(3)
    assert uf.find(4) != uf.find(0)
    labels = uf.labels()
    assert labels[0] == labels[1]
    assert labels[2] == labels[3]
    assert len(set(labels.tolist())) == 3


@given(st.lists(st.tuples(st.integers(0, 19), st.integers(0, 19)), max_size=60))
@settings(max_examples=50, deadline=None)
def test_union_find_matches_graph_components(pairs):
    uf = UnionFind(20)
    rows = [a for a, _ in pairs]
    cols = [b for _, b in pairs]
    for a, b in pairs:
        uf.union(a, b)
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    adj = coo_matrix((np.ones(len(pairs)), (rows, cols)), shape=(20, 20))
    n_comp, raw = connected_components(adj, directed=False)
    assert uf.n_sets == n_comp
    mine = uf.labels()
    # Same partition: equal label arrays after canonical relabeling both sides.
    from conftest import first_appearance_relabel

    assert np.array_equal(first_appearance_relabel(mine), first_appearance_relabel(raw))


# ---------------------------------------------------------------------------
# r_components against the dense oracle
# ---------------------------------------------------------------------------


def test_engine_matches_oracle_on_random_spaces(rng):
    for _ in range(50):
        space = random_space(rng)
        ladder = quantile_ladder(space)
        for r in ladder.r_values:
            part = r_components(space, float(r))
            n_comp, labels = brute_partition(space, float(r))
            assert part.n_components == n_comp
            assert np.array_equal(part.labels, labels)
            diam = brute_diameters(space, part.positions, labels, n_comp)
            if part.diameters_exact:
                assert np.array_equal(part.diameters, diam)
            else:
                assert np.all(part.diameters <= diam + 1e-12)
                assert np.all(diam <= part.diam_upper + 1e-12)


def test_engine_matches_oracle_on_subsets(rng):
    space = random_space(rng, max_n=300)
    sub = rng.choice(space.n, size=max(2, space.n // 2), replace=False)
    sub = np.sort(sub).astype(np.intp)
    for r in quantile_ladder(space).r_values:
        part = r_components(space, float(r), subset=sub)
        n_comp, labels = brute_partition(space, float(r), pos=sub)
        assert part.n_components == n_comp
        assert np.array_equal(part.labels, labels)
        assert np.array_equal(part.positions, sub)


def test_forced_strategies_agree():
    rng = np.random.default_rng(7)
    coords = rng.uniform(size=(500, 2))
    space = FiniteMetricSpace(EuclideanAmbient(), coords=coords)
    for r in (0.02, 0.05, 0.2):
        ref = r_components(space, r, strategy="dense")
        for strategy in ("grid",):
            alt = r_components(space, r, strategy=strategy)
            assert alt.n_components == ref.n_components
            assert np.array_equal(alt.labels, ref.labels)
            assert np.allclose(alt.diameters, ref.diameters, rtol=0, atol=0)


def test_koranyi_fast_path_matches_dense():
    H = heisenberg_net(1.0, 1.0 / 8.0)
    assert _choose_strategy(H, H.n, 0.25) == "koranyi"
    for r in (0.125, 0.25, 0.5):
        fast = r_components(H, r)
        slow = r_components(H, r, strategy="dense")
        assert fast.n_components == slow.n_components
        assert np.array_equal(fast.labels, slow.labels)
        # Closed-form run diameters must equal the exhaustive scan bitwise.
        assert np.array_equal(fast.diameters, slow.diameters)
        assert not fast.approx_mask.any()


def test_line_strategy_on_sorted_1d():
    X = interval_net(101, 1.0)
    part = r_components(X, 0.015)
    n_comp, labels = brute_partition(X, 0.015)
    assert part.n_components == n_comp == 1
    part2 = r_components(X, 0.005)
    assert part2.n_components == 101


def test_ultrametric_strategy_matches_oracle():
    W = word_cantor(2, 6)
    for r in (0.5, 0.25, 0.125, 0.0625):
        part = r_components(W, r)
        n_comp, labels = brute_partition(W, r)
        assert part.n_components == n_comp
        assert np.array_equal(part.labels, labels)
        diam = brute_diameters(W, part.positions, labels, n_comp)
        assert np.array_equal(part.diameters, diam)


def test_invalid_scale_rejected():
    X = interval_net(5)
    with pytest.raises(SpecError):
        r_components(X, 0.0)
    with pytest.raises(SpecError):
        r_components(X, -1.0)


def test_edge_tolerance_convention():
    # d = r exactly is an edge; d = r * (1 + 2e-9) is not.
    coords = np.array([[0.0], [1.0]])
    X = FiniteMetricSpace(EuclideanAmbient(), coords=coords)
    assert r_components(X, 1.0).n_components == 1
    assert r_components(X, 1.0 / (1.0 + 2e-9)).n_components == 2


# ---------------------------------------------------------------------------
# components_profile: incremental sweep == independent per-scale calls
# ---------------------------------------------------------------------------


def test_incremental_profile_equals_per_scale(rng):
    for _ in range(50):
        space = random_space(rng)
        ladder = quantile_ladder(space)
        prof = components_profile(space, ladder)
        assert len(prof) == len(ladder.r_values)
        for part, r in zip(prof, ladder.r_values):
            solo = r_components(space, float(r))
            assert part.n_components == solo.n_components
            assert np.array_equal(part.labels, solo.labels)
            assert np.array_equal(part.diameters, solo.diameters)


# ---------------------------------------------------------------------------
# Dendrogram vs MST oracle
# ---------------------------------------------------------------------------


def test_dendrogram_merge_scales_equal_mst_weights(rng):
    for _ in range(25):
        space = random_space(rng, max_n=250)
        dend = dendrogram(space)
        assert len(dend.events) == space.n - 1
        assert np.array_equal(np.sort(dend.merge_scales()), brute_mst_weights(space))


def test_dendrogram_cut_matches_r_components(rng):
    space = random_space(rng, max_n=200)
    dend = dendrogram(space)
    for r in quantile_ladder(space).r_values:
        labels = dend.cut(float(r))
        part = r_components(space, float(r))
        from conftest import first_appearance_relabel

        assert np.array_equal(first_appearance_relabel(labels), part.labels)


def test_dendrogram_scales_monotone(rng):
    space = random_space(rng, max_n=150)
    scales = dendrogram(space).merge_scales()
    assert np.all(np.diff(scales) >= 0)


# ---------------------------------------------------------------------------
# Witness paths
# ---------------------------------------------------------------------------


def test_component_path_is_valid_r_path(rng):
    space = random_space(rng, max_n=150)
    r = float(quantile_ladder(space).r_values[0])
    part = r_components(space, r)
    c = part.argmax_component()
    members = part.members(c)
    if members.size < 2:
        pytest.skip("degenerate component")
    src, dst = part.diam_pairs[c]
    path = component_path(space, part, int(src), int(dst))
    assert path is not None
    assert path[0] == src and path[-1] == dst
    steps = space.dist_pairs(np.asarray(path[:-1]), np.asarray(path[1:]))
    assert np.all(steps <= r * (1.0 + 1e-9))


def test_component_path_none_across_components():
    coords = np.array([[0.0], [10.0]])
    X = FiniteMetricSpace(EuclideanAmbient(), coords=coords)
    part = r_components(X, 1.0)
    assert part.n_components == 2
    assert component_path(X, part, 0, 1) is None
