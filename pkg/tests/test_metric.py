"""Metric rules, finite spaces, scale ladders, and net/window helpers."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import full_matrix, random_space
from lipdim import (
    EuclideanAmbient,
    ExplicitMatrix,
    FiniteMetricSpace,
    Koranyi,
    REL_TOL,
    ScaleLadder,
    SnowflakePower,
    SpecError,
    check_metric_axioms,
    eps_net,
    leq_tol,
    product,
    rescale,
    snowflake_space,
    tree,
    window,
    word_cantor,
)


# ---------------------------------------------------------------------------
# Euclidean ambient rule
# ---------------------------------------------------------------------------


def test_euclidean_three_four_five():
    X = FiniteMetricSpace(EuclideanAmbient(), coords=np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]]))
    assert X.dist(0, 1) == 3.0
    assert X.dist(1, 2) == 4.0
    assert X.dist(0, 2) == 5.0


def test_distance_accessors_agree(rng):
    X = FiniteMetricSpace(EuclideanAmbient(), coords=rng.normal(size=(40, 3)))
    dm = full_matrix(X)
    assert np.array_equal(dm, dm.T)
    assert np.all(np.diag(dm) == 0.0)
    row = X.dist_one_to_many(7)
    assert np.array_equal(row, dm[7])
    i = np.array([0, 5, 11])
    j = np.array([3, 5, 39])
    assert np.array_equal(X.dist_pairs(i, j), dm[i, j])


# ---------------------------------------------------------------------------
# Gauge quasinorm rule (group-twisted R^3)
# ---------------------------------------------------------------------------


def _gauge_space(coords: np.ndarray) -> FiniteMetricSpace:
    return FiniteMetricSpace(Koranyi(), coords=np.asarray(coords, dtype=float))


def test_gauge_unit_vectors():
    X = _gauge_space([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert X.dist(0, 1) == 1.0
    assert X.dist(0, 2) == 1.0
    # Pure vertical offset: (16 * 1) ** (1/4) = 2.
    assert X.dist(0, 3) == 2.0


def _group_translate(g: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """(a,b,c) . (x,y,t) = (a+x, b+y, c+t+(a*y-b*x)/2)."""
    a, b, c = g
    out = pts.copy()
    out[:, 0] += a
    out[:, 1] += b
    out[:, 2] += c + 0.5 * (a * pts[:, 1] - b * pts[:, 0])
    return out


def test_gauge_left_invariance(rng):
    pts = rng.normal(size=(100, 3)) * 3.0
    X = _gauge_space(pts)
    i, j = np.triu_indices(100, 1)
    base = X.dist_pairs(i, j)
    for _ in range(3):
        g = rng.normal(size=3) * 2.0
        Y = _gauge_space(_group_translate(g, pts))
        moved = Y.dist_pairs(i, j)
        assert np.allclose(moved, base, rtol=1e-9, atol=1e-12)


def test_gauge_dilation_scales_exactly(rng):
    pts = rng.normal(size=(60, 3))
    X = _gauge_space(pts)
    lam = 2.0
    dilated = pts * np.array([lam, lam, lam * lam])
    Y = _gauge_space(dilated)
    i, j = np.triu_indices(60, 1)
    # Power-of-two dilations commute exactly with the sqrt(sqrt(.)) gauge.
    assert np.array_equal(Y.dist_pairs(i, j), lam * X.dist_pairs(i, j))


def test_gauge_triangle_inequality(rng):
    X = _gauge_space(rng.normal(size=(120, 3)))
    rep = check_metric_axioms(X, rng=rng)
    assert rep["identity_ok"] and rep["symmetry_ok"] and rep["triangle_ok"]


# ---------------------------------------------------------------------------
# Snowflake rule
# ---------------------------------------------------------------------------


def test_snowflake_square_root_example():
    X = FiniteMetricSpace(SnowflakePower(EuclideanAmbient(), 0.5), coords=np.array([[0.0], [4.0]]))
    assert X.dist(0, 1) == 2.0


def test_snowflake_space_wrapper(rng):
    base = FiniteMetricSpace(EuclideanAmbient(), coords=rng.uniform(size=(30, 2)))
    snow = snowflake_space(base, 0.7)
    i, j = np.triu_indices(30, 1)
    assert np.allclose(snow.dist_pairs(i, j), base.dist_pairs(i, j) ** 0.7, rtol=1e-12)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0.3, 1.0), seed=st.integers(0, 2**20))
def test_snowflake_preserves_axioms(alpha, seed):
    r = np.random.default_rng(seed)
    X = FiniteMetricSpace(SnowflakePower(EuclideanAmbient(), alpha), coords=r.uniform(size=(25, 2)))
    rep = check_metric_axioms(X)
    assert rep["triangle_ok"]


def test_snowflake_alpha_validation():
    with pytest.raises(SpecError):
        SnowflakePower(EuclideanAmbient(), 0.0)
    with pytest.raises(SpecError):
        SnowflakePower(EuclideanAmbient(), 1.5)


# ---------------------------------------------------------------------------
# Word ultrametric rule
# ---------------------------------------------------------------------------


def test_word_distance_levels():
    X = word_cantor(2, 3)
    vals = sorted({float(X.dist(i, j)) for i in range(X.n) for j in range(i + 1, X.n)})
    assert vals == [0.125, 0.25, 0.5]


def test_word_strong_triangle_exhaustive():
    X = word_cantor(2, 3)
    rep = check_metric_axioms(X)
    assert rep["mode"] == "exhaustive"
    assert rep["strong_triangle_ok"]
    assert rep["strong_triangle_violation"] == 0.0


def test_word_validation():
    with pytest.raises(SpecError):
        UltrametricWords = type(word_cantor(2, 2).metric)
        UltrametricWords(np.zeros((4, 2), dtype=np.int64), scale=-1.0)


# ---------------------------------------------------------------------------
# Tree path rule
# ---------------------------------------------------------------------------


def test_tree_path_chain_distance():
    X = tree("path", 4)
    assert X.dist(0, 3) == 3.0
    assert X.dist(1, 2) == 1.0


def test_tree_star_leaves():
    X = tree("star", 5)
    for i in range(1, 5):
        assert X.dist(0, i) == 1.0
        for j in range(i + 1, 5):
            assert X.dist(i, j) == 2.0


def test_tree_four_point_condition(rng):
    X = tree("random", 120, seed=11, edge_lengths="uniform")
    dm = full_matrix(X)
    idx = rng.integers(0, X.n, size=(100_000, 4))
    a, b, c, d = idx.T
    s1 = dm[a, b] + dm[c, d]
    s2 = dm[a, c] + dm[b, d]
    s3 = dm[a, d] + dm[b, c]
    # Tree metrics satisfy the four-point condition: the two largest of the
    # three pairings are equal, so each sum is at most the max of the others.
    assert np.all(s1 <= np.maximum(s2, s3) * (1.0 + 1e-9))


# ---------------------------------------------------------------------------
# Explicit matrix rule
# ---------------------------------------------------------------------------


def test_explicit_matrix_roundtrip():
    dm = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]])
    X = FiniteMetricSpace(ExplicitMatrix(dm))
    assert X.n == 3
    assert np.array_equal(full_matrix(X), dm)
    assert check_metric_axioms(X)["triangle_ok"]


def test_axiom_checker_flags_triangle_violation():
    dm = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
    rep = check_metric_axioms(FiniteMetricSpace(ExplicitMatrix(dm)))
    assert not rep["triangle_ok"]
    assert rep["triangle_violation"] == pytest.approx(3.0)


def test_axiom_checker_samples_large_spaces(rng):
    X = FiniteMetricSpace(EuclideanAmbient(), coords=rng.normal(size=(400, 2)))
    rep = check_metric_axioms(X, rng=rng)
    assert rep["mode"] == "sampled"
    assert rep["triangle_ok"]


# ---------------------------------------------------------------------------
# Sup-product rule
# ---------------------------------------------------------------------------


def test_product_is_max_of_factors(rng):
    A = word_cantor(2, 2)
    B = FiniteMetricSpace(EuclideanAmbient(), coords=rng.uniform(size=(3, 1)))
    P = product(A, B)
    assert P.n == A.n * B.n
    for _ in range(200):
        u, v = rng.integers(0, P.n, size=2)
        la, ra = divmod(int(u), B.n)
        lb, rb = divmod(int(v), B.n)
        want = max(float(A.dist(la, lb)), float(B.dist(ra, rb)))
        assert float(P.dist(int(u), int(v))) == want


# ---------------------------------------------------------------------------
# Rescaling
# ---------------------------------------------------------------------------


def test_rescale_power_of_two_is_exact(rng):
    for space in (
        FiniteMetricSpace(EuclideanAmbient(), coords=rng.normal(size=(50, 2))),
        word_cantor(2, 4),
        tree("random", 60, seed=5, edge_lengths="uniform"),
        _gauge_space(rng.normal(size=(50, 3))),
    ):
        lam = 4.0
        big = rescale(space, lam)
        i, j = np.triu_indices(space.n, 1)
        assert np.array_equal(big.dist_pairs(i, j), lam * space.dist_pairs(i, j))
        assert np.array_equal(big.ids, space.ids)


def test_rescale_validation():
    X = word_cantor(2, 2)
    with pytest.raises(SpecError):
        rescale(X, 0.0)
    with pytest.raises(SpecError):
        rescale(X, -2.0)


# ---------------------------------------------------------------------------
# Scale ladders
# ---------------------------------------------------------------------------


def test_ladder_validation():
    with pytest.raises(SpecError):
        ScaleLadder(())
    with pytest.raises(SpecError):
        ScaleLadder((1.0, 0.0))
    with pytest.raises(SpecError):
        ScaleLadder((0.5, 1.0))
    with pytest.raises(SpecError):
        ScaleLadder((1.0, 1.0))


def test_ladder_for_space_geometry():
    X = word_cantor(2, 6)
    L = ScaleLadder.for_space(X)
    assert L.r_values == (0.25, 0.125, 0.0625)
    assert L.ratio == 0.5
    # Floor sits at kappa * resolution and every rung clears it.
    assert L.floor == 4.0 * X.resolution
    assert all(v >= L.floor for v in L.r_values)
    for a, b in zip(L.r_values, L.r_values[1:]):
        assert b == L.ratio * a


def test_ladder_for_space_requires_certifiable_scales():
    # Resolution too coarse relative to the diameter: no rung clears the floor.
    with pytest.raises(SpecError):
        ScaleLadder.for_space(word_cantor(2, 3))


def test_ladder_rescaled():
    L = ScaleLadder.for_space(word_cantor(2, 6))
    R = L.rescaled(4.0)
    assert R.r_values == tuple(4.0 * v for v in L.r_values)
    assert R.floor == 4.0 * L.floor
    assert R.ratio == L.ratio
    with pytest.raises(SpecError):
        L.rescaled(-1.0)


# ---------------------------------------------------------------------------
# Nets, windows, tolerance
# ---------------------------------------------------------------------------


def test_eps_net_separated_and_covering(rng):
    for _ in range(25):
        space = random_space(rng, max_n=120)
        dm = full_matrix(space)
        pos = np.nonzero(dm > 0)
        if pos[0].size == 0:
            continue
        eps = float(np.quantile(dm[pos], 0.4))
        net = eps_net(space, eps)
        assert net[0] == 0  # seeded at the lowest original id
        sub = dm[np.ix_(net, net)]
        off = sub[np.triu_indices(net.size, 1)]
        if off.size:
            assert np.all(off >= eps * (1.0 - 1e-12))
        # Coverage: every point within eps of some net point.
        assert np.all(dm[:, net].min(axis=1) <= eps * (1.0 + 1e-12))


def test_window_is_closed_ball(rng):
    space = random_space(rng, max_n=150)
    center = int(rng.integers(0, space.n))
    radius = float(np.quantile(full_matrix(space)[center], 0.5))
    win = window(space, center, radius)
    inside = np.nonzero(space.dist_one_to_many(center) <= radius * (1.0 + REL_TOL))[0]
    assert np.array_equal(np.sort(win.ids), np.sort(space.ids[inside]))


def test_leq_tol_edge_convention():
    assert leq_tol(1.0, 1.0)
    assert leq_tol(1.0 + 9e-10, 1.0)
    assert not leq_tol(1.0 + 3e-9, 1.0)
    assert REL_TOL == 1e-9
