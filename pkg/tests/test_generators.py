"""Point-cloud generators: counts, geometry, determinism, budgets."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import full_matrix
from lipdim import (
    EuclideanAmbient,
    Koranyi,
    FiniteMetricSpace,
    SpaceSpec,
    SpecError,
    build_space,
    carpet,
    check_metric_axioms,
    gasket,
    harmonic_set,
    heisenberg_net,
    interval_net,
    koch,
    middle_cantor,
    product,
    real_subset,
    strip,
    tree,
    word_cantor,
)


# ---------------------------------------------------------------------------
# Planar carpet
# ---------------------------------------------------------------------------


def _carpet_corner_oracle(p: int, gen: int) -> set[tuple[int, int]]:
    """Corners of kept cells on the integer lattice of pitch p**-gen.

    A cell (i, j) at generation g is kept iff no base-p digit position has
    both digits equal to the middle digit (p - 1) // 2.
    """
    mid = (p - 1) // 2
    corners: set[tuple[int, int]] = set()
    for i in range(p**gen):
        for j in range(p**gen):
            ii, jj, keep = i, j, True
            for _ in range(gen):
                if ii % p == mid and jj % p == mid:
                    keep = False
                    break
                ii //= p
                jj //= p
            if keep:
                for a in (0, 1):
                    for b in (0, 1):
                        corners.add((i + a, j + b))
    return corners


@pytest.mark.parametrize("p,gen", [(3, 1), (3, 2), (3, 3), (5, 1)])
def test_carpet_corners_match_lattice_oracle(p, gen):
    X = carpet(p, gen, "corners")
    oracle = _carpet_corner_oracle(p, gen)
    assert X.n == len(oracle)
    scaled = np.rint(X.coords * p**gen).astype(int)
    assert {tuple(pt) for pt in scaled} == oracle
    assert np.allclose(X.coords, scaled / p**gen, atol=1e-12)


def test_carpet_counts():
    assert carpet(3, 1, "centers").n == 8
    assert carpet(3, 2, "centers").n == 64
    assert carpet(3, 4, "corners").n == 5280
    assert carpet(5, 2, "centers").n == 576


def test_carpet_centers_avoid_removed_middle():
    X = carpet(3, 2, "centers")
    # No center may fall in the open middle ninth of the unit square.
    inside = (
        (X.coords[:, 0] > 1 / 3) & (X.coords[:, 0] < 2 / 3)
        & (X.coords[:, 1] > 1 / 3) & (X.coords[:, 1] < 2 / 3)
    )
    assert not inside.any()
    assert X.resolution == pytest.approx(1 / 9)


def test_carpet_validation():
    with pytest.raises(SpecError):
        carpet(2, 2)  # even subdivision has no middle cell
    with pytest.raises(SpecError):
        carpet(3, 2, "edges")
    # Generation 0 degenerates to the unit square itself.
    assert carpet(3, 0, "corners").n == 4


# ---------------------------------------------------------------------------
# Triangular gasket
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("gen,n", [(0, 3), (1, 6), (2, 15), (3, 42), (4, 123)])
def test_gasket_vertex_counts(gen, n):
    # Distinct corner vertices: 3 * (3**gen + 1) / 2.
    assert gasket(gen).n == n


def test_gasket_geometry():
    X = gasket(1)
    dm = full_matrix(X)
    assert dm.max() == pytest.approx(1.0)
    # Midpoints of the unit triangle appear at generation 1.
    assert any(np.allclose(c, [0.5, 0.0]) for c in X.coords)
    assert any(np.allclose(c, [0.25, np.sqrt(3) / 4]) for c in X.coords)
    assert X.resolution == pytest.approx(0.5)
    # All vertices live inside the closed initial triangle.
    y = X.coords[:, 1]
    assert np.all(y >= -1e-12) and np.all(y <= np.sqrt(3) / 2 + 1e-12)


# ---------------------------------------------------------------------------
# Koch polyline
# ---------------------------------------------------------------------------


def test_koch_counts_and_endpoints():
    for gen in (0, 1, 2, 3):
        X = koch(gen)
        assert X.n == 4**gen + 1
        assert np.allclose(X.coords[0], [0.0, 0.0])
        assert np.allclose(X.coords[-1], [1.0, 0.0])


def test_koch_first_generation_apex():
    X = koch(1)
    assert np.allclose(X.coords[2], [0.5, np.sqrt(3) / 6])
    seg = np.diff(X.coords, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    assert np.allclose(lengths, 1 / 3)


def test_koch_segment_lengths_uniform():
    X = koch(3)
    seg = np.diff(X.coords, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    assert np.allclose(lengths, 3.0**-3)
    assert X.resolution == pytest.approx(3.0**-3)


# ---------------------------------------------------------------------------
# Heisenberg-style net
# ---------------------------------------------------------------------------


def test_heisenberg_net_anisotropic_spacing():
    X = heisenberg_net(1.0, 0.25)
    xs = np.unique(X.coords[:, 0])
    ts = np.unique(X.coords[:, 2])
    assert np.allclose(np.diff(xs), 0.25)
    # Vertical pitch is eps**2, matching the gauge's t-exponent.
    assert np.allclose(np.diff(ts), 0.0625)
    assert isinstance(X.metric, Koranyi)


def test_heisenberg_net_inside_gauge_ball():
    X = heisenberg_net(1.0, 0.25)
    probe = FiniteMetricSpace(Koranyi(), coords=np.vstack([np.zeros(3), X.coords]))
    d = probe.dist_one_to_many(0)[1:]
    assert d.max() <= 1.0 + 1e-12
    assert (np.abs(X.coords[:, :2]).max(axis=None)) <= 1.0


def test_heisenberg_net_contains_origin_and_is_symmetric():
    X = heisenberg_net(1.0, 0.25)
    assert any(np.allclose(c, 0.0) for c in X.coords)
    flipped = {tuple(np.round(-c, 9)) for c in X.coords}
    assert {tuple(np.round(c, 9)) for c in X.coords} == flipped


# ---------------------------------------------------------------------------
# One-dimensional families and the strip
# ---------------------------------------------------------------------------


def test_interval_net_spacing():
    X = interval_net(101)
    assert X.n == 101
    assert X.coords[0, 0] == 0.0 and X.coords[-1, 0] == 1.0
    assert np.allclose(np.diff(X.coords[:, 0]), 0.01)
    assert X.resolution == pytest.approx(0.01)


def test_middle_cantor_depth_two_by_hand():
    X = middle_cantor(1 / 3, 2)
    want = np.array([0, 1, 2, 3, 6, 7, 8, 9]) / 9.0
    assert np.allclose(np.sort(X.coords[:, 0]), want)


def test_middle_cantor_is_self_similar():
    X = middle_cantor(1 / 3, 5)
    xs = np.sort(X.coords[:, 0])
    left = xs[xs <= 1 / 3 + 1e-12]
    right = xs[xs >= 2 / 3 - 1e-12]
    assert left.size == right.size == xs.size // 2
    # Affine copies: right block = left block shifted by 2/3, and the left
    # block rescaled by 3 reproduces the depth-4 point set.
    assert np.allclose(right - 2 / 3, left)
    prev = np.sort(middle_cantor(1 / 3, 4).coords[:, 0])
    assert np.allclose(left * 3, prev)


def test_harmonic_set_membership():
    X = harmonic_set(100)
    xs = np.sort(X.coords[:, 0])
    assert X.n == 101
    assert xs[0] == 0.0
    assert np.allclose(np.sort(1.0 / np.arange(1, 101)), xs[1:])


def test_strip_layout():
    X = strip(6, 65)
    assert X.n == 6 * 65
    ys = np.unique(X.coords[:, 1])
    assert np.allclose(ys, 2.0 * np.arange(6))
    assert np.allclose(np.unique(X.coords[:, 0]), np.linspace(0, 1, 65))


def test_real_subset_dispatch():
    assert real_subset("interval_net", n=11).n == 11
    assert real_subset("harmonic", N=10).n == 11
    assert real_subset("strip", sheets=2, net_n=3).n == 6
    with pytest.raises(SpecError):
        real_subset("parabola")


# ---------------------------------------------------------------------------
# Words, trees, products
# ---------------------------------------------------------------------------


def test_word_cantor_counts_and_diameter():
    X = word_cantor(3, 4)
    assert X.n == 3**4
    dm = full_matrix(X)
    assert dm.max() == 0.5
    assert X.resolution == pytest.approx(2.0**-4)


def test_word_cantor_validation():
    with pytest.raises(SpecError):
        word_cantor(0, 3)
    with pytest.raises(SpecError):
        word_cantor(2, 0)
    # A one-letter alphabet degenerates to a single point.
    assert word_cantor(1, 3).n == 1


def test_tree_shapes_and_determinism():
    chain = tree("path", 5)
    assert full_matrix(chain).max() == 4.0
    star = tree("star", 6)
    assert full_matrix(star).max() == 2.0
    cat = tree("caterpillar", 9)
    assert cat.n == 9
    a = tree("random", 40, seed=3, edge_lengths="uniform")
    b = tree("random", 40, seed=3, edge_lengths="uniform")
    assert np.array_equal(full_matrix(a), full_matrix(b))
    c = tree("random", 40, seed=4, edge_lengths="uniform")
    assert not np.array_equal(full_matrix(a), full_matrix(c))
    with pytest.raises(SpecError):
        tree("lattice", 10)


def test_tree_axioms(rng):
    X = tree("random", 80, seed=1, edge_lengths="uniform")
    rep = check_metric_axioms(X, rng=rng)
    assert rep["triangle_ok"]


def test_product_layout_and_ids():
    A = word_cantor(2, 2)
    B = interval_net(3)
    P = product(A, B)
    assert P.n == A.n * B.n
    assert np.array_equal(P.ids, np.arange(P.n))
    # Index layout: left index varies slowest.
    assert float(P.dist(0, 1)) == float(B.dist(0, 1))
    assert float(P.dist(0, B.n)) == float(A.dist(0, 1))


# ---------------------------------------------------------------------------
# Spec-driven construction and budgets
# ---------------------------------------------------------------------------


def test_spacespec_roundtrip_and_determinism():
    spec = SpaceSpec("tree", {"shape": "random", "n": 50, "edge_lengths": "uniform"}, seed=9)
    X = build_space(spec)
    Y = build_space(SpaceSpec.from_dict(spec.to_dict()))
    assert np.array_equal(full_matrix(X), full_matrix(Y))


def test_build_space_dispatch():
    assert build_space(SpaceSpec("carpet", {"p": 3, "gen": 2})).n == 96
    assert build_space(SpaceSpec("koch", {"gen": 2})).n == 17
    assert build_space(SpaceSpec("word_cantor", {"M": 2, "D": 3})).n == 8
    prod = build_space(
        SpaceSpec("product", {"left": SpaceSpec("word_cantor", {"M": 2, "D": 2}),
                              "right": SpaceSpec("interval_net", {"n": 3})})
    )
    assert prod.n == 12
    with pytest.raises(SpecError):
        build_space(SpaceSpec("moebius", {}))


def test_budget_cap(monkeypatch):
    monkeypatch.setenv("LIPDIM_BUDGET", "100")
    with pytest.raises(SpecError):
        build_space(SpaceSpec("carpet", {"p": 3, "gen": 4}))
    monkeypatch.delenv("LIPDIM_BUDGET")
    build_space(SpaceSpec("carpet", {"p": 3, "gen": 2}))
