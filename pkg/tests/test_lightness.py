"""Window families, per-scale lightness constants, and profiles."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import random_space
from lipdim import (
    EuclideanAmbient,
    FiniteMetricSpace,
    REL_TOL,
    SampledMap,
    ScaleLadder,
    SpecError,
    build_windows,
    classify_profile,
    constant_map,
    identity_map,
    lipschitz_constant,
    ll_constant_at_scale,
    ll_profile,
    projection,
    strip,
    word_cantor,
)


def _line_space(xs) -> FiniteMetricSpace:
    return FiniteMetricSpace(EuclideanAmbient(), coords=np.asarray(xs, dtype=float).reshape(-1, 1))


def _map_to_values(domain: FiniteMetricSpace, values) -> SampledMap:
    vals = np.asarray(values, dtype=float).reshape(len(values), -1)
    uniq, inverse = np.unique(vals, axis=0, return_inverse=True)
    codomain = FiniteMetricSpace(EuclideanAmbient(), coords=uniq)
    return SampledMap(domain, codomain, inverse.astype(np.intp))


# ---------------------------------------------------------------------------
# Window families
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("mode", ["ball", "grid"])
def test_windows_cover_domain_with_small_image(mode, rng):
    domain = FiniteMetricSpace(EuclideanAmbient(), coords=rng.normal(size=(80, 2)))
    m = identity_map(domain)
    wins = build_windows(m, 0.8, mode)
    covered = np.unique(np.concatenate([w.dom_positions for w in wins]))
    assert np.array_equal(covered, np.arange(domain.n))
    img = m.image_coords()
    for w in wins:
        pts = img[w.dom_positions]
        if pts.shape[0] > 1:
            span = pts[:, None, :] - pts[None, :, :]
            diam = float(np.sqrt((span ** 2).sum(axis=2)).max())
            assert diam <= w.scale * (1.0 + 4 * REL_TOL)


def test_grid_windows_partition_per_lattice(rng):
    domain = FiniteMetricSpace(EuclideanAmbient(), coords=rng.uniform(size=(60, 2)))
    m = identity_map(domain)
    wins = build_windows(m, 0.3, "grid")
    for lattice in (0, 1):
        members = np.concatenate(
            [w.dom_positions for w in wins if w.cell is not None and w.cell[0] == lattice]
        )
        assert np.array_equal(np.sort(members), np.arange(domain.n))
        assert members.size == domain.n  # no overlaps within one lattice


def test_ball_windows_one_per_image_point():
    domain = _line_space([0.0, 1.0, 10.0, 11.0])
    m = _map_to_values(domain, [0.0, 0.0, 7.0, 7.0])
    wins = build_windows(m, 1.0, "ball")
    assert len(wins) == 2
    assert sorted(w.center_id for w in wins) == [0, 1]


def test_unknown_window_mode_rejected():
    m = identity_map(_line_space([0.0, 1.0]))
    with pytest.raises(SpecError):
        build_windows(m, 1.0, "voronoi")


# ---------------------------------------------------------------------------
# Per-scale constant: hand-computable fixtures
# ---------------------------------------------------------------------------


def test_constant_map_two_clusters_by_hand():
    domain = _line_space([0.0, 1.0, 10.0, 11.0])
    m = constant_map(domain)
    # One window holds everything; 1.5-components are the two clusters.
    res = ll_constant_at_scale(m, 1.5, windows="ball")
    assert res.C == pytest.approx(1.0 / 1.5)
    assert res.witness is not None
    assert res.witness.diameter == 1.0
    assert res.witness.component_size == 2
    # At scale 12 the whole domain is one component of diameter 11.
    res = ll_constant_at_scale(m, 12.0, windows="ball")
    assert res.C == pytest.approx(11.0 / 12.0)
    assert res.witness.component_size == 4


def test_diam_windows_use_actual_window_diameter():
    domain = _line_space([0.0, 0.1, 5.0])
    m = _map_to_values(domain, [0.0, 0.2, 0.2])
    # Ball mode: denominator r=2, best component diameter 0.1.
    ball = ll_constant_at_scale(m, 2.0, windows="ball")
    assert ball.C == pytest.approx(0.1 / 2.0)
    # Diam mode: same window, denominator = its image diameter 0.2.
    diam = ll_constant_at_scale(m, 2.0, windows="diam")
    assert diam.C == pytest.approx(0.1 / 0.2)


def test_witness_pair_realizes_diameter(rng):
    domain = FiniteMetricSpace(EuclideanAmbient(), coords=rng.normal(size=(120, 2)))
    m = projection(domain, axes=[0])
    res = ll_constant_at_scale(m, 0.5, windows="ball", want_path=True)
    w = res.witness
    assert w is not None
    pa = int(np.nonzero(domain.ids == w.pair_ids[0])[0][0])
    pb = int(np.nonzero(domain.ids == w.pair_ids[1])[0][0])
    assert float(domain.dist(pa, pb)) == pytest.approx(w.diameter)
    if w.path_ids is not None:
        assert w.path_ids[0] == w.pair_ids[0]
        assert w.path_ids[-1] == w.pair_ids[1]
        pos = np.array([int(np.nonzero(domain.ids == i)[0][0]) for i in w.path_ids])
        steps = domain.dist_pairs(pos[:-1], pos[1:])
        assert np.all(steps <= 0.5 * (1.0 + REL_TOL))


def test_identity_map_is_one_light(rng):
    for _ in range(10):
        space = random_space(rng, max_n=120)
        if space.coords is None or space.coords.shape[1] > 3:
            continue
        m = identity_map(space)
        dm = space.dist_cross(np.arange(space.n), np.arange(space.n))
        pos = dm[dm > 0]
        if pos.size == 0:
            continue
        r = float(np.quantile(pos, 0.5))
        mode = "grid" if isinstance(space.metric, EuclideanAmbient) else "ball"
        res = ll_constant_at_scale(m, r, windows=mode)
        assert res.C <= 1.0 + 4 * REL_TOL


def test_scale_must_be_positive():
    m = identity_map(_line_space([0.0, 1.0]))
    with pytest.raises(SpecError):
        ll_constant_at_scale(m, 0.0)


def test_threads_do_not_change_results():
    domain = FiniteMetricSpace(
        EuclideanAmbient(), coords=np.random.default_rng(7).normal(size=(300, 2))
    )
    m = projection(domain, axes=[0])
    ladder = ScaleLadder.for_space(domain)
    a = ll_profile(m, ladder=ladder, windows="grid", threads=1)
    b = ll_profile(m, ladder=ladder, windows="grid", threads=4)
    assert np.array_equal(a.C, b.C)
    assert np.array_equal(a.C_upper, b.C_upper)


# ---------------------------------------------------------------------------
# Lipschitz constants
# ---------------------------------------------------------------------------


def test_lipschitz_constant_linear_map():
    domain = _line_space([0.0, 1.0, 2.5, 4.0])
    m = _map_to_values(domain, [0.0, 2.0, 5.0, 8.0])
    est = lipschitz_constant(m)
    assert est.value == pytest.approx(2.0)
    assert est.exact


def test_lipschitz_constant_constant_map():
    est = lipschitz_constant(constant_map(_line_space([0.0, 3.0, 9.0])))
    assert est.value == 0.0


def test_lipschitz_flags_zero_distance_collision():
    domain = _line_space([0.0, 0.0, 1.0])
    m = _map_to_values(domain, [0.0, 5.0, 5.0])
    est = lipschitz_constant(m)
    assert est.zero_distance_violation


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def test_classify_constant_series_bounded():
    scales = np.array([1.0, 0.5, 0.25, 0.125])
    kind, slope, monotone = classify_profile(scales, np.full(4, 3.0))
    assert kind == "bounded"
    assert slope == pytest.approx(0.0, abs=1e-12)
    assert monotone


def test_classify_power_law_diverging():
    scales = np.array([1.0, 0.5, 0.25, 0.125])
    kind, slope, monotone = classify_profile(scales, (1.0 / scales) ** 0.5)
    assert kind == "diverging"
    assert slope == pytest.approx(0.5)
    assert monotone


def test_classify_nonmonotone_growth_inconclusive():
    scales = np.array([1.0, 0.5, 0.25, 0.125])
    kind, _, monotone = classify_profile(scales, np.array([1.0, 4.0, 1.0, 8.0]))
    assert not monotone
    assert kind == "inconclusive"


def test_classify_needs_two_positive_scales():
    kind, slope, monotone = classify_profile(np.array([1.0, 0.5]), np.array([0.0, 2.0]))
    assert kind == "inconclusive" and slope is None and not monotone


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


def test_profile_records_ladder_and_classification():
    X = strip(6, 65)
    m = projection(X, axes=[0])
    prof = ll_profile(m, windows="ball")
    assert prof.scales.shape == prof.C.shape == prof.C_upper.shape
    assert np.all(np.diff(prof.scales) < 0)
    assert prof.classification in {"bounded", "diverging", "inconclusive"}
    assert prof.lightness_constant() >= prof.lipschitz.value
    d = prof.as_dict()
    assert d["windows"] == "ball"
    assert len(d["witnesses"]) == len(prof.scales)


def test_profile_rejects_uncertified_ladder():
    X = word_cantor(2, 6)
    with pytest.raises(SpecError):
        ll_profile(identity_map(X), ladder=ScaleLadder((0.25, 0.03)), windows="ball")
