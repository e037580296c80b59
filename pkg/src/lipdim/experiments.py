"""Named, reproducible claim-check experiments.

Each experiment builds its fixtures from scratch, measures the quantities it
is about, and returns a verdict table: one row per claim with the measured
value, the bound it is checked against, and a pass flag. The CLI ``reproduce``
command and the acceptance test suite both run these functions, so the two
always agree on what was checked.

All fixtures are fully seeded; runtimes are seconds per experiment except
``heisenberg-blowup``, which profiles 42 maps on a ~1.3M point net and is
budgeted at around ten minutes of single-core time.
"""

from __future__ import annotations

from typing import Any, Callable

import numpy as np

from ._config import DEFAULT_KAPPA
from .components import r_components
from .constructions import (
    abs_fold_map,
    cantor_coding_map,
    constant_map,
    projection,
    product_map,
    rescale_map,
    restrict_domain,
    tree_root_map,
    union_map,
)
from .errors import SpecError
from .estimators import (
    box_counting,
    david_semmes_constant,
    nagata_zero_constant,
    porosity_constant,
)
from .generators import (
    carpet,
    gasket,
    harmonic_set,
    interval_net,
    koch,
    middle_cantor,
    strip,
    tree,
    word_cantor,
)
from .lightness import LightnessProfile, lipschitz_constant, ll_constant_at_scale, ll_profile
from .metric import EuclideanAmbient, FiniteMetricSpace, ScaleLadder, rescale

__all__ = ["EXPERIMENTS", "available", "run_experiment"]


Row = dict[str, Any]


def _row(claim: str, measured: float | str, bound: float | str, passed: bool, **extra: Any) -> Row:
    out: Row = {
        "claim": claim,
        "measured": measured,
        "bound": bound,
        "passed": bool(passed),
    }
    out.update(extra)
    return out


def _sup_c(profile: LightnessProfile) -> float:
    return max((float(c) for c in profile.C), default=0.0)


def _c_at(profile: LightnessProfile, r: float) -> float | None:
    """C at the ladder rung matching ``r`` (relative match 1e-9), else None."""
    for s, c in zip(profile.scales, profile.C):
        if abs(float(s) - r) <= 1e-9 * max(abs(r), 1.0):
            return float(c)
    return None


# ---------------------------------------------------------------------------
# Window-definition variant (strip fixture)
# ---------------------------------------------------------------------------


def definition_variant() -> list[Row]:
    """Projection of the sheeted strip: per-window-diameter checks pass while
    the whole-codomain check at r = 2 connects the sheets."""
    X = strip(sheets=6, net_n=65)
    f = projection(X, axes=[0], name="strip_x")
    per_window = ll_profile(f, windows="diam", want_paths=False)
    rows = [
        _row(
            "strip projection: window-diameter-scaled checks give C = 1 at every scale",
            _sup_c(per_window),
            1.0 + 1e-9,
            _sup_c(per_window) <= 1.0 + 1e-9,
        )
    ]
    whole = ll_constant_at_scale(f, 2.0, windows="ball", want_path=False)
    comp_diam = float(whole.witness.diameter) if whole.witness else 0.0
    rows.append(
        _row(
            "strip projection: whole-codomain window at r = 2 has component diameter >= 4",
            comp_diam,
            4.0,
            comp_diam >= 4.0,
        )
    )
    part = r_components(X, 2.0)
    rows.append(
        _row(
            "strip domain is a single 2-component (sheets connect at r = 2)",
            int(part.n_components),
            1,
            part.n_components == 1,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# Product / union / rescale bounds
# ---------------------------------------------------------------------------


def _product_pairs():
    yield "cantor6 x interval65", projection(middle_cantor(1 / 3, 6), axes=[0]), projection(
        interval_net(65, 1.0), axes=[0]
    )
    yield "koch3.x x interval33", projection(koch(3), axes=[0]), projection(
        interval_net(33, 1.0), axes=[0]
    )
    yield "cantor5 x cantor5", projection(middle_cantor(1 / 3, 5), axes=[0]), projection(
        middle_cantor(1 / 3, 5), axes=[0]
    )
    yield "interval33 x koch3.y", projection(interval_net(33, 1.0), axes=[0]), projection(
        koch(3), axes=[1]
    )
    yield "harmonic200 x interval33", projection(harmonic_set(200), axes=[0]), projection(
        interval_net(33, 1.0), axes=[0]
    )


def product_bound() -> list[Row]:
    """C of (f, g) on the sup-product never exceeds max of the factors' C."""
    rows = []
    for label, f, g in _product_pairs():
        F = product_map(f, g)
        pf = ll_profile(f, want_paths=False)
        pg = ll_profile(g, want_paths=False)
        pF = ll_profile(F, want_paths=False)
        worst = 0.0
        for r, cF in zip(pF.scales, pF.C):
            cf = _c_at(pf, float(r))
            cg = _c_at(pg, float(r))
            best_in = max(v for v in (cf, cg) if v is not None) if (cf or cg) else None
            if best_in is None or best_in <= 0.0:
                continue
            worst = max(worst, float(cF) / best_in)
        rows.append(
            _row(
                f"product map on {label}: C_F(r) <= 1.1 * max(C_f(r), C_g(r))",
                worst,
                1.1,
                worst <= 1.1,
            )
        )
    return rows


def union_bound() -> list[Row]:
    """Gluing two partial maps costs at most (C + 2)^2 in the constant."""
    fixtures = [
        ("interval129", interval_net(129, 1.0)),
        ("koch4", koch(4)),
        ("cantor6", middle_cantor(1 / 3, 6)),
    ]
    rows = []
    for label, X in fixtures:
        x = X.coords[:, 0]
        part_a = np.flatnonzero(x <= 0.5 + 1e-12)
        part_b = np.flatnonzero(x >= 0.5 - 1e-12)
        base = projection(X, axes=[0])
        C_in = max(
            ll_profile(restrict_domain(base, part_a), want_paths=False).lightness_constant(),
            ll_profile(restrict_domain(base, part_b), want_paths=False).lightness_constant(),
        )
        F = union_map(X, part_a, x[part_a], part_b, x[part_b], name=f"union_{label}")
        sup_F = _sup_c(ll_profile(F, want_paths=False))
        bound = (C_in + 2.0) ** 2
        rows.append(
            _row(
                f"glued map on {label}: sup C_F <= (C_in + 2)^2 with C_in = {C_in:.4g}",
                sup_F,
                bound,
                sup_F <= bound + 1e-12,
            )
        )
    return rows


def _rescale_fixture_maps():
    yield "koch4.x", projection(koch(4), axes=[0])
    yield "strip.x", projection(strip(sheets=6, net_n=65), axes=[0])
    yield "tree300.root", tree_root_map(tree("random", 300, seed=3))
    yield "words.const", constant_map(word_cantor(2, 6))
    yield "carpet3.diag", projection(
        carpet(3, 3), direction=np.array([1.0, np.sqrt(2.0)]), onto="complement"
    )


def rescale_invariance() -> list[Row]:
    """Simultaneous domain/codomain rescale by powers of two reproduces the
    profile bit-for-bit at the rescaled rungs."""
    rows = []
    for label, m in _rescale_fixture_maps():
        base = ll_profile(m, want_paths=False)
        for lam in (0.25, 4.0):
            scaled = ll_profile(
                rescale_map(m, lam), ladder=base.ladder.rescaled(lam), want_paths=False
            )
            same = np.array_equal(np.asarray(base.C), np.asarray(scaled.C))
            rows.append(
                _row(
                    f"{label}: C identical under rescale by {lam:g}",
                    "bitwise equal" if same else "mismatch",
                    "bitwise equal",
                    same,
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------


def tree_map() -> list[Row]:
    """Distance-to-root on random trees stays uniformly bounded; on a path
    it is an isometry up to sampling slack."""
    rows = []
    path = tree("path", 64)
    sup_path = _sup_c(ll_profile(tree_root_map(path), want_paths=False))
    rows.append(
        _row("path graph: root-distance map has sup C <= 1.1", sup_path, 1.1, sup_path <= 1.1)
    )
    sizes = [500] * 8 + [2000, 2000]
    for seed, n in enumerate(sizes):
        T = tree("random", n, seed=seed)
        sup_c = _sup_c(ll_profile(tree_root_map(T), want_paths=False))
        rows.append(
            _row(
                f"random tree (n={n}, seed={seed}): root-distance map has sup C <= 6",
                sup_c,
                6.0,
                sup_c <= 6.0,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Koch curve
# ---------------------------------------------------------------------------


def koch_projection() -> list[Row]:
    """Coordinate projections of the gen-5 curve are uniformly light over at
    least three octaves; the constant map diverges."""
    K = koch(5)
    rows = []
    for axis, label in ((0, "x"), (1, "y")):
        p = ll_profile(projection(K, axes=[axis]), want_paths=False)
        octaves = len(p.scales) - 1
        sup_c = _sup_c(p)
        rows.append(
            _row(
                f"koch gen-5 {label}-projection: sup C <= 25 over >= 3 octaves",
                sup_c,
                25.0,
                sup_c <= 25.0 and octaves >= 3,
                octaves=octaves,
            )
        )
    pc = ll_profile(constant_map(K), want_paths=False)
    slope = float(pc.slope) if pc.slope is not None else 0.0
    rows.append(
        _row(
            "koch gen-5 constant map: log-log slope >= 0.5 (diverging)",
            slope,
            0.5,
            slope >= 0.5 and pc.classification == "diverging",
        )
    )
    return rows


# ---------------------------------------------------------------------------
# Heisenberg net
# ---------------------------------------------------------------------------

_FIXED_DIRECTIONS: tuple[tuple[float, float, float], ...] = (
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (1.0, 1.0, 0.0),
    (1.0, -1.0, 0.0),
    (1.0, 0.0, 1.0),
    (0.0, 1.0, 1.0),
    (1.0, 1.0, 1.0),
    (1.0, 0.0, -1.0),
    (0.0, 1.0, -1.0),
    (2.0, 1.0, 0.0),
    (1.0, 2.0, 2.0),
)


def _heisenberg_directions(seed: int = 0) -> list[np.ndarray]:
    dirs = [np.asarray(v, dtype=float) for v in _FIXED_DIRECTIONS]
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(8, 3))
    dirs.extend(raw / np.linalg.norm(raw, axis=1, keepdims=True))
    return dirs


def heisenberg_blowup(eps: float = 1.0 / 32.0) -> list[Row]:
    """Every linear projection to R^k, k <= 3, diverges on the gauge net, and
    the horizontal projection's finest witness is a vertical chain."""
    from .generators import heisenberg_net

    H = heisenberg_net(1.0, eps)
    rows: list[Row] = []

    def check(m: Any, label: str, want_paths: bool = False) -> LightnessProfile:
        p = ll_profile(m, want_paths=want_paths)
        slope = float(p.slope) if p.slope is not None else 0.0
        rows.append(
            _row(
                f"heisenberg {label}: profile diverges with slope >= 0.3",
                slope,
                0.3,
                slope >= 0.3 and p.classification == "diverging",
            )
        )
        return p

    check(constant_map(H), "constant (k=0)")
    horizontal = check(projection(H, axes=[0, 1], name="horizontal"), "horizontal xy (k=2)", True)
    check(projection(H, axes=[0, 1, 2]), "full coordinates (k=3)")
    for i, d in enumerate(_heisenberg_directions()):
        tag = f"dir{i}=({d[0]:.3g},{d[1]:.3g},{d[2]:.3g})"
        check(projection(H, direction=d, onto="line"), f"line along {tag} (k=1)")
        if i == 2:
            continue  # complement of the t-axis is the horizontal map, done above
        check(projection(H, direction=d, onto="complement"), f"plane orthogonal to {tag} (k=2)")

    finest = horizontal.witnesses[-1] if horizontal.witnesses else None
    if finest is None or finest.path_ids is None:
        rows.append(
            _row("heisenberg horizontal: finest witness has a path", "missing", "present", False)
        )
        return rows
    path = H.coords[H.positions_of(np.asarray(finest.path_ids))]
    xy_spread = float(
        max(path[:, 0].max() - path[:, 0].min(), path[:, 1].max() - path[:, 1].min())
    )
    t_spread = float(path[:, 2].max() - path[:, 2].min())
    rows.append(
        _row(
            "heisenberg horizontal witness path: xy-spread <= 2*eps (vertical chain)",
            xy_spread,
            2.0 * eps * (1.0 + 1e-9),
            xy_spread <= 2.0 * eps * (1.0 + 1e-9),
        )
    )
    rows.append(
        _row(
            "heisenberg horizontal witness path: t-spread >= 0.4 (vertical chain)",
            t_spread,
            0.4,
            t_spread >= 0.4,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# Porosity and dimension zero on the line
# ---------------------------------------------------------------------------


def porosity_dimension_zero() -> list[Row]:
    """Porosity and the zero-dimension constant agree on line fixtures."""
    rows = []
    C7 = middle_cantor(1 / 3, 7)
    por = porosity_constant(C7)
    rows.append(
        _row(
            "cantor depth-7: porosity constant >= 0.1",
            float(por.estimate or 0.0),
            0.1,
            (por.estimate or 0.0) >= 0.1 and por.verdict == "porous",
        )
    )
    nag = nagata_zero_constant(C7)
    sup_c = max(nag.values) if nag.values else float("inf")
    rows.append(
        _row(
            "cantor depth-7: zero-dimension constant sup c <= 3",
            float(sup_c),
            3.0,
            sup_c <= 3.0 and nag.verdict == "dimension-zero",
        )
    )
    Hn = harmonic_set(10_000)
    por_h = porosity_constant(Hn)
    rows.append(
        _row(
            "harmonic set: porosity verdict is 'not porous'",
            por_h.verdict,
            "not porous",
            por_h.verdict == "not porous",
        )
    )
    pc = ll_profile(constant_map(Hn), want_paths=False)
    slope = float(pc.slope) if pc.slope is not None else 0.0
    rows.append(
        _row(
            "harmonic set: constant-map slope = 0.5 +/- 0.15 (diverging)",
            slope,
            "[0.35, 0.65]",
            0.35 <= slope <= 0.65 and pc.classification == "diverging",
        )
    )
    return rows


# ---------------------------------------------------------------------------
# Carpet / gasket projections
# ---------------------------------------------------------------------------


def _envelope_rows(
    label: str,
    fine: LightnessProfile,
    coarse: list[LightnessProfile],
    headroom: float = 1.5,
    min_shared: int = 3,
    what: str = "coarser-generation envelope",
) -> Row:
    """Per-scale comparison of one profile against the max of reference
    profiles, at the rungs they share. ``min_shared`` guards against the
    comparison being vacuous; it is the number of rungs the reference ladders
    can certify."""
    worst = 0.0
    shared = 0
    for r, c in zip(fine.scales, fine.C):
        env = [v for p in coarse if (v := _c_at(p, float(r))) is not None]
        if not env or max(env) <= 0.0:
            continue
        shared += 1
        worst = max(worst, float(c) / max(env))
    return _row(
        f"{label}: per-scale C within {headroom:g}x the {what}",
        worst,
        headroom,
        shared >= min_shared and worst <= headroom,
        shared_rungs=shared,
    )


def carpet_projection() -> list[Row]:
    """Coordinate projection of the carpet diverges along its vertical
    boundary segments; the projection orthogonal to (1, sqrt 2) stays within
    the coarser-generation envelope."""
    rows = []
    S4 = carpet(3, 4)
    px = ll_profile(projection(S4, axes=[0], name="carpet_x"), want_paths=False)
    slope = float(px.slope) if px.slope is not None else 0.0
    rows.append(
        _row(
            "carpet gen-4 x-projection: diverging with slope >= 0.3",
            slope,
            0.3,
            slope >= 0.3 and px.classification == "diverging",
        )
    )
    finest = px.witnesses[-1] if px.witnesses else None
    if finest is not None:
        pair = S4.coords[S4.positions_of(np.asarray(finest.pair_ids))]
        y_spread = float(abs(pair[0, 1] - pair[1, 1]))
        x_spread = float(abs(pair[0, 0] - pair[1, 0]))
        r_fine = float(px.scales[-1])
        rows.append(
            _row(
                "carpet gen-4 x-projection witness: vertical boundary pair "
                "(y-spread >= 0.9, x-spread <= 1.5 r)",
                f"dy={y_spread:.4g}, dx={x_spread:.4g}",
                f"dy>=0.9, dx<={1.5 * r_fine:.4g}",
                y_spread >= 0.9 and x_spread <= 1.5 * r_fine,
            )
        )
    direction = np.array([1.0, np.sqrt(2.0)])
    profs = {
        g: ll_profile(
            projection(carpet(3, g), direction=direction, onto="complement"),
            want_paths=False,
        )
        for g in (2, 3, 4)
    }
    rows.append(_envelope_rows("carpet irrational-direction projection gen-4", profs[4], [profs[2], profs[3]]))
    return rows


def gasket_projection() -> list[Row]:
    """Horizontal projection of the gasket stays within the coarser envelope
    and is already stable against one generation finer."""
    profs = {
        g: ll_profile(projection(gasket(g), axes=[0], name=f"gasket{g}_x"), want_paths=False)
        for g in (3, 4, 5, 6)
    }
    # The gen-3/gen-4 ladders certify only two rungs above their floors, so
    # two shared rungs is everything the coarse references can offer.
    rows = [
        _envelope_rows(
            "gasket horizontal projection gen-5",
            profs[5],
            [profs[3], profs[4]],
            min_shared=2,
        ),
        _envelope_rows(
            "gasket horizontal projection gen-5",
            profs[5],
            [profs[6]],
            min_shared=3,
            what="one-generation-finer values at the same rungs",
        ),
    ]
    return rows


# ---------------------------------------------------------------------------
# Word-coding of doubling targets
# ---------------------------------------------------------------------------


def _coding_targets() -> list[tuple[str, FiniteMetricSpace]]:
    rng = np.random.default_rng(0)
    cloud = FiniteMetricSpace(
        EuclideanAmbient(),
        coords=rng.random((500, 2)),
        resolution=1e-3,
        meta={"name": "cloud500"},
    )
    return [
        ("carpet gen-3", carpet(3, 3)),
        ("cantor depth-6", middle_cantor(1 / 3, 6)),
        ("random cloud 500", cloud),
    ]


def cantor_coding(depth: int = 5) -> list[Row]:
    """Word-space coding of doubling targets: stretch factor, exact image,
    source regularity, and profile boundedness.

    The stretch-factor row checks the 4x claim as stated; the measured value
    on these fixtures sits between 5 and 7 (see the witnesses recorded in the
    row), so this row is expected to fail while the attainable 8x bound holds.
    """
    rows = []
    for label, target in _coding_targets():
        diam = target.diameter()
        Y = rescale(target, 1.0 / diam) if abs(diam - 1.0) > 1e-9 else target
        m = cantor_coding_map(Y, depth)
        lip = float(lipschitz_constant(m).value)
        rows.append(
            _row(
                f"coding of {label}: stretch d_Y(h a, h b) <= 4 * d(a, b)",
                lip,
                4.0,
                lip <= 4.0 + 1e-9,
                attainable_bound=8.0,
            )
        )
        rows.append(
            _row(
                f"coding of {label}: stretch within the attainable 8x bound",
                lip,
                8.0,
                lip <= 8.0 + 1e-9,
            )
        )
        finest_net = m.meta["nets"][-1]
        image_ok = bool(
            np.array_equal(np.unique(m.pairing), np.unique(np.asarray(finest_net)))
        )
        rows.append(
            _row(
                f"coding of {label}: image equals the depth-{depth} net exactly",
                "exact" if image_ok else "mismatch",
                "exact",
                image_ok,
            )
        )
        nag = nagata_zero_constant(m.domain)
        sup_c = max(nag.values) if nag.values else float("inf")
        rows.append(
            _row(
                f"coding of {label}: source word space has sup c = 1 exactly",
                float(sup_c),
                1.0,
                abs(sup_c - 1.0) <= 1e-12,
            )
        )
        prof = ll_profile(m, want_paths=False)
        rows.append(
            _row(
                f"coding of {label}: profile bounded (sup C = {_sup_c(prof):.4g})",
                prof.classification,
                "bounded",
                prof.classification == "bounded",
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Regular folding map
# ---------------------------------------------------------------------------


def david_semmes() -> list[Row]:
    """|x| on a symmetric net: regularity constant 2, profile within 4 C^2."""
    coords = np.linspace(-1.0, 1.0, 257)
    X = FiniteMetricSpace(
        EuclideanAmbient(),
        coords=coords[:, None],
        resolution=2.0 / 256.0,
        meta={"name": "symmetric_net"},
    )
    m = abs_fold_map(X)
    ds = david_semmes_constant(m)
    C = float(ds.estimate or np.inf)
    rows = [
        _row("fold map |x|: regularity constant C <= 2", C, 2.0, C <= 2.0),
    ]
    prof = ll_profile(m, want_paths=False)
    sup_c = _sup_c(prof)
    rows.append(
        _row(
            "fold map |x|: sup C over certified scales <= 4 C^2 = 16",
            sup_c,
            16.0,
            sup_c <= 16.0,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# Box-counting estimates
# ---------------------------------------------------------------------------


def box_counting_estimates() -> list[Row]:
    # The carpet gets a ladder in powers of its own subdivision ratio: dyadic
    # boxes straddle the ternary cell walls and bias the slope low.
    ternary = ScaleLadder(tuple(3.0 ** (-k) for k in (1, 2, 3)), ratio=1.0 / 3.0)
    fixtures = [
        ("interval net", interval_net(1025, 1.0), None, 1.0),
        (
            "carpet (centers)",
            carpet(3, 5, sampling="centers"),
            ternary,
            np.log(8.0) / np.log(3.0),
        ),
        ("koch gen-5", koch(5), None, np.log(4.0) / np.log(3.0)),
    ]
    rows = []
    for label, X, ladder, expect in fixtures:
        rep = box_counting(X, ladder=ladder)
        est = float(rep.estimate or 0.0)
        rows.append(
            _row(
                f"box-counting dimension of {label} = {expect:.4g} +/- 0.1",
                est,
                f"[{expect - 0.1:.4g}, {expect + 0.1:.4g}]",
                abs(est - expect) <= 0.1,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


EXPERIMENTS: dict[str, Callable[[], list[Row]]] = {
    "definition-variant": definition_variant,
    "product-bound": product_bound,
    "union-bound": union_bound,
    "rescale-invariance": rescale_invariance,
    "tree-map": tree_map,
    "koch-projection": koch_projection,
    "heisenberg-blowup": heisenberg_blowup,
    "porosity-dimension-zero": porosity_dimension_zero,
    "carpet-projection": carpet_projection,
    "gasket-projection": gasket_projection,
    "cantor-coding": cantor_coding,
    "david-semmes": david_semmes,
    "box-counting": box_counting_estimates,
}


def available() -> list[str]:
    return sorted(EXPERIMENTS)


def run_experiment(name: str) -> dict[str, Any]:
    """Run one named experiment and return its verdict table."""
    fn = EXPERIMENTS.get(name)
    if fn is None:
        raise SpecError(
            f"unknown experiment {name!r}; available: {', '.join(available())}"
        )
    rows = fn()
    return {"experiment": name, "rows": rows, "passed": all(r["passed"] for r in rows)}
