"""Dimension and regularity estimators on finite samples.

Each estimator reports raw per-scale values alongside its point estimate, only
over the certified scale range of the supplied ladder (scales well above the
sampling resolution). Verdict strings are deliberately coarse — ``bounded`` /
``diverging`` trends and threshold checks — mirroring what finite data can
certify.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.spatial import cKDTree

from ._config import (
    DEFAULT_KAPPA,
    DS_MAX_COVER,
    POROSITY_KAPPA,
    POROSITY_THRESHOLD,
    REL_TOL,
)
from .components import r_components
from .constructions import constant_map, identity_map, projection
from .errors import SpecError
from .lightness import LightnessProfile, SampledMap, classify_profile, ll_profile
from .metric import EuclideanAmbient, FiniteMetricSpace, ScaleLadder, eps_net

__all__ = [
    "DimensionReport",
    "box_counting",
    "nagata_zero_constant",
    "porosity_constant",
    "self_covering_check",
    "david_semmes_constant",
    "assouad_estimate",
    "lipdim_upper_search",
]


@dataclass(frozen=True)
class DimensionReport:
    """Per-scale raw values plus the derived point estimate for one estimator."""

    kind: str
    scales: tuple[float, ...]
    values: tuple[float, ...]
    estimate: float | None
    verdict: str
    notes: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "scales": list(self.scales),
            "values": list(self.values),
            "estimate": self.estimate,
            "verdict": self.verdict,
            "notes": {
                k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.notes.items()
            },
        }


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    coeff = np.polyfit(x, y, 1)
    return float(coeff[0])


# ---------------------------------------------------------------------------
# Box counting
# ---------------------------------------------------------------------------


def box_counting(space: FiniteMetricSpace, ladder: ScaleLadder | None = None) -> DimensionReport:
    """Grid-cell occupancy counts per scale and their log-log slope."""
    if space.coords is None:
        raise SpecError("box counting requires ambient coordinates")
    if ladder is None:
        ladder = ScaleLadder.for_space(space)
    lo = space.coords.min(axis=0)
    counts = []
    for r in ladder.r_values:
        cells = np.floor((space.coords - lo) / r).astype(np.int64)
        counts.append(int(np.unique(cells, axis=0).shape[0]))
    counts_arr = np.asarray(counts, dtype=float)
    slope = _fit_slope(np.log(1.0 / np.asarray(ladder.r_values)), np.log(counts_arr))
    return DimensionReport(
        kind="box_counting",
        scales=tuple(ladder.r_values),
        values=tuple(counts_arr),
        estimate=slope,
        verdict=f"dimension ~ {slope:.3f}",
        notes={"counts": counts},
    )


# ---------------------------------------------------------------------------
# Component-size regularity (dimension zero)
# ---------------------------------------------------------------------------


def nagata_zero_constant(
    space: FiniteMetricSpace, ladder: ScaleLadder | None = None
) -> DimensionReport:
    """c(s) = (largest s-component diameter) / s, per certified scale.

    A bounded trend certifies the zero-dimensional regularity property; the
    degenerate single-component case makes c(s) = diam/s diverge.
    """
    if ladder is None:
        ladder = ScaleLadder.for_space(space)
    ladder.validate_for(space)
    values = []
    uppers = []
    approx = []
    for s in ladder.r_values:
        part = r_components(space, s)
        values.append(part.max_diameter() / s)
        uppers.append(float(part.diam_upper.max() / s) if part.diam_upper.size else 0.0)
        approx.append(bool(part.approx_mask.any()))
    scales = np.asarray(ladder.r_values)
    vals = np.asarray(values)
    classification, slope, monotone = classify_profile(scales, vals)
    verdict = "dimension-zero" if classification == "bounded" else (
        "not-dimension-zero" if classification == "diverging" else "inconclusive"
    )
    return DimensionReport(
        kind="nagata_zero",
        scales=tuple(scales),
        values=tuple(vals),
        estimate=float(vals.max()),
        verdict=verdict,
        notes={
            "classification": classification,
            "slope": slope,
            "monotone_trend": monotone,
            "upper_values": uppers,
            "approx": approx,
        },
    )


# ---------------------------------------------------------------------------
# Porosity on the line
# ---------------------------------------------------------------------------


def _gap_sparse_table(values: np.ndarray) -> list[np.ndarray]:
    """Sparse table for O(1) range-max queries over ``values``."""
    table = [values]
    j = 1
    while (1 << j) <= values.size:
        prev = table[-1]
        half = 1 << (j - 1)
        table.append(np.maximum(prev[: prev.size - half], prev[half:]))
        j += 1
    return table


def _range_max(table: list[np.ndarray], a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized max over half-open index ranges [a, b); empty ranges give -inf."""
    length = b - a
    out = np.full(a.shape, -np.inf)
    ok = length > 0
    if not ok.any():
        return out
    k = np.floor(np.log2(length[ok])).astype(np.intp)
    left = a[ok]
    right = b[ok] - (1 << k)
    flat_k = k
    vals = np.empty(left.shape)
    for kk in np.unique(flat_k):
        sel = flat_k == kk
        tab = table[kk]
        vals[sel] = np.maximum(tab[left[sel]], tab[right[sel]])
    out[ok] = vals
    return out


def porosity_constant(
    space: FiniteMetricSpace,
    ladder: ScaleLadder | None = None,
    delta: float | None = None,
) -> DimensionReport:
    """Worst-center hole ratio per scale for a finite subset of the line.

    For each sample point x and certified scale r, finds the largest open
    subinterval of (x-r, x+r) — clipped to the sample's hull — that avoids the
    closed delta-neighborhood of the sample, divided by r. Reports the infimum
    over centers per scale and the global infimum; the set is judged porous
    when the global infimum stays at or above the threshold.
    """
    if space.coords is None or space.ndim != 1 or not isinstance(space.metric, EuclideanAmbient):
        raise SpecError("porosity scan requires a 1-D Euclidean sample")
    if delta is None:
        delta = space.resolution
    if delta is None or delta <= 0:
        raise SpecError("porosity scan needs a positive resolution delta")
    if ladder is None:
        ladder = ScaleLadder.for_space(space, kappa=POROSITY_KAPPA)
    xs = np.sort(space.coords[:, 0])
    lo, hi = float(xs[0]), float(xs[-1])
    gaps = xs[1:] - xs[:-1] - 2.0 * delta
    table = _gap_sparse_table(gaps) if gaps.size else []
    per_scale = []
    for r in ladder.r_values:
        wl = np.maximum(xs - r, lo)
        wr = np.minimum(xs + r, hi)
        a = np.searchsorted(xs, wl, side="left")
        b = np.searchsorted(xs, wr, side="right")
        internal = (
            _range_max(table, a, np.maximum(b - 1, a)) if table else np.full(xs.shape, -np.inf)
        )
        edge_l = xs[a] - delta - wl
        edge_r = wr - (xs[b - 1] + delta)
        hole = np.maximum(np.maximum(internal, edge_l), edge_r)
        hole = np.maximum(hole, 0.0)
        per_scale.append(float((hole / r).min()))
    global_inf = min(per_scale) if per_scale else 0.0
    porous = global_inf >= POROSITY_THRESHOLD
    return DimensionReport(
        kind="porosity",
        scales=tuple(ladder.r_values),
        values=tuple(per_scale),
        estimate=global_inf,
        verdict="porous" if porous else "not porous",
        notes={"delta": delta, "threshold": POROSITY_THRESHOLD},
    )


# ---------------------------------------------------------------------------
# Self-covering by rescaled translates
# ---------------------------------------------------------------------------


def self_covering_check(
    space: FiniteMetricSpace,
    decomposition: list[tuple[float, np.ndarray]],
    samples: list[tuple[int, float]],
    tol: float | None = None,
) -> DimensionReport:
    """Verify that sampled balls are covered by rescaled translates of the set.

    ``decomposition`` lists pieces as (scale s, translate v) with s*K + v a
    subset of K; pieces are grouped by scale. For a sampled ball B(x, r) the
    finest scale >= r is selected (coarsest available otherwise); the pieces of
    that scale whose bounding boxes meet the ball must cover every sample point
    of the ball to within ``tol``. Reports the achieved piece count N and
    diameter factor C = s * diam(K) / r (worst case over samples).
    """
    if space.coords is None:
        raise SpecError("self-covering check requires ambient coordinates")
    if not decomposition:
        raise SpecError("decomposition must contain at least one piece")
    if tol is None:
        tol = max(1e-12, (space.resolution or 0.0) * 1e-6)
    coords = space.coords
    tree = cKDTree(coords)
    diam = space.diameter()
    by_scale: dict[float, list[np.ndarray]] = {}
    for s, v in decomposition:
        by_scale.setdefault(float(s), []).append(np.asarray(v, dtype=float))
    scales_sorted = sorted(by_scale)  # ascending: finest first
    achieved_n = 0
    achieved_c = 0.0
    failures: list[dict[str, Any]] = []
    per_sample = []
    for pos, r in samples:
        center = coords[pos]
        cands = [s for s in scales_sorted if s >= r]
        s_sel = cands[0] if cands else scales_sorted[-1]
        pieces = by_scale[s_sel]
        ball = np.nonzero(np.linalg.norm(coords - center, axis=1) <= r * (1.0 + REL_TOL))[0]
        used = []
        for v in pieces:
            clipped = np.clip(center, v, v + s_sel)
            if float(np.linalg.norm(center - clipped)) <= r * (1.0 + REL_TOL):
                used.append(v)
        covered = np.zeros(ball.size, dtype=bool)
        for v in used:
            rescaled = (coords[ball] - v) / s_sel
            dists, _ = tree.query(rescaled)
            covered |= dists * s_sel <= tol
        n_used = len(used)
        c_here = s_sel * diam / r
        per_sample.append({"pos": int(pos), "r": float(r), "N": n_used, "C": c_here})
        if not covered.all():
            failures.append(
                {
                    "pos": int(pos),
                    "r": float(r),
                    "uncovered_ids": space.ids[ball[~covered]].tolist(),
                }
            )
        else:
            achieved_n = max(achieved_n, n_used)
            achieved_c = max(achieved_c, c_here)
    passed = not failures
    return DimensionReport(
        kind="self_covering",
        scales=tuple(float(r) for _, r in samples),
        values=tuple(float(d["N"]) for d in per_sample),
        estimate=float(achieved_n) if passed else None,
        verdict="self-covering" if passed else "coverage failure",
        notes={
            "achieved_N": achieved_n,
            "achieved_C": achieved_c,
            "per_sample": per_sample,
            "failures": failures,
            "tol": tol,
        },
    )


# ---------------------------------------------------------------------------
# Regular-map constant (ball preimages covered by few balls)
# ---------------------------------------------------------------------------


def david_semmes_constant(
    m: SampledMap, ladder: ScaleLadder | None = None, max_cover: int = DS_MAX_COVER
) -> DimensionReport:
    """Smallest k such that every radius-r ball preimage is covered by k balls
    of radius k*r, scanned exhaustively over image points and ladder scales."""
    if ladder is None:
        ladder = ScaleLadder.for_space(m.domain)
    dom, cod = m.domain, m.codomain
    image_points = np.unique(m.pairing)
    stride = max(1, int(math.ceil(image_points.size / 4000)))
    image_points = image_points[::stride]
    per_scale = []
    for r in ladder.r_values:
        worst = 0
        for y in image_points:
            dcod = cod.dist_one_to_many(int(y))
            pre = np.nonzero(dcod[m.pairing] <= r * (1.0 + REL_TOL))[0]
            if pre.size == 0:
                continue
            sub = dom.subset(pre)
            k_found = max_cover + 1
            for k in range(1, max_cover + 1):
                net = eps_net(sub, k * r * (1.0 + REL_TOL))
                if len(net) <= k:
                    k_found = k
                    break
            worst = max(worst, k_found)
        per_scale.append(float(worst))
    estimate = max(per_scale) if per_scale else 0.0
    return DimensionReport(
        kind="david_semmes",
        scales=tuple(ladder.r_values),
        values=tuple(per_scale),
        estimate=estimate,
        verdict=f"regular with C = {estimate:g}" if estimate <= max_cover else "no small cover",
        notes={"max_cover": max_cover},
    )


# ---------------------------------------------------------------------------
# Two-scale covering scan (uniform dimension estimate)
# ---------------------------------------------------------------------------


def assouad_estimate(
    space: FiniteMetricSpace,
    ladder: ScaleLadder | None = None,
    max_centers: int = 32,
) -> DimensionReport:
    """Supremal two-scale covering slope: windows of radius R need N(R, eps*R)
    eps-scaled net points; the estimate is the sup of log N / log(1/eps) over
    certified scale pairs at least two rungs apart."""
    if ladder is None:
        ladder = ScaleLadder.for_space(space)
    rs = ladder.r_values
    centers = eps_net(space, rs[0])[:max_centers]
    best = 0.0
    pairs = []
    for i, big in enumerate(rs):
        for j in range(i + 2, len(rs)):
            small = rs[j]
            worst_n = 0
            for c in centers:
                dc = space.dist_one_to_many(c)
                members = np.nonzero(dc <= big * (1.0 + REL_TOL))[0]
                if members.size < 2:
                    continue
                sub = space.subset(members)
                worst_n = max(worst_n, len(eps_net(sub, small)))
            if worst_n >= 2:
                slope = math.log(worst_n) / math.log(big / small)
                pairs.append({"R": big, "r": small, "N": worst_n, "slope": slope})
                best = max(best, slope)
    return DimensionReport(
        kind="assouad_two_scale",
        scales=tuple(rs),
        values=tuple(p["slope"] for p in pairs),
        estimate=best,
        verdict=f"dimension <= ~ {best:.3f}",
        notes={"pairs": pairs, "n_centers": len(centers)},
    )


# ---------------------------------------------------------------------------
# Heuristic search for a bounded-profile projection certificate
# ---------------------------------------------------------------------------


def lipdim_upper_search(
    space: FiniteMetricSpace,
    directions: list[np.ndarray] | None = None,
    ladder: ScaleLadder | None = None,
    windows: str | None = None,
    threads: int = 1,
    kappa: float = DEFAULT_KAPPA,
) -> dict[str, Any]:
    """Search k = 0..n for a linear map to R^k with a bounded profile.

    k = 0 tries the constant map; k = 1 tries every coordinate axis and every
    supplied direction (as a scalar product); k = n-1 additionally tries the
    orthogonal complement of each supplied direction; k = n is the identity.
    The report lists, per k, each candidate's classification and worst C, and
    names the smallest k with a bounded candidate (or ``no certificate``).
    """
    candidates: dict[int, list[SampledMap]] = {0: [constant_map(space)]}
    ndim = space.ndim if space.coords is not None else 0
    if ndim >= 1:
        k1 = []
        for axis in range(ndim):
            e = np.zeros(ndim)
            e[axis] = 1.0
            k1.append(projection(space, direction=e, onto="line", name=f"axis{axis}"))
        for idx, v in enumerate(directions or []):
            k1.append(projection(space, direction=np.asarray(v, dtype=float), onto="line",
                                 name=f"dir{idx}_line"))
        candidates[1] = k1
        for k in range(2, ndim):
            maps = [
                projection(space, axes=list(combo), name=f"axes{''.join(map(str, combo))}")
                for combo in itertools.combinations(range(ndim), k)
            ]
            if k == ndim - 1:
                for idx, v in enumerate(directions or []):
                    maps.append(
                        projection(space, direction=np.asarray(v, dtype=float),
                                   onto="complement", name=f"dir{idx}_complement")
                    )
            candidates[k] = maps
        if isinstance(space.metric, EuclideanAmbient):
            candidates[ndim] = [identity_map(space)]
        else:
            # Target of the search is R^k with its own metric, so on exotic
            # ambient coordinates the top candidate is the coordinate chart,
            # not the identity into the original metric.
            candidates[ndim] = [projection(space, axes=list(range(ndim)), name="all_axes")]
    evidence: dict[int, list[dict[str, Any]]] = {}
    estimate: int | None = None
    for k in sorted(candidates):
        rows = []
        found = False
        for m in candidates[k]:
            prof: LightnessProfile = ll_profile(
                m, ladder=ladder, windows=windows, threads=threads, kappa=kappa
            )
            rows.append(
                {
                    "map": m.name,
                    "classification": prof.classification,
                    "sup_C": max(prof.C) if len(prof.C) else 0.0,
                    "slope": prof.slope,
                }
            )
            if prof.classification == "bounded":
                found = True
        evidence[k] = rows
        if found and estimate is None:
            estimate = k
    return {
        "estimate": estimate,
        "verdict": f"dim_L <= {estimate} (heuristic)" if estimate is not None else "no certificate",
        "evidence": evidence,
    }
