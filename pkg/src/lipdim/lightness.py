"""Lipschitz-light diagnostics: window families, per-scale constants, profiles.

For a sampled map f between finite metric spaces, the scale-r lightness
constant is::

    C(r) = max over windows W (diam W <= r) of
           max over r-components P of the preimage of W of  diam(P) / r

A map is Lipschitz-light with constant C when both its Lipschitz constant and
every C(r) stay below C across scales. Window families:

- ``ball``: closed balls of radius r/2 centered at image points;
- ``grid``: axis-aligned cells of diameter exactly r in two half-offset
  lattices (Euclidean or sup-product-of-Euclidean codomains);
- ``diam``: ball windows, but each window is evaluated at scale equal to the
  exact diameter of its image points — the alternative definition variant,
  exposed for comparison experiments.

Profiles evaluate C(r) along a certified scale ladder, record the global
Lipschitz constant, an extremal witness per scale, and classify the series as
bounded / diverging / inconclusive from the least-squares slope of log C
against log(1/r).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from ._config import (
    BOUNDED_SLOPE,
    DIVERGING_SLOPE,
    EXACT_DIAM_CAP,
    PAIR_BLOCK,
    REL_TOL,
)
from .components import ComponentPartition, component_path, r_components
from ._config import PATH_CAP
from .errors import SpecError
from .metric import EuclideanAmbient, FiniteMetricSpace, ProductSup, ScaleLadder

__all__ = [
    "SampledMap",
    "LipschitzEstimate",
    "Witness",
    "ScaleResult",
    "LightnessProfile",
    "lipschitz_constant",
    "ll_constant_at_scale",
    "ll_profile",
    "classify_profile",
]

#: Ball-window construction needs codomain pairwise rows; cap the image size.
BALL_WINDOW_CAP = 4_000

#: Exact Lipschitz constants are computed for domains up to this size.
LIP_EXACT_CAP = 8_000

#: Stride subsampling target for Lipschitz estimation on larger domains.
LIP_SUBSAMPLE = 4_000

#: Monotone-trend slack: C may dip by at most this fraction between scales.
TREND_SLACK = 0.05


# ---------------------------------------------------------------------------
# Sampled maps
# ---------------------------------------------------------------------------


class SampledMap:
    """Map between finite metric spaces, given by a total pairing.

    ``pairing[i]`` is the codomain position of the image of domain position
    ``i``. The pairing must be total (one codomain position per domain point).
    """

    def __init__(
        self,
        domain: FiniteMetricSpace,
        codomain: FiniteMetricSpace,
        pairing: np.ndarray,
        name: str = "map",
        claimed_lipschitz: float | None = None,
        meta: dict[str, Any] | None = None,
    ) -> None:
        pairing = np.asarray(pairing, dtype=np.intp)
        if pairing.shape != (domain.n,):
            raise SpecError(
                f"pairing must assign one codomain position per domain point "
                f"(got shape {pairing.shape} for n={domain.n})"
            )
        if pairing.size and (pairing.min() < 0 or pairing.max() >= codomain.n):
            raise SpecError("pairing refers to codomain positions out of range")
        self.domain = domain
        self.codomain = codomain
        self.pairing = pairing
        self.name = name
        self.claimed_lipschitz = claimed_lipschitz
        self.meta: dict[str, Any] = dict(meta or {})
        self._groups: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def __repr__(self) -> str:
        return f"SampledMap({self.name!r}, |X|={self.domain.n}, |Y|={self.codomain.n})"

    def image_groups(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(unique image positions, sorted domain order, group boundaries)."""
        if self._groups is None:
            order = np.argsort(self.pairing, kind="stable").astype(np.intp)
            sorted_img = self.pairing[order]
            uniq, starts = np.unique(sorted_img, return_index=True)
            bounds = np.concatenate([starts, [self.pairing.size]])
            self._groups = (uniq.astype(np.intp), order, bounds.astype(np.intp))
        return self._groups

    def image_coords(self) -> np.ndarray:
        if self.codomain.coords is None:
            raise SpecError("codomain has no coordinates")
        return self.codomain.coords[self.pairing]


# ---------------------------------------------------------------------------
# Lipschitz constant
# ---------------------------------------------------------------------------


@dataclass
class LipschitzEstimate:
    """Largest observed ratio d_Y(f x, f x') / d_X(x, x')."""

    value: float
    exact: bool
    n_pairs: int
    pair: tuple[int, int]  # original domain ids realizing the value
    method: str
    subsample: np.ndarray | None = None
    zero_distance_violation: bool = False


def lipschitz_constant(m: SampledMap) -> LipschitzEstimate:
    """Exact over all pairs up to the cap, stride-subsampled beyond it.

    Pairs at domain distance zero are excluded from the ratio; if such a pair
    maps to distinct codomain points the estimate is flagged (the map is not
    Lipschitz at all).
    """
    n = m.domain.n
    if n <= LIP_EXACT_CAP:
        pos = np.arange(n, dtype=np.intp)
        exact = True
        method = "exact-all-pairs"
        sub = None
    else:
        stride = int(math.ceil(n / LIP_SUBSAMPLE))
        pos = np.arange(0, n, stride, dtype=np.intp)
        exact = False
        method = f"stride-subsample (stride={stride}, m={pos.size})"
        sub = pos
    k = pos.size
    best = 0.0
    best_pair = (int(m.domain.ids[pos[0]]), int(m.domain.ids[pos[0]])) if k else (0, 0)
    zero_viol = False
    n_pairs = 0
    rows = max(1, PAIR_BLOCK // max(k, 1))
    for s in range(0, k, rows):
        e = min(s + rows, k)
        bi = np.repeat(pos[s:e], k)
        bj = np.tile(pos, e - s)
        keep = bi < bj
        bi, bj = bi[keep], bj[keep]
        if bi.size == 0:
            continue
        dx = m.domain.dist_pairs(bi, bj)
        dy = m.codomain.dist_pairs(m.pairing[bi], m.pairing[bj])
        n_pairs += bi.size
        zero = dx == 0.0
        if np.any(zero & (dy > 0.0)):
            zero_viol = True
        ok = ~zero
        if not np.any(ok):
            continue
        ratio = dy[ok] / dx[ok]
        j = int(np.argmax(ratio))
        val = float(ratio[j])
        if val > best:
            best = val
            ii, jj = bi[ok][j], bj[ok][j]
            best_pair = (int(m.domain.ids[ii]), int(m.domain.ids[jj]))
    return LipschitzEstimate(
        value=best,
        exact=exact,
        n_pairs=n_pairs,
        pair=best_pair,
        method=method,
        subsample=sub,
        zero_distance_violation=zero_viol,
    )


# ---------------------------------------------------------------------------
# Window families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Window:
    key: str
    dom_positions: np.ndarray
    scale: float  # component scale AND denominator for this window
    center_id: int | None = None
    cell: tuple[int, ...] | None = None


def _ball_windows(m: SampledMap, r: float, diam_mode: bool) -> list[_Window]:
    uniq, order, bounds = m.image_groups()
    if uniq.size > BALL_WINDOW_CAP:
        raise SpecError(
            f"ball windows need <= {BALL_WINDOW_CAP} distinct image points "
            f"(got {uniq.size}); use grid windows"
        )
    cod = m.codomain
    half = r / 2.0
    thresh = half * (1.0 + REL_TOL)
    dm = cod.dist_cross(uniq, uniq)
    # Iterate centers in codomain-id order for determinism.
    center_order = np.argsort(cod.ids[uniq], kind="stable")
    out: list[_Window] = []
    for ci in center_order:
        sel = np.nonzero(dm[ci] <= thresh)[0]
        if diam_mode:
            scale = float(dm[np.ix_(sel, sel)].max()) if sel.size > 1 else 0.0
            if scale <= 0.0:
                continue
        else:
            scale = r
        dom_parts = [order[bounds[g]:bounds[g + 1]] for g in sel]
        dom_pos = np.sort(np.concatenate(dom_parts)) if dom_parts else np.empty(0, np.intp)
        if dom_pos.size == 0:
            continue
        out.append(
            _Window(
                key=f"ball:{int(cod.ids[uniq[ci]])}",
                dom_positions=dom_pos,
                scale=scale,
                center_id=int(cod.ids[uniq[ci]]),
            )
        )
    return out


def _grid_axis_widths(codomain: FiniteMetricSpace, r: float) -> np.ndarray:
    if codomain.coords is None:
        raise SpecError("grid windows require codomain coordinates")
    k = codomain.coords.shape[1]
    groups = codomain.meta.get("axis_groups")
    if groups is None:
        if isinstance(codomain.metric, EuclideanAmbient):
            groups = [k]
        else:
            raise SpecError(
                "grid windows require a Euclidean codomain or declared axis groups"
            )
    if sum(groups) != k:
        raise SpecError("axis groups do not cover the codomain coordinates")
    return np.concatenate([np.full(d, r / math.sqrt(d)) for d in groups])


def _grid_windows(m: SampledMap, r: float) -> list[_Window]:
    widths = _grid_axis_widths(m.codomain, r)
    img = m.image_coords()
    out: list[_Window] = []
    for lattice in (0, 1):
        shifted = img / widths - (0.5 * lattice)
        cells = np.floor(shifted).astype(np.int64)
        # Group domain points by cell (lexicographic key order).
        uniq, inverse = np.unique(cells, axis=0, return_inverse=True)
        order = np.argsort(inverse, kind="stable").astype(np.intp)
        bounds = np.searchsorted(inverse[order], np.arange(uniq.shape[0] + 1))
        for g in range(uniq.shape[0]):
            dom_pos = order[bounds[g]:bounds[g + 1]]
            cell = tuple(int(v) for v in uniq[g])
            out.append(
                _Window(
                    key=f"grid:{lattice}:{','.join(str(c) for c in cell)}",
                    dom_positions=dom_pos,
                    scale=r,
                    cell=(lattice,) + cell,
                )
            )
    return out


def build_windows(m: SampledMap, r: float, mode: str) -> list[_Window]:
    """Window family at scale r; every window has image diameter <= r."""
    if mode == "ball":
        return _ball_windows(m, r, diam_mode=False)
    if mode == "grid":
        return _grid_windows(m, r)
    if mode == "diam":
        return _ball_windows(m, r, diam_mode=True)
    raise SpecError(f"unknown window mode {mode!r} (expected ball|grid|diam)")


def default_window_mode(m: SampledMap) -> str:
    cod = m.codomain
    if cod.coords is not None:
        if isinstance(cod.metric, EuclideanAmbient):
            return "grid"
        if isinstance(cod.metric, ProductSup) and cod.meta.get("axis_groups"):
            return "grid"
    return "ball"


# ---------------------------------------------------------------------------
# Per-scale constants
# ---------------------------------------------------------------------------


@dataclass
class Witness:
    """Extremal component certificate for one scale."""

    scale: float
    window_key: str
    window_center_id: int | None
    pair_ids: tuple[int, int]
    diameter: float
    component_size: int
    approx: bool
    path_ids: np.ndarray | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "scale": self.scale,
            "window": self.window_key,
            "window_center_id": self.window_center_id,
            "pair_ids": list(self.pair_ids),
            "diameter": self.diameter,
            "component_size": self.component_size,
            "approx": self.approx,
            "path_ids": None if self.path_ids is None else [int(i) for i in self.path_ids],
        }


@dataclass
class ScaleResult:
    """C(r) at one scale with its witness and upper-bound bookkeeping."""

    r: float
    C: float
    C_upper: float
    n_windows: int
    witness: Witness | None
    approx: bool


def _window_extremum(m: SampledMap, w: _Window) -> tuple[float, float, dict[str, Any]]:
    """(achieved max diam, upper-bound max diam, witness data) for one window."""
    if w.dom_positions.size <= 1:
        return 0.0, 0.0, {}
    part = r_components(m.domain, w.scale, subset=w.dom_positions)
    c = part.argmax_component()
    diam = float(part.diameters[c])
    upper = float(part.diam_upper.max())
    info = {
        "pair_pos": (int(part.diam_pairs[c, 0]), int(part.diam_pairs[c, 1])),
        "component_size": int(part.sizes[c]),
        "approx": bool(part.approx_mask[c]),
        "label": int(c),
        "partition": part,
    }
    return diam, upper, info


def ll_constant_at_scale(
    m: SampledMap,
    r: float,
    windows: str | None = None,
    threads: int = 1,
    want_path: bool = True,
) -> ScaleResult:
    """Scale-r lightness constant over the chosen window family.

    Windows with empty preimages contribute 0; singleton components have
    diameter 0. Ties between windows break toward the lexicographically
    smallest window key.
    """
    if r <= 0:
        raise SpecError(f"scale must be positive, got {r}")
    mode = windows or default_window_mode(m)
    wins = build_windows(m, r, mode)
    wins.sort(key=lambda w: w.key)
    if threads > 1 and len(wins) > 4:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda w: _window_extremum(m, w), wins))
    else:
        results = [_window_extremum(m, w) for w in wins]
    best_idx = -1
    best_c = -1.0
    upper_c = 0.0
    approx_any = False
    for k, (diam, upper, info) in enumerate(results):
        denom = wins[k].scale
        if denom <= 0:
            continue
        c_w = diam / denom
        upper_c = max(upper_c, upper / denom)
        if info:
            approx_any = approx_any or info["approx"]
        if c_w > best_c + 0.0:
            best_c = c_w
            best_idx = k
    if best_idx < 0:
        return ScaleResult(r=r, C=0.0, C_upper=0.0, n_windows=len(wins), witness=None, approx=False)
    best_c = max(best_c, 0.0)
    diam, upper, info = results[best_idx]
    win = wins[best_idx]
    witness = None
    if info:
        part: ComponentPartition = info["partition"]
        pa, pb = info["pair_pos"]
        path = None
        if want_path and info["component_size"] <= PATH_CAP and not info["approx"]:
            path_pos = component_path(m.domain, part, pa, pb)
            if path_pos is not None:
                path = m.domain.ids[path_pos]
        witness = Witness(
            scale=win.scale,
            window_key=win.key,
            window_center_id=win.center_id,
            pair_ids=(int(m.domain.ids[pa]), int(m.domain.ids[pb])),
            diameter=diam,
            component_size=info["component_size"],
            approx=info["approx"],
            path_ids=path,
        )
    return ScaleResult(
        r=r,
        C=best_c,
        C_upper=max(upper_c, best_c),
        n_windows=len(wins),
        witness=witness,
        approx=approx_any,
    )


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


def classify_profile(
    scales: np.ndarray,
    C: np.ndarray,
    bounded_threshold: float = BOUNDED_SLOPE,
    diverging_threshold: float = DIVERGING_SLOPE,
    trend_slack: float = TREND_SLACK,
) -> tuple[str, float | None, bool]:
    """(classification, slope, monotone_trend) from a C(r) series.

    Slope is the least-squares slope of log C against log(1/r) over scales
    with C > 0. The series shows a monotone trend when C never drops by more
    than the slack fraction as r decreases.
    """
    scales = np.asarray(scales, dtype=float)
    C = np.asarray(C, dtype=float)
    mask = C > 0
    if mask.sum() < 2:
        return "inconclusive", None, False
    x = np.log(1.0 / scales[mask])
    y = np.log(C[mask])
    slope = float(np.polyfit(x, y, 1)[0])
    cm = C[mask]
    monotone = bool(np.all(cm[1:] >= cm[:-1] * (1.0 - trend_slack)))
    if slope < bounded_threshold:
        return "bounded", slope, monotone
    if slope > diverging_threshold and monotone:
        return "diverging", slope, monotone
    return "inconclusive", slope, monotone


@dataclass
class LightnessProfile:
    """C(r) across a certified ladder, with witnesses and classification."""

    map_name: str
    windows_mode: str
    scales: np.ndarray
    C: np.ndarray
    C_upper: np.ndarray
    approx: np.ndarray
    lipschitz: LipschitzEstimate
    witnesses: list[Witness | None]
    classification: str
    slope: float | None
    monotone_trend: bool
    ladder: ScaleLadder
    results: list[ScaleResult] = field(repr=False, default_factory=list)

    def lightness_constant(self) -> float:
        """max(Lipschitz constant, sup of C(r)) over certified scales."""
        top = float(self.C.max()) if self.C.size else 0.0
        return max(self.lipschitz.value, top)

    def as_dict(self) -> dict[str, Any]:
        return {
            "map": self.map_name,
            "windows": self.windows_mode,
            "scales": [float(s) for s in self.scales],
            "C": [float(c) for c in self.C],
            "C_upper": [float(c) for c in self.C_upper],
            "approx": [bool(a) for a in self.approx],
            "lipschitz": {
                "value": self.lipschitz.value,
                "exact": self.lipschitz.exact,
                "method": self.lipschitz.method,
                "pair_ids": list(self.lipschitz.pair),
            },
            "classification": self.classification,
            "slope": self.slope,
            "monotone_trend": self.monotone_trend,
            "witnesses": [None if w is None else w.as_dict() for w in self.witnesses],
        }


def ll_profile(
    m: SampledMap,
    ladder: ScaleLadder | None = None,
    windows: str | None = None,
    threads: int = 1,
    kappa: float | None = None,
    want_paths: bool = True,
) -> LightnessProfile:
    """Lightness profile of a sampled map along a certified scale ladder.

    The ladder defaults to the domain's (from ~diam/2 down to
    kappa * resolution); ladders reaching below the certification floor are
    rejected with an explicit error naming kappa.
    """
    mode = windows or default_window_mode(m)
    if ladder is None:
        ladder = ScaleLadder.for_space(m.domain) if kappa is None else ScaleLadder.for_space(
            m.domain, kappa=kappa
        )
    ladder.validate_for(m.domain, kappa=kappa)
    results = [
        ll_constant_at_scale(m, r, windows=mode, threads=threads, want_path=want_paths)
        for r in ladder.r_values
    ]
    scales = np.array([res.r for res in results])
    C = np.array([res.C for res in results])
    C_upper = np.array([res.C_upper for res in results])
    approx = np.array([res.approx for res in results])
    lip = lipschitz_constant(m)
    classification, slope, monotone = classify_profile(scales, C)
    return LightnessProfile(
        map_name=m.name,
        windows_mode=mode,
        scales=scales,
        C=C,
        C_upper=C_upper,
        approx=approx,
        lipschitz=lip,
        witnesses=[res.witness for res in results],
        classification=classification,
        slope=slope,
        monotone_trend=monotone,
        ladder=ladder,
        results=results,
    )
