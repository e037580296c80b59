"""Shared numeric conventions: tolerances, caps, and point budgets.

All scale comparisons in the package go through :func:`leq_tol` so that the
"within relative tolerance 1e-9" convention is applied uniformly (a pair is an
edge at scale ``r`` iff ``d <= r * (1 + REL_TOL)``).
"""

from __future__ import annotations

import os

#: Relative tolerance for all distance-vs-scale comparisons.
REL_TOL = 1e-9

#: Cache the full pairwise matrix only when the space has at most this many points.
PAIR_CACHE_CAP = 20_000

#: Exact component/space diameters are computed by full pair scans up to this
#: many member points; beyond it, certified upper bounds plus achieved lower
#: bounds are reported and flagged approximate.
EXACT_DIAM_CAP = 8_000

#: Hard cap on points for the exact dendrogram (merge-event) construction.
DENDROGRAM_CAP = 50_000

#: Spaces at most this large may be deduplicated / fully materialized freely.
DEDUP_CAP = 100_000

#: Metric-axiom validation is exhaustive up to this size, sampled beyond it.
AXIOM_EXHAUSTIVE_CAP = 300

#: Number of sampled triples for metric-axiom validation on large spaces.
AXIOM_SAMPLE_TRIPLES = 100_000

#: Default multiplier: the smallest certified ladder scale is kappa * resolution.
DEFAULT_KAPPA = 4.0

#: Default geometric ratio between consecutive ladder scales.
DEFAULT_RATIO = 0.5

#: Slope thresholds for profile classification (bounded / inconclusive / diverging).
BOUNDED_SLOPE = 0.1
DIVERGING_SLOPE = 0.3

#: Block size (element count) for chunked pairwise evaluations.
PAIR_BLOCK = 1 << 22

#: Subsample target for Lipschitz-constant estimation on spaces above the cap.
LIP_SUBSAMPLE = 2_000

#: Witness paths are reconstructed only for components up to this many points.
PATH_CAP = 50_000

#: A 1-D sample is judged porous when the global infimum of hole ratios stays
#: at or above this threshold over every certified scale.
POROSITY_THRESHOLD = 0.05

#: Porosity scans certify only scales well above the sampling resolution,
#: because delta-thickening erases holes of near-resolution size.
POROSITY_KAPPA = 64.0

#: Regular-map cover search tries at most this many balls per window.
DS_MAX_COVER = 8


def point_budget() -> int:
    """Maximum number of points any generator may materialize.

    Controlled by the ``LIPDIM_BUDGET`` environment variable (default 4e6).
    """
    raw = os.environ.get("LIPDIM_BUDGET", "")
    try:
        value = int(raw)
    except ValueError:
        value = 4_000_000
    return max(value, 1)


def leq_tol(d: float, r: float) -> bool:
    """True iff distance ``d`` is within scale ``r`` under the shared tolerance."""
    return d <= r * (1.0 + REL_TOL)
