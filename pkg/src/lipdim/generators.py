"""Reference space generators: fractals, anisotropic grid nets, words, trees.

Every generator returns a :class:`FiniteMetricSpace` with ids ``0..n-1``, a
declared ``resolution`` (sampling fineness used to certify scale ladders), and
provenance metadata. Generators validate their parameters and refuse to
materialize more points than the global budget (``LIPDIM_BUDGET``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._config import point_budget
from .errors import SpecError
from .metric import (
    EuclideanAmbient,
    FiniteMetricSpace,
    Koranyi,
    KoranyiGrid,
    ProductSup,
    SnowflakePower,
    TreePath,
    UltrametricWords,
)

__all__ = [
    "SpaceSpec",
    "build_space",
    "carpet",
    "carpet_cells",
    "gasket",
    "koch",
    "snowflake_space",
    "heisenberg_net",
    "heisenberg_product",
    "heisenberg_inverse",
    "heisenberg_dilate",
    "koranyi_norm",
    "word_cantor",
    "tree",
    "interval_net",
    "middle_cantor",
    "harmonic_set",
    "strip",
    "real_subset",
    "product",
]


@dataclass(frozen=True)
class SpaceSpec:
    """Declarative recipe for a generated space (JSON-serializable)."""

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "params": dict(self.params)}
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SpaceSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise SpecError("space spec must be an object with a 'kind' field")
        return cls(kind=str(data["kind"]), params=dict(data.get("params", {})),
                   seed=data.get("seed"))


def _check_budget(count: int, what: str) -> None:
    budget = point_budget()
    if count > budget:
        raise SpecError(
            f"{what} would materialize {count} points, above the budget {budget}; "
            "reduce the generation depth or raise LIPDIM_BUDGET"
        )


# ---------------------------------------------------------------------------
# Planar fractals
# ---------------------------------------------------------------------------


def _carpet_cell_arrays(p: int, gen: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer (x, y) cell coordinates of kept cells at generation ``gen``."""
    if p < 3 or p % 2 == 0:
        raise SpecError(f"carpet base must be an odd integer >= 3, got {p}")
    if gen < 0:
        raise SpecError("carpet generation must be nonnegative")
    c = (p - 1) // 2
    digits = [(di, dj) for di in range(p) for dj in range(p) if not (di == c and dj == c)]
    _check_budget((p * p - 1) ** max(gen, 1), f"carpet(p={p}, gen={gen})")
    dx = np.array([d[0] for d in digits], dtype=np.int64)
    dy = np.array([d[1] for d in digits], dtype=np.int64)
    x = np.zeros(1, dtype=np.int64)
    y = np.zeros(1, dtype=np.int64)
    for _ in range(gen):
        x = (x[:, None] * p + dx[None, :]).ravel()
        y = (y[:, None] * p + dy[None, :]).ravel()
    return x, y


def carpet_cells(p: int, gen: int) -> list[tuple[float, np.ndarray]]:
    """Kept-cell decompositions per level: (scale, corner offsets of cells).

    Level k (1..gen) consists of the kept cells of side p^-k; returned as the
    lower-left corner coordinates of each cell. Used by self-covering checks.
    """
    out = []
    for k in range(1, gen + 1):
        x, y = _carpet_cell_arrays(p, k)
        s = float(p) ** (-k)
        out.append((s, np.stack([x, y], axis=1).astype(float) * s))
    return out


def carpet(p: int = 3, gen: int = 3, sampling: str = "corners") -> FiniteMetricSpace:
    """Planar carpet at generation ``gen``: kept-cell corners or centers."""
    x, y = _carpet_cell_arrays(p, gen)
    scale = float(p) ** (-gen)
    if sampling == "corners":
        cx = np.concatenate([x, x + 1, x, x + 1])
        cy = np.concatenate([y, y, y + 1, y + 1])
        pts = np.unique(np.stack([cx, cy], axis=1), axis=0)
        coords = pts.astype(float) * scale
    elif sampling == "centers":
        coords = (np.stack([x, y], axis=1).astype(float) + 0.5) * scale
        order = np.lexsort((coords[:, 1], coords[:, 0]))
        coords = coords[order]
    else:
        raise SpecError(f"carpet sampling must be 'corners' or 'centers', got {sampling!r}")
    _check_budget(coords.shape[0], f"carpet(p={p}, gen={gen}, {sampling})")
    return FiniteMetricSpace(
        EuclideanAmbient(),
        coords=coords,
        resolution=scale,
        meta={"name": f"carpet_p{p}_g{gen}_{sampling}", "carpet": {"p": p, "gen": gen, "sampling": sampling}},
    )


def gasket(gen: int = 4) -> FiniteMetricSpace:
    """Corner vertices of the triangular gasket at generation ``gen``."""
    if gen < 0:
        raise SpecError("gasket generation must be nonnegative")
    scale_int = 1 << gen
    _check_budget(3 ** max(gen, 1) * 3, f"gasket(gen={gen})")
    tris = np.array([[[0, 0], [scale_int, 0], [0, scale_int]]], dtype=np.int64)
    for _ in range(gen):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        mab = (a + b) // 2
        mac = (a + c) // 2
        mbc = (b + c) // 2
        tris = np.concatenate([
            np.stack([a, mab, mac], axis=1),
            np.stack([mab, b, mbc], axis=1),
            np.stack([mac, mbc, c], axis=1),
        ])
    verts = np.unique(tris.reshape(-1, 2), axis=0)
    # Basis: (1, 0) and (1/2, sqrt(3)/2), scaled to unit side length.
    a_coef = verts[:, 0].astype(float)
    b_coef = verts[:, 1].astype(float)
    coords = np.stack([
        (a_coef + 0.5 * b_coef) / scale_int,
        (b_coef * (math.sqrt(3.0) / 2.0)) / scale_int,
    ], axis=1)
    return FiniteMetricSpace(
        EuclideanAmbient(),
        coords=coords,
        resolution=2.0 ** (-gen),
        meta={"name": f"gasket_g{gen}"},
    )


def koch(gen: int = 4) -> FiniteMetricSpace:
    """Polyline vertices of the Koch curve at generation ``gen`` (4^g + 1 points)."""
    if gen < 0:
        raise SpecError("koch generation must be nonnegative")
    _check_budget(4 ** max(gen, 1) + 1, f"koch(gen={gen})")
    z = np.array([0.0, 1.0], dtype=complex)
    rot = complex(0.5, math.sqrt(3.0) / 2.0)
    for _ in range(gen):
        a = z[:-1]
        b = z[1:]
        c = a + (b - a) / 3.0
        e = a + 2.0 * (b - a) / 3.0
        peak = c + (e - c) * rot
        out = np.empty(4 * a.size + 1, dtype=complex)
        out[0:-1:4] = a
        out[1::4] = c
        out[2::4] = peak
        out[3::4] = e
        out[-1] = b[-1]
        z = out
    coords = np.stack([z.real, z.imag], axis=1)
    return FiniteMetricSpace(
        EuclideanAmbient(),
        coords=coords,
        resolution=3.0 ** (-gen),
        meta={"name": f"koch_g{gen}"},
    )


# ---------------------------------------------------------------------------
# Snowflake wrapper
# ---------------------------------------------------------------------------


def snowflake_space(base: FiniteMetricSpace, alpha: float) -> FiniteMetricSpace:
    """Same points, distances raised to the power ``alpha`` (0 < alpha <= 1)."""
    rule = SnowflakePower(base.metric, alpha)
    res = None if base.resolution is None else base.resolution ** alpha
    meta = dict(base.meta)
    meta["name"] = f"snowflake{alpha:g}({meta.get('name', base.metric.kind)})"
    return FiniteMetricSpace(
        rule,
        coords=base.coords,
        ids=base.ids,
        resolution=res,
        meta=meta,
        n=base.n,
    )


# ---------------------------------------------------------------------------
# Anisotropic grid net (Koranyi geometry)
# ---------------------------------------------------------------------------


def koranyi_norm(pts: np.ndarray) -> np.ndarray:
    """Gauge norm (|z|^4 + 16 t^2)^(1/4) of (x, y, t) rows."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    z2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    return np.sqrt(np.sqrt(z2 * z2 + 16.0 * pts[:, 2] ** 2))

def heisenberg_product(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Group product (x, y, t) * (x', y', t') with twist -(y x' - x y')/2."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    out = np.empty(np.broadcast_shapes(p.shape, q.shape), dtype=float)
    out[..., 0] = p[..., 0] + q[..., 0]
    out[..., 1] = p[..., 1] + q[..., 1]
    out[..., 2] = p[..., 2] + q[..., 2] - 0.5 * (p[..., 1] * q[..., 0] - p[..., 0] * q[..., 1])
    return out


def heisenberg_inverse(p: np.ndarray) -> np.ndarray:
    return -np.atleast_2d(np.asarray(p, dtype=float))


def heisenberg_dilate(p: np.ndarray, lam: float) -> np.ndarray:
    p = np.atleast_2d(np.asarray(p, dtype=float))
    out = p.copy()
    out[..., 0] *= lam
    out[..., 1] *= lam
    out[..., 2] *= lam * lam
    return out


def heisenberg_net(R: float = 1.0, eps: float = 1.0 / 32.0) -> FiniteMetricSpace:
    """Anisotropic lattice inside the gauge ball of radius R.

    (x, y) range over eps * Z and t over eps^2 * Z, keeping points with
    |z|^4 + 16 t^2 <= R^4. The net is eps-separated and its covering radius is
    O(eps) because a t-layer step can compensate the group twist.
    """
    if R <= 0 or eps <= 0:
        raise SpecError("heisenberg_net requires positive R and eps")
    ts = eps * eps
    n_xy = int(math.floor(R / eps))
    axis = np.arange(-n_xy, n_xy + 1, dtype=np.int64)
    ix, iy = np.meshgrid(axis, axis, indexing="ij")
    ix = ix.ravel()
    iy = iy.ravel()
    x = ix * eps
    y = iy * eps
    z2 = x * x + y * y
    keep = z2 <= R * R
    ix, iy, x, y, z2 = ix[keep], iy[keep], x[keep], y[keep], z2[keep]
    tmax = np.sqrt(np.maximum(R ** 4 - z2 * z2, 0.0)) / 4.0
    nt = np.floor(tmax / ts).astype(np.int64)
    counts = 2 * nt + 1
    total = int(counts.sum())
    _check_budget(total, f"heisenberg_net(R={R}, eps={eps})")
    col = np.repeat(np.arange(ix.size, dtype=np.intp), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    it = (np.arange(total, dtype=np.int64) - offsets[col]) - nt[col]
    coords = np.stack([x[col], y[col], it * ts], axis=1)
    index = np.stack([ix[col], iy[col], it], axis=1)
    return FiniteMetricSpace(
        Koranyi(),
        coords=coords,
        resolution=eps,
        meta={
            "name": f"heisenberg_R{R:g}_eps{eps:g}",
            "koranyi_grid": KoranyiGrid(index=index, xy_spacing=eps, t_spacing=ts),
        },
    )


# ---------------------------------------------------------------------------
# Word spaces
# ---------------------------------------------------------------------------


def word_cantor(M: int, D: int, scale: float = 1.0) -> FiniteMetricSpace:
    """All M^D words of length D with distance scale * 2^-(first difference)."""
    if M < 1 or D < 1:
        raise SpecError("word space requires M >= 1 letters and depth D >= 1")
    count = M ** D
    _check_budget(count, f"word_cantor(M={M}, D={D})")
    powers = M ** np.arange(D - 1, -1, -1, dtype=np.int64)
    words = ((np.arange(count, dtype=np.int64)[:, None] // powers) % M).astype(np.int16)
    diam_hint = (scale * 0.5, True) if M >= 2 else (0.0, True)
    return FiniteMetricSpace(
        UltrametricWords(words, scale),
        resolution=scale * 2.0 ** (-D),
        meta={"name": f"words_M{M}_D{D}"},
        diameter_hint=diam_hint,
    )


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------


def tree(
    shape: str = "random",
    n: int = 100,
    seed: int = 0,
    edge_lengths: str = "unit",
) -> FiniteMetricSpace:
    """Rooted tree with path-length metric (dense matrix precomputed).

    Shapes: 'path' (chain), 'star' (all leaves on the root), 'binary'
    (complete), 'caterpillar' (spine with alternating legs), 'random'
    (uniform attachment). The root is node 0.
    """
    if n < 1:
        raise SpecError("tree needs at least one node")
    _check_budget(n * n, f"tree(n={n}) distance matrix")
    rng = np.random.default_rng(seed)
    parents = np.zeros(n, dtype=np.intp)
    if shape == "path":
        parents[1:] = np.arange(n - 1)
    elif shape == "star":
        parents[1:] = 0
    elif shape == "binary":
        for i in range(1, n):
            parents[i] = (i - 1) // 2
    elif shape == "caterpillar":
        spine = (n + 1) // 2
        for i in range(1, n):
            parents[i] = i - 1 if i < spine else i - spine
    elif shape == "random":
        for i in range(1, n):
            parents[i] = int(rng.integers(0, i))
    else:
        raise SpecError(f"unknown tree shape {shape!r}")
    if edge_lengths == "unit":
        weights = np.ones(n)
    elif edge_lengths == "uniform":
        weights = rng.uniform(0.5, 1.5, size=n)
    else:
        raise SpecError(f"unknown edge_lengths mode {edge_lengths!r}")
    dm = np.zeros((n, n), dtype=float)
    for i in range(1, n):
        p = parents[i]
        w = float(weights[i])
        dm[i, :i] = dm[p, :i] + w
        dm[:i, i] = dm[i, :i]
    edges = tuple((int(parents[i]), i, float(weights[i])) for i in range(1, n))
    res = float(weights[1:].min()) if n > 1 else 1.0
    return FiniteMetricSpace(
        TreePath(dm, root=0, edges=edges),
        resolution=res,
        meta={"name": f"tree_{shape}_n{n}_s{seed}"},
        n=n,
    )


# ---------------------------------------------------------------------------
# Subsets of the line and the strip
# ---------------------------------------------------------------------------


def interval_net(n: int = 101, length: float = 1.0) -> FiniteMetricSpace:
    """Uniform net of n points on [0, length]."""
    if n < 2 or length <= 0:
        raise SpecError("interval_net needs n >= 2 points and positive length")
    _check_budget(n, "interval_net")
    coords = np.linspace(0.0, length, n)[:, None]
    return FiniteMetricSpace(
        EuclideanAmbient(),
        coords=coords,
        resolution=length / (n - 1),
        meta={"name": f"interval_n{n}"},
    )


def middle_cantor(ratio: float = 1.0 / 3.0, depth: int = 6) -> FiniteMetricSpace:
    """Endpoints of the middle-interval removal construction on [0, 1].

    ``ratio`` is the removed middle fraction; the two kept pieces each carry
    fraction (1 - ratio) / 2 per step.
    """
    if not (0.0 < ratio < 1.0):
        raise SpecError("removed fraction must lie in (0, 1)")
    if depth < 0:
        raise SpecError("depth must be nonnegative")
    _check_budget(2 ** (depth + 1), f"middle_cantor(depth={depth})")
    alpha = (1.0 - ratio) / 2.0
    intervals = np.array([[0.0, 1.0]])
    for _ in range(depth):
        a = intervals[:, 0]
        b = intervals[:, 1]
        w = b - a
        left = np.stack([a, a + alpha * w], axis=1)
        right = np.stack([b - alpha * w, b], axis=1)
        intervals = np.concatenate([left, right])
        intervals = intervals[np.argsort(intervals[:, 0], kind="stable")]
    pts = np.unique(intervals.ravel())
    return FiniteMetricSpace(
        EuclideanAmbient(),
        coords=pts[:, None],
        resolution=float(alpha ** depth),
        meta={"name": f"cantor_r{ratio:g}_d{depth}", "cantor": {"ratio": ratio, "depth": depth}},
    )


def harmonic_set(N: int = 10_000) -> FiniteMetricSpace:
    """{0} together with {1/k : 1 <= k <= N}, ascending."""
    if N < 2:
        raise SpecError("harmonic set needs N >= 2")
    _check_budget(N + 1, "harmonic_set")
    pts = np.concatenate([[0.0], 1.0 / np.arange(N, 0, -1, dtype=float)])
    res = float(np.diff(pts).min())
    return FiniteMetricSpace(
        EuclideanAmbient(),
        coords=pts[:, None],
        resolution=res,
        meta={"name": f"harmonic_N{N}"},
    )


def strip(sheets: int = 6, net_n: int = 65, length: float = 1.0, spacing: float = 2.0) -> FiniteMetricSpace:
    """Parallel segments [0, length] x {0, spacing, ..., spacing*(sheets-1)}."""
    if sheets < 1 or net_n < 2:
        raise SpecError("strip needs sheets >= 1 and net_n >= 2")
    _check_budget(sheets * net_n, "strip")
    xs = np.linspace(0.0, length, net_n)
    coords = np.stack([
        np.tile(xs, sheets),
        np.repeat(np.arange(sheets, dtype=float) * spacing, net_n),
    ], axis=1)
    order = np.lexsort((coords[:, 0], coords[:, 1]))
    return FiniteMetricSpace(
        EuclideanAmbient(),
        coords=coords[order],
        resolution=length / (net_n - 1),
        meta={"name": f"strip_s{sheets}_n{net_n}"},
    )


def real_subset(kind: str, **params: Any) -> FiniteMetricSpace:
    """Dispatch for 1-D subset families (+ the planar strip counterexample)."""
    if kind == "interval_net":
        return interval_net(**params)
    if kind == "middle_cantor":
        return middle_cantor(**params)
    if kind == "harmonic":
        return harmonic_set(**params)
    if kind == "strip":
        return strip(**params)
    raise SpecError(f"unknown real_subset kind {kind!r}")


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


def _axis_groups(space: FiniteMetricSpace) -> list[int] | None:
    rule = space.metric
    if isinstance(rule, ProductSup):
        groups = space.meta.get("axis_groups")
        return list(groups) if groups is not None else None
    if isinstance(rule, EuclideanAmbient) and space.coords is not None:
        return [space.ndim]
    return None


def product(left: FiniteMetricSpace, right: FiniteMetricSpace) -> FiniteMetricSpace:
    """Cartesian product with the sup metric; ids are row-major pair indices."""
    n = left.n * right.n
    _check_budget(n, "product space")
    il = np.repeat(np.arange(left.n, dtype=np.intp), right.n)
    ir = np.tile(np.arange(right.n, dtype=np.intp), left.n)
    rule = ProductSup(left, right, il, ir)
    coords = None
    if left.coords is not None and right.coords is not None:
        coords = np.hstack([left.coords[il], right.coords[ir]])
    res = None
    if left.resolution is not None and right.resolution is not None:
        res = max(left.resolution, right.resolution)
    ga = _axis_groups(left)
    gb = _axis_groups(right)
    meta: dict[str, Any] = {
        "name": f"product({left.meta.get('name', '?')}, {right.meta.get('name', '?')})",
    }
    if ga is not None and gb is not None:
        meta["axis_groups"] = ga + gb
    return FiniteMetricSpace(rule, coords=coords, resolution=res, meta=meta, n=n)


# ---------------------------------------------------------------------------
# Spec dispatch
# ---------------------------------------------------------------------------


def build_space(spec: SpaceSpec | dict[str, Any]) -> FiniteMetricSpace:
    """Materialize a space from its declarative spec."""
    if isinstance(spec, dict):
        spec = SpaceSpec.from_dict(spec)
    kind = spec.kind
    params = dict(spec.params)
    if kind == "carpet":
        return carpet(**params)
    if kind == "gasket":
        return gasket(**params)
    if kind == "koch":
        return koch(**params)
    if kind == "snowflake":
        base = build_space(params.pop("base"))
        return snowflake_space(base, float(params.pop("alpha")))
    if kind == "heisenberg_net":
        return heisenberg_net(**params)
    if kind == "word_cantor":
        return word_cantor(**params)
    if kind == "tree":
        seed = spec.seed if spec.seed is not None else params.pop("seed", 0)
        return tree(seed=seed, **params)
    if kind in {"interval_net", "middle_cantor", "harmonic", "strip"}:
        return real_subset(kind, **params)
    if kind == "product":
        left = build_space(params.pop("left"))
        right = build_space(params.pop("right"))
        return product(left, right)
    raise SpecError(f"unknown space kind {kind!r}")
