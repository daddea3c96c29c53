"""Synthetic RSS dataset generation: pathloss and urban ray-traced regimes.

The urban regime is a 2-D specular tracer based on the image method: buildings
are simple polygons, every propagation path is the direct ray plus reflection
sequences off polygon edges, each bounce paying a fixed dB loss.  Path powers
combine incoherently in the linear domain (RSS observables average over fast
fading, so phase is not modeled).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import Dataset, JammerParams, Rect, SingularGeometryError, pathloss_rss

# Parametric tolerance for segment intersection tests (dimensionless t, u).
EPS = 1e-9

NO_PATH_FLOOR_DBW = -200.0


class RayTraceError(ValueError):
    """Invalid ray-tracing input, e.g. an endpoint inside a building."""


def _cross(v, w):
    return v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0]


def _polygon_ccw(vertices: np.ndarray) -> np.ndarray:
    """Return the polygon with counter-clockwise winding (interior left of edges)."""
    rolled = np.roll(vertices, -1, axis=0)
    area2 = np.sum(vertices[:, 0] * rolled[:, 1] - rolled[:, 0] * vertices[:, 1])
    if area2 == 0:
        raise ValueError("polygon has zero area")
    return vertices if area2 > 0 else vertices[::-1]


def _check_simple(vertices: np.ndarray) -> None:
    n = len(vertices)
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share a vertex; skip
            r = b[i] - a[i]
            s = b[j] - a[j]
            denom = _cross(r, s)
            if denom == 0:
                continue
            qp = a[j] - a[i]
            t = _cross(qp, s) / denom
            u = _cross(qp, r) / denom
            if EPS < t < 1 - EPS and EPS < u < 1 - EPS:
                raise ValueError("polygon is self-intersecting")


@dataclass(frozen=True)
class BuildingMap:
    """2-D urban geometry: simple polygons plus per-bounce reflection loss.

    Edge arrays are precomputed with CCW winding, so the exterior of every
    edge is the right-hand side of its direction vector.
    """

    polygons: tuple
    reflection_loss_db: float = 6.0
    max_reflections: int = 2
    no_path_floor_dbw: float = NO_PATH_FLOOR_DBW
    edge_a: np.ndarray = dc_field(init=False, repr=False, compare=False)
    edge_b: np.ndarray = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        polys = []
        for poly in self.polygons:
            v = np.asarray(poly, dtype=float)
            if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
                raise ValueError("each polygon needs at least 3 two-dimensional vertices")
            if not np.all(np.isfinite(v)):
                raise ValueError("polygon vertices must be finite")
            v = _polygon_ccw(v)
            _check_simple(v)
            polys.append(v)
        if self.reflection_loss_db < 0:
            raise ValueError("reflection_loss_db must be >= 0")
        if not (0 <= self.max_reflections <= 8):
            raise ValueError("max_reflections must be between 0 and 8")
        object.__setattr__(self, "polygons", tuple(polys))
        if polys:
            a = np.concatenate([p for p in polys])
            b = np.concatenate([np.roll(p, -1, axis=0) for p in polys])
        else:
            a = np.zeros((0, 2))
            b = np.zeros((0, 2))
        object.__setattr__(self, "edge_a", a)
        object.__setattr__(self, "edge_b", b)

    @property
    def n_edges(self) -> int:
        return self.edge_a.shape[0]

    def contains(self, pts) -> np.ndarray:
        """True for points strictly inside any polygon (crossing-number test)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        inside = np.zeros(pts.shape[0], dtype=bool)
        for poly in self.polygons:
            a = poly
            b = np.roll(poly, -1, axis=0)
            hit = np.zeros(pts.shape[0], dtype=bool)
            for (ax, ay), (bx, by) in zip(a, b):
                straddles = (ay > pts[:, 1]) != (by > pts[:, 1])
                with np.errstate(divide="ignore", invalid="ignore"):
                    xcut = ax + (pts[:, 1] - ay) * (bx - ax) / (by - ay)
                hit ^= straddles & (pts[:, 0] < xcut)
            inside |= hit
        return inside


def _mirror(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Reflect point p across the infinite line through a, b."""
    d = b - a
    d = d / np.linalg.norm(d)
    ap = p - a
    return a + 2.0 * (ap @ d) * d - ap


def _enumerate_images(source: np.ndarray, bmap: BuildingMap):
    """All reflection edge sequences up to max_reflections, with the image chain.

    A sequence is kept only if each virtual source lies strictly on the
    exterior side of the next mirror edge (necessary for a specular hit on
    the outward face); per-observer geometric validity is checked later.
    Returns a list of (edge index tuple, [image_1 .. image_k]).
    """
    ea, eb = bmap.edge_a, bmap.edge_b
    edge_dir = eb - ea
    sequences = []
    level = [((), source, [])]
    for _ in range(bmap.max_reflections):
        nxt = []
        for seq, img, chain in level:
            side = _cross(edge_dir, img[None, :] - ea)
            for e in range(bmap.n_edges):
                if seq and e == seq[-1]:
                    continue
                if side[e] >= 0:  # image not strictly exterior of edge e
                    continue
                img2 = _mirror(img, ea[e], eb[e])
                entry = (seq + (e,), img2, chain + [img2])
                nxt.append(entry)
                sequences.append(entry)
        level = nxt
    return [(seq, chain) for seq, _, chain in sequences]


def _segments_blocked(p: np.ndarray, q: np.ndarray, bmap: BuildingMap, skip=(),
                      active: np.ndarray | None = None) -> np.ndarray:
    """True where the segment p[n] -> q[n] properly crosses any non-skipped edge."""
    n = p.shape[0]
    blocked = np.zeros(n, dtype=bool)
    r = q - p
    for e in range(bmap.n_edges):
        if e in skip:
            continue
        todo = ~blocked if active is None else active & ~blocked
        if not todo.any():
            break
        a, b = bmap.edge_a[e], bmap.edge_b[e]
        s = b - a
        denom = _cross(r[todo], s)
        qp = a - p[todo]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = _cross(qp, s) / denom
            u = _cross(qp, r[todo]) / denom
        hit = (denom != 0) & (t > EPS) & (t < 1 - EPS) & (u > EPS) & (u < 1 - EPS)
        idx = np.flatnonzero(todo)
        blocked[idx[hit]] = True
    return blocked


def raytrace_rss_batch(points, jp: JammerParams, bmap: BuildingMap) -> np.ndarray:
    """Ray-traced RSS (dBW) at a batch of (N, 2) points.

    Sums linear powers p0_lin * 10**(-k*loss/10) / length**gamma over the
    direct path (if unobstructed) and every valid reflection sequence of at
    most max_reflections bounces.  Points with no path at all get the
    configured floor.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2 or jp.theta.size != 2:
        raise ValueError("ray tracing is 2-D only")
    source = jp.theta
    if bmap.contains(source[None, :])[0]:
        raise RayTraceError("jammer is inside a building")
    inside = bmap.contains(pts)
    if inside.any():
        raise RayTraceError(f"{int(inside.sum())} observer(s) inside a building")

    d = np.linalg.norm(pts - source, axis=1)
    if np.any(d == 0.0):
        raise SingularGeometryError("observer coincides with the source")
    p0_lin = 10.0 ** (jp.p0 / 10.0)
    power = np.zeros(pts.shape[0])

    # direct path
    vis = ~_segments_blocked(pts, np.broadcast_to(source, pts.shape), bmap)
    power[vis] += p0_lin / d[vis] ** jp.gamma

    for seq, chain in _enumerate_images(source, bmap):
        k = len(seq)
        # walk the chain backwards: receiver -> p_k on e_k -> ... -> p_1 -> source
        target = pts
        ok = np.ones(pts.shape[0], dtype=bool)
        prev_edge = None
        for j in range(k - 1, -1, -1):
            e = seq[j]
            img = chain[j]
            a, b = bmap.edge_a[e], bmap.edge_b[e]
            r = img[None, :] - target
            s = b - a
            denom = _cross(r, s)
            qp = a - target
            with np.errstate(divide="ignore", invalid="ignore"):
                t = _cross(qp, s) / denom
                u = _cross(qp, r) / denom
            ok &= (denom != 0) & (t > EPS) & (t < 1 - EPS) & (u > EPS) & (u < 1 - EPS)
            if not ok.any():
                break
            hit = np.where(ok[:, None], target + t[:, None] * r, target)
            skip = {e} if prev_edge is None else {e, prev_edge}
            ok &= ~_segments_blocked(target, hit, bmap, skip=skip, active=ok)
            target = hit
            prev_edge = e
        if not ok.any():
            continue
        ok &= ~_segments_blocked(
            target, np.broadcast_to(source, target.shape), bmap, skip={seq[0]}, active=ok
        )
        if not ok.any():
            continue
        length = np.linalg.norm(pts - chain[-1], axis=1)  # unfolded path length
        atten = 10.0 ** (-k * bmap.reflection_loss_db / 10.0)
        power[ok] += atten * p0_lin / length[ok] ** jp.gamma

    out = np.full(pts.shape[0], bmap.no_path_floor_dbw)
    lit = power > 0
    out[lit] = 10.0 * np.log10(power[lit])
    return out


def raytrace_rss(x, jp: JammerParams, bmap: BuildingMap) -> float:
    """Ray-traced RSS (dBW) at a single observer position."""
    return float(raytrace_rss_batch(np.asarray(x, dtype=float)[None, :], jp, bmap)[0])


def trace_paths(x, jp: JammerParams, bmap: BuildingMap):
    """Per-path breakdown at one observer: list of (edge tuple, length_m, power_lin).

    The direct path, when visible, appears as ((), distance, power).  Intended
    for inspection and tests; raytrace_rss sums exactly these contributions.
    """
    x = np.asarray(x, dtype=float)
    pt = x[None, :]
    source = jp.theta
    p0_lin = 10.0 ** (jp.p0 / 10.0)
    paths = []
    d = float(np.linalg.norm(x - source))
    if d == 0.0:
        raise SingularGeometryError("observer coincides with the source")
    if not _segments_blocked(pt, source[None, :], bmap)[0]:
        paths.append(((), d, p0_lin / d**jp.gamma))
    for seq, chain in _enumerate_images(source, bmap):
        k = len(seq)
        target = pt
        ok = np.ones(1, dtype=bool)
        prev_edge = None
        for j in range(k - 1, -1, -1):
            e = seq[j]
            img = chain[j]
            a, b = bmap.edge_a[e], bmap.edge_b[e]
            r = img[None, :] - target
            s = b - a
            denom = _cross(r, s)
            qp = a - target
            with np.errstate(divide="ignore", invalid="ignore"):
                t = _cross(qp, s) / denom
                u = _cross(qp, r) / denom
            ok &= (denom != 0) & (t > EPS) & (t < 1 - EPS) & (u > EPS) & (u < 1 - EPS)
            if not ok[0]:
                break
            hit = target + t[:, None] * r
            skip = {e} if prev_edge is None else {e, prev_edge}
            ok &= ~_segments_blocked(target, hit, bmap, skip=skip)
            target = hit
            prev_edge = e
        if not ok[0]:
            continue
        if _segments_blocked(target, source[None, :], bmap, skip={seq[0]})[0]:
            continue
        length = float(np.linalg.norm(x - chain[-1]))
        atten = 10.0 ** (-k * bmap.reflection_loss_db / 10.0)
        paths.append((seq, length, atten * p0_lin / length**jp.gamma))
    return paths


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to synthesize one crowdsourced measurement campaign."""

    jammer: JammerParams
    area: Rect
    n_samples: int
    top_k: int
    inr_db: float
    regime: str = "pathloss"
    buildings: BuildingMap | None = None
    d_f: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.regime not in ("pathloss", "raytrace"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if not (0 < self.top_k <= self.n_samples):
            raise ValueError("need 0 < top_k <= n_samples")
        if not self.area.contains(self.jammer.theta[None, :])[0]:
            raise ValueError("jammer must lie inside the survey area")
        if not self.d_f > 0:
            raise ValueError("far-field distance d_f must be positive")
        if self.regime == "raytrace":
            bmap = self.buildings if self.buildings is not None else BuildingMap(())
            if bmap.contains(self.jammer.theta[None, :])[0]:
                raise ValueError("jammer must lie outside all buildings")
            object.__setattr__(self, "buildings", bmap)


def sigma_from_inr(p0_dbw: float, inr_db: float) -> float:
    """Noise standard deviation (dB) from INR = 10*log10(p0_linear / sigma^2)."""
    p0_lin = 10.0 ** (p0_dbw / 10.0)
    return float(np.sqrt(p0_lin * 10.0 ** (-inr_db / 10.0)))


def sample_observers(cfg: ScenarioConfig, rng) -> np.ndarray:
    """n_samples observer positions, uniform over the area, outside buildings."""
    area = cfg.area
    need = cfg.n_samples
    out = np.empty((need, 2))
    filled = 0
    for _ in range(1000):
        draw = rng.uniform(
            [area.xmin, area.ymin], [area.xmax, area.ymax], size=(need - filled, 2)
        )
        if cfg.regime == "raytrace" and cfg.buildings is not None:
            draw = draw[~cfg.buildings.contains(draw)]
        take = min(len(draw), need - filled)
        out[filled : filled + take] = draw[:take]
        filled += take
        if filled == need:
            return out
    raise RuntimeError("observer sampling failed; is the area covered by buildings?")


def noiseless_rss(cfg: ScenarioConfig, points) -> np.ndarray:
    """Regime-appropriate noiseless RSS at the given points."""
    if cfg.regime == "pathloss":
        return np.atleast_1d(pathloss_rss(points, cfg.jammer))
    return raytrace_rss_batch(points, cfg.jammer, cfg.buildings)


def generate_dataset(cfg: ScenarioConfig, rng=None) -> Dataset:
    """Simulate one measurement campaign and keep the top_k strongest samples.

    Noise is N(0, sigma^2) with sigma from the scenario INR; selection sorts
    by measured (noisy) power, descending, ties broken by observer index.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    pos = sample_observers(cfg, rng)
    clean = noiseless_rss(cfg, pos)
    sigma = sigma_from_inr(cfg.jammer.p0, cfg.inr_db)
    y = clean + sigma * rng.standard_normal(cfg.n_samples)
    keep = np.argsort(-y, kind="stable")[: cfg.top_k]
    return Dataset(
        positions=pos[keep],
        rss=y[keep],
        sigma=sigma,
        provenance=cfg.regime,
        selected_indices=keep,
    )
