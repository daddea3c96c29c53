"""RSS field models: log-distance pathloss, its far-field clamped variant, and gradients.

All powers are in dBW, all distances in meters. Noise sigma is always a
standard deviation in dB (sigma**2 is the variance).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

LN10 = float(np.log(10.0))


class SingularGeometryError(ValueError):
    """An observer coincides with the source, making the model singular."""


def position(coords) -> np.ndarray:
    """Validate and return a D-dimensional coordinate vector (meters)."""
    p = np.asarray(coords, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"position must be a 1-D vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("position coordinates must be finite")
    return p


@dataclass(frozen=True)
class JammerParams:
    """Transmitter truth: location theta (m), power p0 (dBW at 1 m), pathloss exponent gamma."""

    theta: np.ndarray
    p0: float
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "theta", position(self.theta))
        if not np.isfinite(self.p0):
            raise ValueError("p0 must be finite")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be positive and finite")


@dataclass(frozen=True)
class Observation:
    """One crowdsourced sample: observer location x and measured RSS y (dBW)."""

    x: np.ndarray
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", position(self.x))
        if not np.isfinite(self.y):
            raise ValueError("measured RSS must be finite")


@dataclass(frozen=True)
class Dataset:
    """Ordered RSS observations with their noise level and provenance.

    positions is (N, D), rss is (N,); index n is meaningful (selection order).
    provenance is "pathloss" or "raytrace".  selected_indices optionally
    records which of the originally sampled observers survived top-K
    selection.
    """

    positions: np.ndarray
    rss: np.ndarray
    sigma: float
    provenance: str = "pathloss"
    selected_indices: np.ndarray | None = dc_field(default=None, compare=False)

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        rss = np.asarray(self.rss, dtype=float).ravel()
        if pos.shape[0] != rss.shape[0] or pos.shape[0] == 0:
            raise ValueError("dataset needs matching, nonempty positions and rss")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(rss))):
            raise ValueError("dataset entries must be finite")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be a positive standard deviation")
        if self.provenance not in ("pathloss", "raytrace"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "rss", rss)

    def __len__(self) -> int:
        return self.rss.shape[0]

    @property
    def ndim(self) -> int:
        return self.positions.shape[1]

    @property
    def observations(self) -> list[Observation]:
        return [Observation(x, float(y)) for x, y in zip(self.positions, self.rss)]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned 2-D rectangle (meters), used as the survey area."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("area must have positive measure")

    @property
    def center(self) -> np.ndarray:
        return np.array([(self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0])

    @property
    def half_width(self) -> np.ndarray:
        return np.array([(self.xmax - self.xmin) / 2.0, (self.ymax - self.ymin) / 2.0])

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return (
            (pts[:, 0] >= self.xmin)
            & (pts[:, 0] <= self.xmax)
            & (pts[:, 1] >= self.ymin)
            & (pts[:, 1] <= self.ymax)
        )

    def grid(self, n: int) -> np.ndarray:
        """(n*n, 2) regular grid covering the rectangle, row-major in y then x."""
        xs = np.linspace(self.xmin, self.xmax, n)
        ys = np.linspace(self.ymin, self.ymax, n)
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


def distance(x, theta) -> np.ndarray | float:
    """Euclidean distance between observer position(s) x and source theta.

    x may be a single (D,) position or an (N, D) batch; returns a scalar or (N,).
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if x.shape[-1] != theta.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {theta.shape[-1]}")
    d = np.linalg.norm(x - theta, axis=-1)
    return float(d) if d.ndim == 0 else d


def pathloss_rss(x, jp: JammerParams) -> np.ndarray | float:
    """Noiseless pathloss RSS in dBW: p0 - 10*gamma*log10(d(x, theta)).

    Singular at x == theta; callers wanting safety use clamped_rss.
    """
    d = distance(x, jp.theta)
    if np.any(np.asarray(d) == 0.0):
        raise SingularGeometryError("observer coincides with the source (d = 0)")
    return jp.p0 - 10.0 * jp.gamma * np.log10(d)


def clamped_rss(x, jp: JammerParams, d_f: float = 1.0) -> np.ndarray | float:
    """Pathloss RSS with the distance clamped below the far-field limit d_f.

    Finite for every x, including x == theta, and equal to pathloss_rss
    wherever d >= d_f.
    """
    if not d_f > 0:
        raise ValueError("far-field distance d_f must be positive")
    d = np.maximum(distance(x, jp.theta), d_f)
    return jp.p0 - 10.0 * jp.gamma * np.log10(d)


def clamped_rss_grad_theta(x, jp: JammerParams, d_f: float = 1.0) -> np.ndarray:
    """Gradient of clamped_rss with respect to theta (dB per meter).

    Exactly zero inside the clamp disk (d < d_f); on the boundary d == d_f
    the far-field branch derivative is used, which avoids a spurious
    zero-gradient circle.
    """
    if not d_f > 0:
        raise ValueError("far-field distance d_f must be positive")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.shape[1] != jp.theta.shape[0]:
        raise ValueError("dimension mismatch between x and theta")
    diff = jp.theta[None, :] - xb
    d2 = np.sum(diff * diff, axis=1)
    far = d2 >= d_f * d_f
    grad = np.zeros_like(xb)
    if np.any(far):
        grad[far] = -10.0 * jp.gamma / LN10 * diff[far] / d2[far, None]
    return grad[0] if single else grad
