"""Fisher information and Cramer-Rao bounds for pathloss source localization.

Model: y_n = p0 - 10*gamma*log10(d(x_n, theta)) + noise, noise iid N(0, sigma^2).
With the covariance constant in theta, the FIM reduces to the outer-product
form implemented here; the 2-D bound has the closed form with sums a, b, c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import LN10, JammerParams, SingularGeometryError, position


@dataclass(frozen=True)
class FisherMatrix:
    """D x D Fisher information matrix evaluated at theta."""

    entries: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        t = position(self.theta)
        if m.shape != (t.size, t.size):
            raise ValueError("FIM must be D x D for a D-dimensional theta")
        if not np.allclose(m, m.T, atol=1e-10 * max(1.0, float(np.abs(m).max()))):
            raise ValueError("FIM must be symmetric")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "theta", t)


@dataclass(frozen=True)
class CrbReport:
    """Per-dimension variance floor (m^2) and its square root (m)."""

    per_dimension_variance: np.ndarray
    per_dimension_rmse_bound: np.ndarray


def _geometry(observers, theta):
    x = np.atleast_2d(np.asarray(observers, dtype=float))
    diff = theta[None, :] - x
    d2 = np.sum(diff * diff, axis=1)
    if np.any(d2 == 0.0):
        raise SingularGeometryError("an observer coincides with theta")
    return diff, d2


def fim_pathloss(observers, jp: JammerParams, sigma: float) -> FisherMatrix:
    """FIM of the pathloss model: (100*gamma^2)/(sigma^2*ln(10)^2) * sum outer(u_n)/d_n^4.

    u_n = theta - x_n.  Symmetric positive semi-definite by construction.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    diff, d2 = _geometry(observers, jp.theta)
    scaled = diff / d2[:, None]  # each row u_n / d_n^2
    scale = 100.0 * jp.gamma**2 / (sigma**2 * LN10**2)
    return FisherMatrix(entries=scale * (scaled.T @ scaled), theta=jp.theta)


def crb_2d(observers, jp: JammerParams, sigma: float) -> CrbReport:
    """Closed-form 2-D position bound.

    var(theta1_hat) >= sigma^2 ln(10)^2 / (100 gamma^2) * b / (a*b - c^2)
    var(theta2_hat) >= same factor * a / (a*b - c^2)
    with a, b, c the sums of (theta_i - x_n_i) products over d^4.
    """
    if jp.theta.size != 2:
        raise ValueError("crb_2d requires a 2-D theta")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    diff, d2 = _geometry(observers, jp.theta)
    d4 = d2 * d2
    a = float(np.sum(diff[:, 0] ** 2 / d4))
    b = float(np.sum(diff[:, 1] ** 2 / d4))
    c = float(np.sum(diff[:, 0] * diff[:, 1] / d4))
    det = a * b - c * c
    if det <= 0 or not np.isfinite(det):
        raise SingularGeometryError(
            "degenerate observer geometry: a*b - c^2 <= 0 (collinear through theta)"
        )
    factor = sigma**2 * LN10**2 / (100.0 * jp.gamma**2)
    var = np.array([factor * b / det, factor * a / det])
    return CrbReport(per_dimension_variance=var, per_dimension_rmse_bound=np.sqrt(var))


def fim_numeric(mean_fn, theta, sigma: float, step: float = 1e-4) -> FisherMatrix:
    """Numeric FIM J.T @ J / sigma^2 for a Gaussian model with constant covariance.

    mean_fn maps theta to the stacked mean vector of all observations; the
    Jacobian J is formed with central finite differences of size `step`.
    Serves as the independent oracle for fim_pathloss.
    """
    theta = position(theta)
    cols = []
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = step
        hi = np.asarray(mean_fn(theta + e), dtype=float).ravel()
        lo = np.asarray(mean_fn(theta - e), dtype=float).ravel()
        cols.append((hi - lo) / (2.0 * step))
    jac = np.column_stack(cols)
    entries = jac.T @ jac / sigma**2
    entries = 0.5 * (entries + entries.T)  # kill finite-difference asymmetry
    return FisherMatrix(entries=entries, theta=theta)
