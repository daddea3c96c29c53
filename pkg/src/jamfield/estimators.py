"""Jammer localization: pathloss MLE and the augmented-model family.

Five methods share one full-batch Adam engine over a concatenated parameter
vector, with the source coordinates normalized into the same [-1, 1] box as
the network inputs so a single learning rate serves every block:

  mle_pathloss   multi-start ascent of the clamped-model log-likelihood
  apbm           joint (theta, phi), model f_bar(x; theta) + g(x; phi)
  apbm_p0_blind  joint (theta, p0, phi), transmit power unknown
  pl_only        theta alone, model f_bar
  nn_only        phi alone, model g; location read off the learned field peak

The learning rate decays geometrically over the epoch budget.  Constant-lr
Adam orbits the optimum at a radius proportional to the step size, so without
the decay sub-meter positions are unreachable; with a constant exploration
phase the high-dimensional network block drifts by (lr x epochs) per weight,
which saturates the tanh units beyond recovery.  Geometric decay gives every
length scale a share of the budget.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import Dataset, JammerParams, Rect, clamped_rss, clamped_rss_grad_theta
from .mlp import (
    DEFAULT_HIDDEN,
    MlpParams,
    adam_init,
    adam_step,
    backward_from_cache,
    forward_cached,
    init_mlp_params,
    mlp_forward,
)

KINDS = ("mle_pathloss", "apbm", "apbm_p0_blind", "pl_only", "nn_only")

# Orders of magnitude the learning rate decays over the epoch budget.
DECAY_ORDERS = 7.0

# Scale of the transmit-power coordinate when p0 is estimated.  Adam moves a
# coordinate by roughly the learning rate per epoch, so the total travel under
# the geometric decay is ~ lr * epochs / (DECAY_ORDERS * ln 10) normalized
# units; 120 dB per unit lets p0 close a 20-30 dB initialization gap within
# the default budgets.
P0_SCALE_DB = 120.0

# Convergence: relative change of the running best cost over this many epochs,
# checked only once the schedule has decayed the step size by CONV_LR_GATE
# (earlier the best cost plateaus while Adam still orbits the optimum, which
# would trip the test far too early).
CONV_WINDOW = 10
CONV_RTOL = 1e-9
CONV_LR_GATE = 1e-4

NN_ONLY_GRID = 101  # grid pitch 1% of the area side for the field-peak readout

# The field-peak readout only scans grid cells within this many grid pitches
# of an observation.  Away from the data the fitted network is pure
# extrapolation; its ridge-regularized affine component crests at an area
# boundary, and even inside the observations' bounding box the unsupported
# gaps grow spurious bumps.
NN_ONLY_SUPPORT_PITCHES = 2.0


class EstimationError(RuntimeError):
    """Optimization aborted (non-finite cost)."""


@dataclass(frozen=True)
class EstimatorSpec:
    """Which method to run and with what training budget."""

    kind: str
    beta: float = 1.0
    epochs: int = 200
    lr: float = 0.4
    n_starts: int = 1
    init: JammerParams | None = None
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.epochs <= 0 or self.lr <= 0 or self.n_starts < 1:
            raise ValueError("need epochs > 0, lr > 0, n_starts >= 1")


@dataclass
class EstimateReport:
    """Outcome of one estimation run."""

    estimator: str
    theta_hat: np.ndarray
    p0_hat: float | None
    phi_hat: MlpParams | None
    final_cost: float
    converged: bool
    iterations: int
    wall_time: float
    cost_history: np.ndarray | None = dc_field(default=None, repr=False)

    def to_dict(self, include_phi: bool = False) -> dict:
        out = {
            "estimator": self.estimator,
            "theta_hat": np.asarray(self.theta_hat).tolist(),
            "p0_hat": self.p0_hat,
            "final_cost": self.final_cost,
            "converged": self.converged,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
        }
        if include_phi and self.phi_hat is not None:
            out["phi_hat"] = {
                "layer_sizes": list(self.phi_hat.layer_sizes),
                "phi": self.phi_hat.phi.tolist(),
                "input_center": self.phi_hat.input_center.tolist(),
                "input_half_width": self.phi_hat.input_half_width.tolist(),
            }
        return out

    def to_json(self, include_phi: bool = False) -> str:
        return json.dumps(self.to_dict(include_phi=include_phi))


def log_likelihood(data: Dataset, jp: JammerParams, d_f: float = 1.0) -> float:
    """Gaussian log-likelihood of the dataset under the clamped pathloss model.

    -(N/2) ln(2 pi sigma^2) - (1/2 sigma^2) sum (y_n - f_bar(x_n))^2.
    Finite for every theta because f_bar is.  Passing d_f = 0 evaluates the
    raw, unclamped model instead, which diverges when theta hits an observer.
    """
    if d_f == 0.0:
        d = np.linalg.norm(data.positions - jp.theta, axis=1)
        with np.errstate(divide="ignore"):
            model = jp.p0 - 10.0 * jp.gamma * np.log10(d)
    else:
        model = clamped_rss(data.positions, jp, d_f)
    resid = data.rss - model
    n = len(data)
    s2 = data.sigma**2
    return float(-0.5 * n * np.log(2.0 * np.pi * s2) - 0.5 * np.sum(resid**2) / s2)


def apbm_cost(data: Dataset, jp: JammerParams, phi: MlpParams, beta: float,
              d_f: float = 1.0) -> float:
    """Regularized data misfit: sum (y - f_bar - g)^2 + beta * ||phi||^2."""
    resid = data.rss - clamped_rss(data.positions, jp, d_f) - mlp_forward(phi, data.positions)
    return float(np.sum(resid**2) + beta * float(phi.phi @ phi.phi))


def _lr_schedule(epoch: int, total: int, lr0: float) -> float:
    if total <= 1:
        return lr0
    return lr0 * 10.0 ** (-DECAY_ORDERS * epoch / (total - 1))


def _strongest_positions(data: Dataset, count: int) -> np.ndarray:
    order = np.argsort(-data.rss, kind="stable")
    idx = [order[i % len(order)] for i in range(count)]
    return data.positions[idx]


def _identifiable(data: Dataset) -> bool:
    pts = np.unique(data.positions, axis=0)
    if pts.shape[0] < 3:
        return False
    centered = pts - pts.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return s[-1] > 1e-9 * max(1.0, s[0])


class _JointProblem:
    """Cost and gradient of the concatenated (theta_norm, p0_norm, phi) vector.

    The cost is always the squared-error form (plus the phi regularizer);
    for the MLE it differs from the negative log-likelihood only by an affine
    map with a 1/(2 sigma^2) slope, which Adam's normalized steps ignore and
    which would otherwise dwarf the relative convergence test at high INR.
    """

    def __init__(self, kind, data, d_f, area, gamma, p0_known, beta, net: MlpParams | None,
                 p0_init: float = 0.0):
        self.kind = kind
        self.data = data
        self.d_f = d_f
        self.center = area.center
        self.half_width = area.half_width
        self.gamma = gamma
        self.p0_known = p0_known
        self.p0_init = p0_init
        self.beta = beta
        self.net = net
        self.use_theta = kind != "nn_only"
        self.use_p0 = kind == "apbm_p0_blind"
        self.use_phi = kind in ("apbm", "apbm_p0_blind", "nn_only")
        self.n_theta = 2 if self.use_theta else 0
        self.n_p0 = 1 if self.use_p0 else 0
        self.n_phi = net.phi.size if self.use_phi else 0

    @property
    def size(self) -> int:
        return self.n_theta + self.n_p0 + self.n_phi

    def theta_from(self, vec: np.ndarray) -> np.ndarray:
        return self.center + self.half_width * vec[: self.n_theta]

    def pack_theta(self, theta: np.ndarray) -> np.ndarray:
        return (np.asarray(theta, dtype=float) - self.center) / self.half_width

    def p0_from(self, vec: np.ndarray) -> float:
        return self.p0_init + P0_SCALE_DB * float(vec[self.n_theta])

    def cost_grad(self, vec: np.ndarray):
        data = self.data
        grad = np.empty_like(vec)
        resid = data.rss.copy()
        if self.use_theta:
            theta = self.theta_from(vec)
            jp = JammerParams(theta, self.p0_from(vec) if self.use_p0 else self.p0_known,
                              self.gamma)
            resid -= clamped_rss(data.positions, jp, self.d_f)
        if self.use_phi:
            phi_vec = vec[self.n_theta + self.n_p0 :]
            net = MlpParams(self.net.layer_sizes, phi_vec, self.net.input_center,
                            self.net.input_half_width)
            g, acts, _ = forward_cached(net, data.positions)
            resid -= g
        cost = float(resid @ resid)
        if self.use_theta:
            dmodel = clamped_rss_grad_theta(data.positions, jp, self.d_f)
            grad[: self.n_theta] = -2.0 * (dmodel.T @ resid) * self.half_width
        if self.use_p0:
            grad[self.n_theta] = -2.0 * np.sum(resid) * P0_SCALE_DB
        if self.use_phi:
            gphi = -2.0 * backward_from_cache(net, acts, resid)
            gphi += 2.0 * self.beta * phi_vec
            grad[self.n_theta + self.n_p0 :] = gphi
            cost += self.beta * float(phi_vec @ phi_vec)
        return cost, grad


def _run_adam(problem: _JointProblem, vec0: np.ndarray, epochs: int, lr: float):
    """Full-batch Adam with the warmup/decay schedule; tracks the best iterate.

    Returns (best vec, best cost, best-so-far cost per epoch, converged flag,
    epochs actually run).  Raises EstimationError on a non-finite cost.
    """
    vec = vec0.copy()
    state = adam_init(vec.size, lr=lr)
    best_vec = vec.copy()
    best_cost = np.inf
    history = np.empty(epochs)
    converged = False
    ran = 0
    for epoch in range(epochs):
        cost, grad = problem.cost_grad(vec)
        if not np.isfinite(cost):
            raise EstimationError(
                f"non-finite cost at epoch {epoch} (kind={problem.kind})"
            )
        if cost < best_cost:
            best_cost = cost
            best_vec = vec.copy()
        history[epoch] = best_cost
        ran = epoch + 1
        lr_now = _lr_schedule(epoch, epochs, lr)
        if epoch >= CONV_WINDOW and lr_now <= CONV_LR_GATE * lr:
            prev = history[epoch - CONV_WINDOW]
            if abs(prev - best_cost) <= CONV_RTOL * max(1.0, abs(best_cost)):
                converged = True
                break
        state.lr = lr_now
        vec, state = adam_step(state, vec, grad)
    return best_vec, best_cost, history[:ran], converged, ran


def mle_estimate(data: Dataset, p0: float, gamma: float, d_f: float,
                 spec: EstimatorSpec, area: Rect, rng=None) -> EstimateReport:
    """Maximum-likelihood position estimate with known p0 and gamma.

    Multi-start gradient ascent: each start is one of the n_starts strongest
    observer locations jittered by +-2*d_f per coordinate.  Returns the start
    with the lowest final negative log-likelihood (ties: lowest start index).
    """
    if spec.kind != "mle_pathloss":
        raise ValueError("spec.kind must be 'mle_pathloss'")
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    t0 = time.perf_counter()
    problem = _JointProblem("mle_pathloss", data, d_f, area, gamma, p0, 0.0, None)
    starts = _strongest_positions(data, spec.n_starts)
    if spec.init is not None:
        starts = np.vstack([np.atleast_2d(spec.init.theta), starts])[: spec.n_starts]
    best = None
    total_iters = 0
    for s_idx in range(starts.shape[0]):
        theta0 = starts[s_idx] + rng.uniform(-2.0 * d_f, 2.0 * d_f, size=2)
        vec0 = problem.pack_theta(theta0)
        try:
            vec, cost, hist, conv, ran = _run_adam(problem, vec0, spec.epochs, spec.lr)
        except EstimationError:
            continue
        total_iters += ran
        if best is None or cost < best[1]:
            best = (vec, cost, hist, conv)
    if best is None:
        return EstimateReport(
            estimator="mle_pathloss",
            theta_hat=np.full(2, np.nan),
            p0_hat=None,
            phi_hat=None,
            final_cost=np.inf,
            converged=False,
            iterations=total_iters,
            wall_time=time.perf_counter() - t0,
        )
    vec, cost, hist, conv = best
    if not _identifiable(data):
        conv = False  # flat ridge: position not uniquely determined
    # the optimizer works on the squared error; report in -log-likelihood units
    n, s2 = len(data), data.sigma**2
    offset = 0.5 * n * np.log(2.0 * np.pi * s2)
    return EstimateReport(
        estimator="mle_pathloss",
        theta_hat=problem.theta_from(vec),
        p0_hat=None,
        phi_hat=None,
        final_cost=offset + 0.5 * cost / s2,
        converged=conv,
        iterations=total_iters,
        wall_time=time.perf_counter() - t0,
        cost_history=offset + 0.5 * hist / s2,
    )


def apbm_fit(data: Dataset, spec: EstimatorSpec, d_f: float, area: Rect,
             known: JammerParams | None = None, rng=None) -> EstimateReport:
    """Joint fit of the augmented measurement model by full-batch Adam.

    Parameter blocks by kind: apbm -> (theta, phi); apbm_p0_blind ->
    (theta, p0, phi); pl_only -> theta; nn_only -> phi, with the position
    then read off a 101 x 101 grid argmax of the learned field over the area.

    `known` carries p0 and gamma (same information the MLE gets); its theta
    is ignored.  spec.init overrides the initial theta and, for the blind
    variant, the initial p0.  Deterministic given spec.seed / rng.
    """
    if spec.kind not in ("apbm", "apbm_p0_blind", "pl_only", "nn_only"):
        raise ValueError(f"apbm_fit cannot run kind {spec.kind!r}")
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    t0 = time.perf_counter()
    gamma = known.gamma if known is not None else 2.0
    p0_known = known.p0 if known is not None else float(np.max(data.rss))
    use_phi = spec.kind in ("apbm", "apbm_p0_blind", "nn_only")
    sizes = (data.ndim, *spec.hidden, 1)
    p0_init = spec.init.p0 if (spec.init is not None) else p0_known

    starts = _strongest_positions(data, spec.n_starts)
    if spec.init is not None:
        starts = np.vstack([np.atleast_2d(spec.init.theta), starts])[: spec.n_starts]

    best = None
    problem = None
    total_iters = 0
    for s_idx in range(spec.n_starts):
        # every restart gets fresh network weights as well as a fresh theta
        net = init_mlp_params(sizes, area.center, area.half_width, rng) if use_phi else None
        problem = _JointProblem(spec.kind, data, d_f, area, gamma, p0_known, spec.beta, net,
                                p0_init=p0_init)
        vec0 = np.zeros(problem.size)
        if problem.use_theta:
            theta0 = starts[s_idx] + rng.uniform(-2.0 * d_f, 2.0 * d_f, size=2)
            vec0[: problem.n_theta] = problem.pack_theta(theta0)
        if problem.use_phi:
            vec0[problem.n_theta + problem.n_p0 :] = net.phi
        vec, cost, hist, conv, ran = _run_adam(problem, vec0, spec.epochs, spec.lr)
        total_iters += ran
        if best is None or cost < best[1]:
            best = (vec, cost, hist, conv, net)
    vec, cost, hist, conv, net = best

    phi_hat = None
    if use_phi:
        phi_hat = MlpParams(net.layer_sizes, vec[problem.n_theta + problem.n_p0 :].copy(),
                            net.input_center, net.input_half_width)
    if spec.kind == "nn_only":
        grid = area.grid(NN_ONLY_GRID)
        pitch = max(area.xmax - area.xmin, area.ymax - area.ymin) / (NN_ONLY_GRID - 1)
        d2 = ((grid[:, None, :] - data.positions[None, :, :]) ** 2).sum(axis=2)
        supported = d2.min(axis=1) <= (NN_ONLY_SUPPORT_PITCHES * pitch) ** 2
        scan = grid[supported]
        theta_hat = scan[int(np.argmax(mlp_forward(phi_hat, scan)))]
    else:
        theta_hat = problem.theta_from(vec)
    return EstimateReport(
        estimator=spec.kind,
        theta_hat=theta_hat,
        p0_hat=problem.p0_from(vec) if problem.use_p0 else None,
        phi_hat=phi_hat,
        final_cost=cost,
        converged=conv,
        iterations=total_iters,
        wall_time=time.perf_counter() - t0,
        cost_history=hist,
    )


def run_estimator(data: Dataset, spec: EstimatorSpec, d_f: float, area: Rect,
                  known: JammerParams | None = None, rng=None) -> EstimateReport:
    """Dispatch one estimator run; `known` supplies p0/gamma where required."""
    if spec.kind == "mle_pathloss":
        if known is None:
            raise ValueError("the MLE needs known p0 and gamma")
        return mle_estimate(data, known.p0, known.gamma, d_f, spec, area, rng)
    return apbm_fit(data, spec, d_f, area, known=known, rng=rng)
