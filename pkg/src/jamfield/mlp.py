"""Minimal feed-forward network with hand-written reverse-mode gradients, plus Adam.

The network is the data-driven correction term g(x; phi): tanh hidden layers,
linear output, parameters stored as one flat 64-bit vector so the estimators
can optimize it jointly with the source position.  Inputs are mapped into
[-1, 1]^D through an affine scaling fixed at construction time; raw meter
coordinates would saturate the tanh units.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

DEFAULT_HIDDEN = (200, 100)

PARAMS_FORMAT_VERSION = 1


def param_count(layer_sizes) -> int:
    """Number of weights and biases for the given layer widths."""
    sizes = list(layer_sizes)
    return sum((a + 1) * b for a, b in zip(sizes[:-1], sizes[1:]))


@dataclass
class MlpParams:
    """Flat parameter vector phi plus the layer shapes and input scaling it encodes."""

    layer_sizes: tuple[int, ...]
    phi: np.ndarray
    input_center: np.ndarray
    input_half_width: np.ndarray

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        self.phi = np.asarray(self.phi, dtype=float)
        self.input_center = np.asarray(self.input_center, dtype=float)
        self.input_half_width = np.asarray(self.input_half_width, dtype=float)
        if self.phi.shape != (param_count(self.layer_sizes),):
            raise ValueError(
                f"phi has length {self.phi.size}, layer sizes {self.layer_sizes} "
                f"need {param_count(self.layer_sizes)}"
            )
        if not np.all(np.isfinite(self.phi)):
            raise ValueError("phi must be finite")
        d = self.layer_sizes[0]
        if self.input_center.shape != (d,) or self.input_half_width.shape != (d,):
            raise ValueError("input scaling must match the input dimension")
        if np.any(self.input_half_width <= 0):
            raise ValueError("input_half_width must be positive")

    def layers(self):
        """Yield (W, b) views into the flat vector, one pair per layer."""
        off = 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            w = self.phi[off : off + n_in * n_out].reshape(n_in, n_out)
            off += n_in * n_out
            b = self.phi[off : off + n_out]
            off += n_out
            yield w, b


def init_mlp_params(layer_sizes, input_center, input_half_width, rng) -> MlpParams:
    """Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, zero biases."""
    phi = np.zeros(param_count(layer_sizes))
    params = MlpParams(tuple(layer_sizes), phi, input_center, input_half_width)
    for w, _ in params.layers():
        bound = np.sqrt(1.0 / w.shape[0])
        w[...] = rng.uniform(-bound, bound, size=w.shape)
    return params


def _scale_input(params: MlpParams, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.shape[1] != params.layer_sizes[0]:
        raise ValueError("input dimension does not match the network")
    return (xb - params.input_center) / params.input_half_width, single


def forward_cached(params: MlpParams, x):
    """Forward pass returning (outputs (N,), list of layer activations)."""
    h, single = _scale_input(params, x)
    acts = [h]
    layer_list = list(params.layers())
    for w, b in layer_list[:-1]:
        h = np.tanh(h @ w + b)
        acts.append(h)
    w, b = layer_list[-1]
    out = h @ w + b  # linear output layer
    return out[:, 0], acts, single


def mlp_forward(params: MlpParams, x):
    """Network output g(x; phi) in dB; x may be (D,) or a batch (N, D)."""
    out, _, single = forward_cached(params, x)
    return float(out[0]) if single else out


def backward_from_cache(params: MlpParams, acts, upstream) -> np.ndarray:
    """Reverse pass: flat gradient sum_n upstream_n * d out_n / d phi."""
    upstream = np.atleast_1d(np.asarray(upstream, dtype=float))
    layer_list = list(params.layers())
    grads = [None] * len(layer_list)
    delta = upstream[:, None]
    for li in range(len(layer_list) - 1, -1, -1):
        w, _ = layer_list[li]
        gw = acts[li].T @ delta
        gb = delta.sum(axis=0)
        grads[li] = (gw, gb)
        if li > 0:
            # propagate through the tanh that produced acts[li]
            delta = (delta @ w.T) * (1.0 - acts[li] ** 2)
    flat = np.empty_like(params.phi)
    off = 0
    for gw, gb in grads:
        flat[off : off + gw.size] = gw.ravel()
        off += gw.size
        flat[off : off + gb.size] = gb
        off += gb.size
    return flat


def mlp_gradient(params: MlpParams, x, upstream) -> np.ndarray:
    """Exact reverse-mode gradient of mlp_forward w.r.t. phi, scaled by upstream.

    For a batch, upstream is (N,) and the result is the sum of per-sample
    gradients weighted by upstream.
    """
    _, acts, _ = forward_cached(params, x)
    return backward_from_cache(params, acts, upstream)


def lipschitz_bound(params: MlpParams) -> float:
    """Upper bound on |g(x1)-g(x2)| / ||x1-x2|| from layer spectral norms."""
    bound = float(np.max(1.0 / params.input_half_width))
    for w, _ in params.layers():
        bound *= float(np.linalg.norm(w, 2))
    return bound


def save_mlp_params(path, params: MlpParams) -> None:
    """Serialize to .npz: format version, layer-shape header, scaling, flat phi."""
    np.savez(
        path,
        format_version=np.array(PARAMS_FORMAT_VERSION),
        layer_sizes=np.array(params.layer_sizes, dtype=np.int64),
        input_center=params.input_center,
        input_half_width=params.input_half_width,
        phi=params.phi,
    )


def load_mlp_params(path) -> MlpParams:
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != PARAMS_FORMAT_VERSION:
            raise ValueError(f"unsupported parameter file version {version}")
        return MlpParams(
            layer_sizes=tuple(int(s) for s in data["layer_sizes"]),
            phi=data["phi"],
            input_center=data["input_center"],
            input_half_width=data["input_half_width"],
        )


@dataclass
class AdamState:
    """Moment estimates and hyperparameters for one optimization run."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    lr: float = 0.4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        self.first_moment = np.asarray(self.first_moment, dtype=float)
        self.second_moment = np.asarray(self.second_moment, dtype=float)
        if self.first_moment.shape != self.second_moment.shape:
            raise ValueError("moment vectors must have equal length")
        if self.step_count < 0:
            raise ValueError("step_count must be non-negative")


def adam_init(n_params: int, lr: float = 0.4, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> AdamState:
    return AdamState(np.zeros(n_params), np.zeros(n_params), 0, lr, beta1, beta2, eps)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray):
    """One bias-corrected Adam update; returns (new params, state).

    The state is advanced in place.  A persistent zero gradient leaves the
    parameters unchanged.
    """
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape or params.shape != state.first_moment.shape:
        raise ValueError("params, grad and Adam state lengths must agree")
    state.step_count += 1
    state.first_moment *= state.beta1
    state.first_moment += (1.0 - state.beta1) * grad
    state.second_moment *= state.beta2
    state.second_moment += (1.0 - state.beta2) * grad * grad
    m_hat = state.first_moment / (1.0 - state.beta1**state.step_count)
    v_hat = state.second_moment / (1.0 - state.beta2**state.step_count)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, state
