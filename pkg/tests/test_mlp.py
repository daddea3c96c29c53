import numpy as np
import pytest

from jamfield.mlp import (
    AdamState,
    MlpParams,
    adam_init,
    adam_step,
    init_mlp_params,
    lipschitz_bound,
    load_mlp_params,
    mlp_forward,
    mlp_gradient,
    param_count,
    save_mlp_params,
)

CENTER = np.array([500.0, 500.0])
HALF = np.array([500.0, 500.0])


def make_params(rng, sizes=(2, 8, 5, 1)):
    return init_mlp_params(sizes, CENTER, HALF, rng)


def fd_gradient(params, x, upstream, step=1e-5):
    """Central finite-difference oracle for the phi-gradient."""
    g = np.zeros_like(params.phi)
    for k in range(params.phi.size):
        phi_hi = params.phi.copy()
        phi_hi[k] += step
        phi_lo = params.phi.copy()
        phi_lo[k] -= step
        hi = MlpParams(params.layer_sizes, phi_hi, params.input_center, params.input_half_width)
        lo = MlpParams(params.layer_sizes, phi_lo, params.input_center, params.input_half_width)
        fh = np.atleast_1d(mlp_forward(hi, x))
        fl = np.atleast_1d(mlp_forward(lo, x))
        g[k] = np.sum(np.atleast_1d(upstream) * (fh - fl)) / (2.0 * step)
    return g


class TestForward:
    def test_parameter_count_for_reference_architecture(self):
        # 2*200 + 200 + 200*100 + 100 + 100*1 + 1
        expected = 2 * 200 + 200 + 200 * 100 + 100 + 100 * 1 + 1
        assert expected == 20801
        assert param_count((2, 200, 100, 1)) == expected

    def test_zero_phi_is_zero_function(self):
        params = MlpParams((2, 200, 100, 1), np.zeros(20801), CENTER, HALF)
        rng = np.random.default_rng(0)
        pts = rng.uniform(0, 1000, size=(50, 2))
        np.testing.assert_array_equal(mlp_forward(params, pts), np.zeros(50))

    def test_output_bias_gives_constant_function(self):
        params = MlpParams((2, 200, 100, 1), np.zeros(20801), CENTER, HALF)
        params.phi[-1] = 4.25  # output bias is the last flat entry
        rng = np.random.default_rng(1)
        pts = rng.uniform(0, 1000, size=(20, 2))
        np.testing.assert_allclose(mlp_forward(params, pts), np.full(20, 4.25))

    def test_tanh_saturation_bounds_hidden_layer(self):
        rng = np.random.default_rng(2)
        params = make_params(rng, sizes=(2, 6, 1))
        w1, b1 = next(params.layers())
        w1 *= 1e6
        u = (np.array([[432.0, 17.0]]) - CENTER) / HALF
        hidden = np.tanh(u @ w1 + b1)
        assert np.all(np.abs(hidden) <= 1.0)

    def test_single_and_batch_agree(self):
        rng = np.random.default_rng(3)
        params = make_params(rng)
        pts = rng.uniform(0, 1000, size=(7, 2))
        batch = mlp_forward(params, pts)
        singles = np.array([mlp_forward(params, p) for p in pts])
        np.testing.assert_allclose(batch, singles)

    def test_deterministic_init(self):
        p1 = init_mlp_params((2, 20, 10, 1), CENTER, HALF, np.random.default_rng(77))
        p2 = init_mlp_params((2, 20, 10, 1), CENTER, HALF, np.random.default_rng(77))
        np.testing.assert_array_equal(p1.phi, p2.phi)


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            params = make_params(rng)
            params.phi[:] = rng.normal(scale=0.5, size=params.phi.size)
            x = rng.uniform(0, 1000, size=2)
            upstream = rng.normal()
            g = mlp_gradient(params, x, upstream)
            g_fd = fd_gradient(params, x, upstream)
            denom = max(np.linalg.norm(g_fd), 1e-12)
            assert np.linalg.norm(g - g_fd) / denom < 1e-5

    def test_batch_gradient_is_sum_of_singles(self):
        rng = np.random.default_rng(5)
        params = make_params(rng)
        pts = rng.uniform(0, 1000, size=(4, 2))
        ups = rng.normal(size=4)
        batch = mlp_gradient(params, pts, ups)
        summed = sum(mlp_gradient(params, p, u) for p, u in zip(pts, ups))
        np.testing.assert_allclose(batch, summed, atol=1e-12)

    def test_zero_upstream(self):
        rng = np.random.default_rng(6)
        params = make_params(rng)
        g = mlp_gradient(params, np.array([100.0, 100.0]), 0.0)
        np.testing.assert_array_equal(g, np.zeros_like(params.phi))

    def test_output_bias_entry_equals_upstream(self):
        rng = np.random.default_rng(7)
        params = make_params(rng)
        g = mlp_gradient(params, np.array([250.0, 750.0]), 1.7)
        assert g[-1] == pytest.approx(1.7)


class TestLipschitz:
    def test_bound_holds_on_sampled_pairs(self):
        rng = np.random.default_rng(8)
        params = make_params(rng, sizes=(2, 30, 10, 1))
        params.phi[:] = rng.normal(scale=0.4, size=params.phi.size)
        bound = lipschitz_bound(params)
        pts = rng.uniform(0, 1000, size=(80, 2))
        vals = mlp_forward(params, pts)
        for i in range(0, 80, 2):
            gap = abs(vals[i] - vals[i + 1])
            dist = np.linalg.norm(pts[i] - pts[i + 1])
            assert gap <= bound * dist + 1e-9


class TestSerialization:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        params = make_params(rng)
        path = tmp_path / "phi.npz"
        save_mlp_params(path, params)
        loaded = load_mlp_params(path)
        assert loaded.layer_sizes == params.layer_sizes
        np.testing.assert_array_equal(loaded.phi, params.phi)
        np.testing.assert_array_equal(loaded.input_center, params.input_center)

    def test_version_check(self, tmp_path):
        rng = np.random.default_rng(10)
        params = make_params(rng)
        path = tmp_path / "phi.npz"
        np.savez(
            path,
            format_version=np.array(99),
            layer_sizes=np.array(params.layer_sizes),
            input_center=params.input_center,
            input_half_width=params.input_half_width,
            phi=params.phi,
        )
        with pytest.raises(ValueError):
            load_mlp_params(path)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            MlpParams((2, 200, 100, 1), np.zeros(11), CENTER, HALF)


class TestAdam:
    def test_first_step_is_signed_lr(self):
        state = adam_init(3, lr=0.1)
        params = np.array([1.0, -2.0, 0.5])
        grad = np.array([3.0, -0.2, 1e-4])
        new_params, state = adam_step(state, params, grad)
        # bias-corrected first step is -lr * g / (|g| + eps') ~ -lr * sign(g)
        np.testing.assert_allclose(new_params - params, -0.1 * np.sign(grad), rtol=1e-3)
        assert state.step_count == 1

    def test_zero_gradient_never_moves(self):
        state = adam_init(4, lr=0.5)
        params = np.arange(4.0)
        for _ in range(50):
            params, state = adam_step(state, params, np.zeros(4))
        np.testing.assert_array_equal(params, np.arange(4.0))

    def test_identical_runs_identical_trajectories(self):
        def run():
            rng = np.random.default_rng(123)
            state = adam_init(5, lr=0.05)
            params = np.zeros(5)
            trace = []
            for _ in range(30):
                grad = rng.normal(size=5)
                params, state = adam_step(state, params, grad)
                trace.append(params.copy())
            return np.array(trace)

        np.testing.assert_array_equal(run(), run())

    def test_length_mismatch(self):
        state = adam_init(3)
        with pytest.raises(ValueError):
            adam_step(state, np.zeros(3), np.zeros(4))

    def test_state_validation(self):
        with pytest.raises(ValueError):
            AdamState(np.zeros(3), np.zeros(4))
