"""Tests for the MLP core: init, activations, backprop, Adam."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from explab.errors import NumericError
from explab.nn import (
    AdamState,
    ChunkedScorer,
    MlpParams,
    adam_step,
    elu,
    elu_grad,
    init_mlp,
    mlp_backward,
    mlp_forward,
    xavier_init,
)

from _oracles import finite_diff_grads, max_relative_grad_error


class TestXavierInit:
    def test_single_entry_within_bound(self):
        w = xavier_init(1, 1, rng=7)
        assert w.shape == (1, 1)
        assert abs(w[0, 0]) <= np.sqrt(3.0)  # sqrt(6/2)

    def test_deterministic_for_fixed_seed(self):
        a = xavier_init(256, 64, rng=7)
        b = xavier_init(256, 64, rng=7)
        assert np.array_equal(a, b)

    def test_variance_matches_glorot_rule(self):
        # Var(U(-a, a)) = a^2/3 = 2/(in+out); 10,000 draws, 20% slack.
        w = xavier_init(100, 100, rng=123)
        target = 2.0 / 200.0
        assert abs(w.var() - target) / target < 0.2

    def test_all_draws_within_limit(self):
        w = xavier_init(30, 50, rng=5)
        limit = np.sqrt(6.0 / 80.0)
        assert np.all(np.abs(w) <= limit)

    @pytest.mark.parametrize("dims", [(0, 4), (4, 0), (0, 0), (-1, 3)])
    def test_zero_dimension_rejected(self, dims):
        with pytest.raises(ValueError):
            xavier_init(*dims, rng=0)

    def test_generator_shares_stream(self):
        gen = np.random.default_rng(9)
        a = xavier_init(3, 3, rng=gen)
        b = xavier_init(3, 3, rng=gen)
        assert not np.array_equal(a, b)


class TestElu:
    def test_closed_form_values(self):
        assert elu(0.0) == 0.0
        assert elu(1.0) == 1.0
        assert np.isclose(elu(-1.0), np.exp(-1.0) - 1.0)
        assert np.isclose(elu(-1.0), -0.6321, atol=5e-5)

    def test_alpha_scales_negative_branch(self):
        assert np.isclose(elu(-2.0, alpha=0.5), 0.5 * np.expm1(-2.0))
        assert elu(3.0, alpha=0.5) == 3.0

    def test_grad_values(self):
        assert elu_grad(2.0) == 1.0
        assert elu_grad(0.0) == 1.0
        assert np.isclose(elu_grad(-1.0), np.exp(-1.0))

    @given(
        st.floats(-10, 10),
        st.floats(-10, 10),
    )
    @settings(max_examples=200, deadline=None)
    def test_one_lipschitz(self, x, y):
        assert abs(elu(x) - elu(y)) <= abs(x - y) + 1e-12

    @given(st.floats(-10, 10))
    @settings(max_examples=100, deadline=None)
    def test_grad_matches_numeric_derivative(self, x):
        h = 1e-6
        numeric = (elu(x + h) - elu(x - h)) / (2 * h)
        assert np.isclose(elu_grad(x), numeric, atol=1e-5)


def _reference_forward(params, batch):
    """Straightforward forward pass via the public elu()."""
    a1 = elu(batch @ params.w1 + params.b1)
    a2 = elu(a1 @ params.w2 + params.b2)
    return (a2 @ params.w3 + params.b3).ravel()


class TestMlpForward:
    def test_zero_network_outputs_zero(self):
        p = init_mlp(3, (8, 4), rng=0)
        zero = p.zeros_like()
        out, _ = mlp_forward(zero, np.random.default_rng(0).standard_normal((5, 3)))
        assert np.array_equal(out, np.zeros(5))

    def test_identity_chain_passes_positive_input(self):
        # 1-unit layers with w=1, b=0: elu(elu(2)) = 2, final linear keeps it.
        ones = MlpParams(
            w1=np.ones((1, 1)), b1=np.zeros(1),
            w2=np.ones((1, 1)), b2=np.zeros(1),
            w3=np.ones((1, 1)), b3=np.zeros(1),
        )
        out, _ = mlp_forward(ones, np.array([[2.0]]))
        assert out[0] == pytest.approx(2.0, abs=1e-15)

    def test_matches_reference_elu_forward(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            in_dim = int(rng.integers(1, 9))
            p = init_mlp(in_dim, (int(rng.integers(1, 9)), int(rng.integers(1, 9))),
                         rng=int(rng.integers(1000)))
            x = rng.standard_normal((int(rng.integers(1, 12)), in_dim)) * 3
            out, _ = mlp_forward(p, x)
            np.testing.assert_allclose(out, _reference_forward(p, x), atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        p = init_mlp(4, (8, 4), rng=0)
        with pytest.raises(ValueError, match="columns"):
            mlp_forward(p, np.zeros((3, 5)))

    def test_finite_inputs_give_finite_outputs(self):
        rng = np.random.default_rng(3)
        p = init_mlp(6, (16, 8), rng=1)
        x = rng.uniform(-1e6, 1e6, size=(64, 6))
        out, cache = mlp_forward(p, x)
        assert np.isfinite(out).all()
        for arr in (cache.a1, cache.a2, cache.d1, cache.d2):
            assert np.isfinite(arr).all()


class TestMlpBackward:
    def test_zero_output_grads_give_zero_grads(self):
        p = init_mlp(3, (5, 4), rng=2)
        x = np.random.default_rng(0).standard_normal((6, 3))
        _, cache = mlp_forward(p, x)
        grads = mlp_backward(p, cache, np.zeros(6))
        for _, g in grads.items():
            assert np.array_equal(g, np.zeros_like(g))

    def test_duplicated_rows_double_the_gradient(self):
        p = init_mlp(4, (6, 3), rng=5)
        row = np.random.default_rng(1).standard_normal((1, 4))
        _, c1 = mlp_forward(p, row)
        g1 = mlp_backward(p, c1, np.array([1.0]))
        _, c2 = mlp_forward(p, np.vstack([row, row]))
        g2 = mlp_backward(p, c2, np.array([1.0, 1.0]))
        for name, g in g2.items():
            np.testing.assert_allclose(g, 2.0 * getattr(g1, name), rtol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            dims = rng.integers(1, 9, size=3)
            p = init_mlp(int(dims[0]), (int(dims[1]), int(dims[2])),
                         rng=int(rng.integers(10_000)))
            x = rng.standard_normal((int(rng.integers(1, 9)), int(dims[0])))
            g_out = rng.standard_normal(x.shape[0])
            _, cache = mlp_forward(p, x)
            analytic = mlp_backward(p, cache, g_out)
            numeric = finite_diff_grads(p, x, g_out)
            assert max_relative_grad_error(analytic, numeric) < 1e-4

    def test_mismatched_grads_rejected(self):
        p = init_mlp(3, (5, 4), rng=2)
        _, cache = mlp_forward(p, np.zeros((6, 3)))
        with pytest.raises(ValueError):
            mlp_backward(p, cache, np.zeros(7))

    def test_stale_cache_rejected(self):
        p_small = init_mlp(3, (5, 4), rng=2)
        p_big = init_mlp(3, (9, 4), rng=2)
        _, cache = mlp_forward(p_small, np.zeros((6, 3)))
        with pytest.raises(ValueError, match="cache"):
            mlp_backward(p_big, cache, np.zeros(6))


class TestAdam:
    def _setup(self, seed=0):
        p = init_mlp(3, (4, 2), rng=seed)
        return p, AdamState.init(p, lr=1e-3)

    def test_zero_gradient_leaves_params_unchanged(self):
        p, state = self._setup()
        before = p.copy()
        adam_step(p, p.zeros_like(), state)
        assert state.t == 1
        for name, arr in p.items():
            assert np.array_equal(arr, getattr(before, name))

    @pytest.mark.parametrize("g", [1e-3, 1.0, 100.0, -7.0])
    def test_first_step_magnitude_is_lr(self, g):
        p, state = self._setup()
        before = p.copy()
        grads = p.zeros_like()
        for _, arr in grads.items():
            arr.fill(g)
        adam_step(p, grads, state)
        for name, arr in p.items():
            delta = np.abs(arr - getattr(before, name))
            np.testing.assert_allclose(delta, state.lr, rtol=0.02)

    def test_equal_gradients_get_equal_updates(self):
        p, state = self._setup()
        before = p.copy()
        grads = p.zeros_like()
        grads.w1.fill(0.5)
        grads.w2.fill(0.5)
        adam_step(p, grads, state)
        d1 = (before.w1 - p.w1).ravel()
        d2 = (before.w2 - p.w2).ravel()
        assert np.allclose(d1, d1[0]) and np.isclose(d1[0], d2[0])

    def test_nonfinite_gradient_names_parameter(self):
        p, state = self._setup()
        grads = p.zeros_like()
        grads.w2[0, 0] = np.nan
        with pytest.raises(NumericError, match="w2"):
            adam_step(p, grads, state)

    def test_k_steps_bit_identical_across_runs(self):
        results = []
        for _ in range(2):
            p, state = self._setup(seed=3)
            rng = np.random.default_rng(7)
            for _ in range(20):
                x = rng.standard_normal((4, 3))
                out, cache = mlp_forward(p, x)
                grads = mlp_backward(p, cache, np.ones(4) / 4)
                adam_step(p, grads, state)
            results.append(p)
        for name, arr in results[0].items():
            assert np.array_equal(arr, getattr(results[1], name))


class TestChunkedScorer:
    @pytest.mark.parametrize("n", [1, 5, 2048, 2049, 5000])
    def test_matches_mlp_forward(self, n):
        rng = np.random.default_rng(n)
        p = init_mlp(7, (32, 16), rng=99)
        x = rng.standard_normal((n, 7))
        expected, _ = mlp_forward(p, x)
        got = ChunkedScorer(p).scores(x)
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_sees_in_place_parameter_updates(self):
        p = init_mlp(2, (4, 4), rng=1)
        scorer = ChunkedScorer(p)
        x = np.ones((3, 2))
        before = scorer.scores(x).copy()
        p.w3 *= 2.0
        p.b3 += 1.0
        after = scorer.scores(x)
        assert not np.allclose(before, after)
