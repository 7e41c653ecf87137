from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minitower.errors import ConfigurationError
from minitower.nn import Conv2d, Dense, Flatten, ReLU

from oracles import conv2d_naive


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)


class TestShapes:
    def test_paper_first_conv_shape(self):
        conv = Conv2d(9, 32, kernel=8, stride=4, rng=rng())
        assert conv.out_shape((1, 9, 84, 84)) == (1, 32, 20, 20)

    def test_channel_mismatch_names_layer_and_shapes(self):
        conv = Conv2d(9, 32, kernel=8, stride=4, rng=rng(), name="conv0")
        with pytest.raises(ConfigurationError, match=r"conv0.*9.*\(1, 3, 84, 84\)"):
            conv.out_shape((1, 3, 84, 84))

    def test_too_small_input_rejected(self):
        conv = Conv2d(3, 4, kernel=8, stride=4, rng=rng())
        with pytest.raises(ConfigurationError):
            conv.out_shape((1, 3, 7, 7))

    def test_dense_shape_mismatch(self):
        dense = Dense(10, 4, rng=rng(), name="fc")
        with pytest.raises(ConfigurationError, match="fc"):
            dense.forward(np.zeros((2, 11)))

    @given(
        in_ch=st.integers(1, 4),
        out_ch=st.integers(1, 6),
        kernel=st.integers(1, 5),
        stride=st.integers(1, 3),
        extra=st.integers(0, 9),
        batch=st.integers(1, 3),
    )
    @settings(max_examples=60, deadline=None)
    def test_conv_output_shape_matches_rule(self, in_ch, out_ch, kernel, stride, extra, batch):
        size = kernel + extra
        conv = Conv2d(in_ch, out_ch, kernel, stride, rng=rng())
        x = rng(1).random((batch, in_ch, size, size))
        y, _ = conv.forward(x)
        expected_spatial = (size - kernel) // stride + 1
        assert y.shape == (batch, out_ch, expected_spatial, expected_spatial)
        assert y.shape == conv.out_shape(x.shape)


class TestForward:
    def test_relu_definition(self):
        relu = ReLU()
        y, _ = relu.forward(np.array([-1.0, 0.0, 2.0]))
        np.testing.assert_array_equal(y, [0.0, 0.0, 2.0])

    def test_dense_identity(self):
        dense = Dense(4, 4, rng=rng())
        dense.w.data[...] = np.eye(4)
        dense.b.data[...] = 0.0
        x = rng(2).random((3, 4))
        y, _ = dense.forward(x)
        np.testing.assert_allclose(y, x)

    def test_conv_matches_naive_loops(self):
        g = rng(3)
        conv = Conv2d(3, 5, kernel=3, stride=2, rng=g)
        x = g.random((2, 3, 9, 9))
        y, _ = conv.forward(x)
        expected = conv2d_naive(x, conv.w.data, conv.b.data, stride=2)
        np.testing.assert_allclose(y, expected, atol=1e-6)

    def test_flatten_roundtrip(self):
        flat = Flatten()
        x = rng(4).random((2, 3, 4, 5))
        y, cache = flat.forward(x)
        assert y.shape == (2, 60)
        np.testing.assert_array_equal(flat.backward(cache, y), x)


class TestBackward:
    def test_dense_weight_grad_is_outer_product(self):
        dense = Dense(3, 2, rng=rng())
        x = np.array([[1.0, 2.0, 3.0]])
        _, cache = dense.forward(x)
        g = np.array([[0.5, -1.0]])
        dense.backward(cache, g)
        np.testing.assert_allclose(dense.w.grad, g.T @ x)
        np.testing.assert_allclose(dense.b.grad, g[0])

    def test_relu_zero_subgradient(self):
        relu = ReLU()
        _, cache = relu.forward(np.array([-1.0]))
        dx = relu.backward(cache, np.array([5.0]))
        assert dx[0] == 0.0

    def test_conv_input_grad_matches_finite_difference(self):
        g = rng(5)
        conv = Conv2d(2, 3, kernel=3, stride=1, rng=g)
        x = g.random((1, 2, 6, 6))
        y, cache = conv.forward(x)
        dout = g.random(y.shape)
        dx = conv.backward(cache, dout)

        h = 1e-6
        num = np.zeros_like(x)
        for idx in np.ndindex(x.shape):
            xp = x.copy()
            xp[idx] += h
            xm = x.copy()
            xm[idx] -= h
            up = (conv.forward(xp)[0] * dout).sum()
            down = (conv.forward(xm)[0] * dout).sum()
            num[idx] = (up - down) / (2 * h)
        np.testing.assert_allclose(dx, num, atol=1e-6)

    def test_conv_weight_grad_accumulates(self):
        g = rng(6)
        conv = Conv2d(1, 1, kernel=2, stride=1, rng=g)
        x = g.random((1, 1, 3, 3))
        y, cache = conv.forward(x)
        dout = np.ones_like(y)
        conv.backward(cache, dout)
        first = conv.w.grad.copy()
        conv.backward(cache, dout)
        np.testing.assert_allclose(conv.w.grad, 2 * first)
