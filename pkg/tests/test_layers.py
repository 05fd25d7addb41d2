import numpy as np
import numpy.testing as npt
import pytest

from spinalnet import tensor as T
from spinalnet.layers import (
    ConfigError,
    Conv2dLayer,
    DropoutLayer,
    LinearLayer,
    MaxPool2dLayer,
)
from spinalnet.presets import get_model_spec

from conftest import GraphFn, assert_grads_match_fd


def conv_oracle(x, w, b):
    """Six-deep-loop valid cross-correlation."""
    n, c, h, wd = x.shape
    oc, _, k, _ = w.shape
    out = np.zeros((n, oc, h - k + 1, wd - k + 1))
    for bi in range(n):
        for o in range(oc):
            for i in range(h - k + 1):
                for j in range(wd - k + 1):
                    acc = b[o]
                    for ci in range(c):
                        for p in range(k):
                            for q in range(k):
                                acc += x[bi, ci, i + p, j + q] * w[o, ci, p, q]
                    out[bi, o, i, j] = acc
    return out


def linear_oracle(x, w, b):
    n, d = x.shape
    out = np.zeros((n, w.shape[0]))
    for i in range(n):
        for o in range(w.shape[0]):
            acc = b[o]
            for j in range(d):
                acc += x[i, j] * w[o, j]
            out[i, o] = acc
    return out


class TestLinear:
    def test_identity_weights_pass_through(self, rng):
        layer = LinearLayer(3, 3, "identity", rng=rng)
        layer.weight.data[...] = np.eye(3)
        layer.bias.data[...] = 0.0
        x = rng.standard_normal((4, 3))
        npt.assert_array_equal(layer.forward(T.Tensor(x)).data, x)

    def test_zero_weights_give_activated_bias(self, rng):
        layer = LinearLayer(5, 3, "relu", rng=rng)
        layer.weight.data[...] = 0.0
        layer.bias.data[...] = [-1.0, 0.5, 2.0]
        out = layer.forward(T.Tensor(rng.standard_normal((4, 5)))).data
        npt.assert_array_equal(out, np.tile([0.0, 0.5, 2.0], (4, 1)))

    def test_matches_loop_oracle(self, rng):
        layer = LinearLayer(6, 4, "identity", rng=rng)
        x = rng.standard_normal((3, 6))
        expected = linear_oracle(x, layer.weight.data, layer.bias.data)
        npt.assert_allclose(layer.forward(T.Tensor(x)).data, expected, atol=1e-12)

    def test_rejects_bad_activation(self):
        with pytest.raises(ConfigError):
            LinearLayer(2, 2, "sigmoid")

    def test_gradients_match_finite_differences(self, rng):
        layer = LinearLayer(4, 3, "tanh", rng=rng)
        x = T.Tensor(rng.standard_normal((2, 4)))

        def build():
            out = layer.forward(x)
            return T.mean_all(T.mul_elementwise(out, out))

        assert_grads_match_fd(GraphFn(build), layer.parameters())


class TestConv2d:
    def test_1x1_identity_kernel(self, rng):
        layer = Conv2dLayer(1, 1, 1, rng=rng)
        layer.weight.data[...] = 1.0
        layer.bias.data[...] = 0.0
        x = rng.standard_normal((2, 1, 5, 5))
        npt.assert_array_equal(layer.forward(T.Tensor(x)).data, x)

    def test_constant_field(self, rng):
        layer = Conv2dLayer(1, 1, 5, rng=rng)
        layer.weight.data[...] = 1.0
        layer.bias.data[...] = 0.0
        out = layer.forward(T.Tensor(np.ones((1, 1, 28, 28)))).data
        assert out.shape == (1, 1, 24, 24)
        npt.assert_allclose(out, 25.0)

    def test_matches_loop_oracle(self, rng):
        layer = Conv2dLayer(2, 3, 3, rng=rng)
        x = rng.standard_normal((2, 2, 6, 7))
        expected = conv_oracle(x, layer.weight.data, layer.bias.data)
        npt.assert_allclose(layer.forward(T.Tensor(x)).data, expected, atol=1e-10)

    def test_channel_mismatch(self, rng):
        layer = Conv2dLayer(2, 3, 3, rng=rng)
        with pytest.raises(T.ShapeError):
            layer.forward(T.Tensor(np.zeros((1, 5, 6, 6))))

    def test_gradients_match_finite_differences(self, rng):
        layer = Conv2dLayer(2, 2, 3, rng=rng)
        x = T.Tensor(rng.standard_normal((1, 2, 5, 5)), requires_grad=True)

        def build():
            out = layer.forward(x)
            return T.mean_all(T.mul_elementwise(out, out))

        assert_grads_match_fd(GraphFn(build), layer.parameters() + [x])


class TestMaxPoolAndFlatten:
    def test_single_window(self):
        out = T.maxpool2d(T.Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]).reshape(1, 1, 2, 2)))
        npt.assert_array_equal(out.data, [[[[4.0]]]])

    def test_odd_dims_rejected(self):
        with pytest.raises(T.ShapeError):
            T.maxpool2d(T.Tensor(np.zeros((1, 1, 3, 4))))

    def test_flatten_reshape_roundtrip(self, rng):
        x = rng.standard_normal((2, 3, 4, 4))
        t = T.Tensor(x)
        flat = T.reshape(t, (2, 48))
        back = T.reshape(flat, (2, 3, 4, 4))
        npt.assert_array_equal(back.data, x)

    def test_gradient_lands_only_on_max_positions(self, rng):
        x_data = rng.standard_normal((1, 1, 4, 4))
        x = T.Tensor(x_data, requires_grad=True)
        out = T.maxpool2d(x)
        T.backward(T.sum_all(out))
        # each 2x2 window contributes gradient 1 exactly at its max element
        assert x.grad.sum() == 4
        for i in range(2):
            for j in range(2):
                window = x_data[0, 0, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
                gwin = x.grad[0, 0, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
                assert gwin[np.unravel_index(window.argmax(), (2, 2))] == 1.0

    def test_tie_routes_to_first_in_row_major_order(self):
        x = T.Tensor(np.full((1, 1, 2, 2), 7.0), requires_grad=True)
        T.backward(T.sum_all(T.maxpool2d(x)))
        npt.assert_array_equal(x.grad[0, 0], [[1.0, 0.0], [0.0, 0.0]])

    def test_pool_gradient_matches_finite_differences(self, rng):
        x = T.Tensor(rng.standard_normal((1, 2, 4, 4)), requires_grad=True)
        scale = T.Tensor(rng.standard_normal((1, 2, 2, 2)))

        def build():
            return T.sum_all(T.mul_elementwise(T.maxpool2d(x), scale))

        assert_grads_match_fd(GraphFn(build), [x])


class TestDropout:
    def test_rate_zero_is_identity(self, rng):
        layer = DropoutLayer(0.0)
        layer.training = True
        x = rng.standard_normal((3, 5))
        npt.assert_array_equal(layer.forward(T.Tensor(x), rng=rng).data, x)

    def test_eval_mode_is_identity(self, rng):
        layer = DropoutLayer(0.9)
        x = rng.standard_normal((3, 5))
        npt.assert_array_equal(layer.forward(T.Tensor(x)).data, x)

    def test_rate_one_rejected(self):
        with pytest.raises(ConfigError):
            DropoutLayer(1.0)

    def test_inverted_scaling_preserves_mean(self, rng):
        layer = DropoutLayer(0.5)
        layer.training = True
        x = np.ones((200, 500))
        out = layer.forward(T.Tensor(x), rng=rng).data
        assert abs(out.mean() - 1.0) < 0.05


def test_baseline_cnn_has_21840_parameters():
    model = get_model_spec("t2-cnn").build()
    assert sum(p.size for p in model.parameters()) == 21840


def test_eval_forward_is_pure_function_of_params_and_input(rng):
    model = get_model_spec("t2-cnn").build(rng=rng)
    model.eval()
    x = T.Tensor(rng.random((2, 1, 28, 28)))
    first = model.forward(x).data.tobytes()
    second = model.forward(x).data.tobytes()
    assert first == second
