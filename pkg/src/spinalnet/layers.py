"""Standard trainable layers: linear, conv2d, maxpool, flatten, dropout.

Layers are plain objects holding parameter Tensors; forward() records on
the autodiff tape. Weight init is uniform in +-1/sqrt(fan_in).
"""

import numpy as np

from . import tensor as T


class ConfigError(ValueError):
    """Raised for invalid layer configuration."""


def _init_uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return T.Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


class LinearLayer:
    """Dense layer: activation(x @ weight.T + bias)."""

    def __init__(self, in_features, out_features, activation="identity", rng=None):
        if activation not in T.ACTIVATIONS:
            raise ConfigError("unknown activation %r" % (activation,))
        rng = rng or np.random.default_rng(0)
        self.in_features = in_features
        self.out_features = out_features
        self.activation = activation
        self.weight = _init_uniform(rng, (out_features, in_features), in_features)
        self.bias = _init_uniform(rng, (out_features,), in_features)

    def parameters(self):
        return [self.weight, self.bias]

    def forward(self, x):
        if x.shape[-1] != self.in_features:
            raise T.ShapeError(
                "linear expects %d input features, got %s" % (self.in_features, x.shape)
            )
        z = T.broadcast_add_bias(T.matmul(x, T.transpose2d(self.weight)), self.bias)
        return T.ACTIVATIONS[self.activation](z)


class Conv2dLayer:
    """Valid cross-correlation, stride 1, no padding."""

    def __init__(self, in_channels, out_channels, kernel_size, rng=None):
        if kernel_size < 1:
            raise ConfigError("kernel_size must be >= 1")
        rng = rng or np.random.default_rng(0)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = _init_uniform(
            rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in
        )
        self.bias = _init_uniform(rng, (out_channels,), fan_in)

    def parameters(self):
        return [self.weight, self.bias]

    def forward(self, x):
        return T.conv2d(x, self.weight, self.bias)


class MaxPool2dLayer:
    """2x2 non-overlapping max pooling."""

    def parameters(self):
        return []

    def forward(self, x):
        return T.maxpool2d(x)


class FlattenLayer:
    """(n, c, h, w) -> (n, c*h*w), row-major."""

    def parameters(self):
        return []

    def forward(self, x):
        n = x.shape[0]
        return T.reshape(x, (n, x.size // n))


class ReluLayer:
    def parameters(self):
        return []

    def forward(self, x):
        return T.relu(x)


class LogSoftmaxLayer:
    def parameters(self):
        return []

    def forward(self, x):
        return T.log_softmax(x)


class DropoutLayer:
    """Inverted dropout; identity in eval mode.

    The mask RNG is injected per forward call by the training loop so runs
    stay deterministic under one root seed.
    """

    def __init__(self, rate):
        if not 0.0 <= rate < 1.0:
            raise ConfigError("dropout rate must be in [0, 1), got %r" % (rate,))
        self.rate = rate
        self.training = False

    def parameters(self):
        return []

    def forward(self, x, rng=None):
        if not self.training or self.rate == 0.0:
            return T.identity_act(x)
        if rng is None:
            raise T.ContractError("dropout in train mode requires an rng")
        keep = 1.0 - self.rate
        mask = (rng.random(x.shape) < keep) / keep
        return T.apply_mask(x, mask)
