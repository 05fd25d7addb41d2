"""Gradual-input fully-connected layer ("spinal" layer).

The input is split into k contiguous segments assigned round-robin to a
chain of L narrow sub-layers. Sub-layer 0 sees only its segment; every
later sub-layer sees concat(segment, previous sub-layer's output). A
linear output row reads the concatenation of all sub-layer activations,
so every sub-layer has a direct path to the output.

Also provides the constructive equivalence: any single-hidden-layer
network can be rewritten as a spinal layer with alternating
identity/nonlinear sub-layers that computes the identical function.
"""

from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .layers import ConfigError, _init_uniform


@dataclass
class SpinalConfig:
    input_width: int
    num_sublayers: int
    sublayer_width: int
    num_segments: int
    output_width: int
    sublayer_activations: list = field(default=None)  # defaults to all relu
    output_bias: bool = True

    def __post_init__(self):
        if min(self.input_width, self.num_sublayers, self.sublayer_width,
               self.num_segments, self.output_width) < 1:
            raise ConfigError("all spinal dimensions must be positive")
        if self.num_segments > self.num_sublayers:
            raise ConfigError(
                "num_segments %d exceeds num_sublayers %d"
                % (self.num_segments, self.num_sublayers)
            )
        if self.num_segments > self.input_width:
            raise ConfigError(
                "num_segments %d exceeds input_width %d"
                % (self.num_segments, self.input_width)
            )
        if self.sublayer_activations is None:
            self.sublayer_activations = ["relu"] * self.num_sublayers
        if len(self.sublayer_activations) != self.num_sublayers:
            raise ConfigError("need one activation per sub-layer")
        for act in self.sublayer_activations:
            if act not in T.ACTIVATIONS:
                raise ConfigError("unknown activation %r" % (act,))

    def segment_widths(self):
        """Contiguous split; earlier segments absorb the remainder."""
        base, extra = divmod(self.input_width, self.num_segments)
        return [base + 1 if i < extra else base for i in range(self.num_segments)]

    def segment_bounds(self):
        widths = self.segment_widths()
        starts = np.cumsum([0] + widths[:-1])
        return [(int(s), int(w)) for s, w in zip(starts, widths)]

    def sublayer_input_widths(self):
        """Width of each sub-layer's input: its segment plus the carry."""
        widths = self.segment_widths()
        m = self.sublayer_width
        return [
            widths[i % self.num_segments] + (m if i > 0 else 0)
            for i in range(self.num_sublayers)
        ]

    def param_count(self):
        m = self.sublayer_width
        total = sum(m * w + m for w in self.sublayer_input_widths())
        total += self.output_width * (self.num_sublayers * m)
        if self.output_bias:
            total += self.output_width
        return total

    def mult_count(self):
        m = self.sublayer_width
        total = sum(m * w for w in self.sublayer_input_widths())
        return total + self.output_width * (self.num_sublayers * m)

    def activation_count(self):
        """Nonlinear hidden units (identity sub-layers excluded)."""
        return sum(
            self.sublayer_width
            for act in self.sublayer_activations
            if act != "identity"
        )


class SpinalLayer:
    def __init__(self, config, rng=None):
        rng = rng or np.random.default_rng(0)
        self.config = config
        m = config.sublayer_width
        self.sub_weights = []
        self.sub_biases = []
        for w in config.sublayer_input_widths():
            self.sub_weights.append(_init_uniform(rng, (m, w), w))
            self.sub_biases.append(_init_uniform(rng, (m,), w))
        total_hidden = config.num_sublayers * m
        self.out_weight = _init_uniform(
            rng, (config.output_width, total_hidden), total_hidden
        )
        self.out_bias = (
            _init_uniform(rng, (config.output_width,), total_hidden)
            if config.output_bias
            else None
        )

    def parameters(self):
        params = []
        for w, b in zip(self.sub_weights, self.sub_biases):
            params += [w, b]
        params.append(self.out_weight)
        if self.out_bias is not None:
            params.append(self.out_bias)
        return params

    def forward(self, x):
        cfg = self.config
        if x.shape[-1] != cfg.input_width:
            raise T.ShapeError(
                "spinal layer expects %d input features, got %s"
                % (cfg.input_width, x.shape)
            )
        bounds = cfg.segment_bounds()
        hidden = []
        prev = None
        for i in range(cfg.num_sublayers):
            start, width = bounds[i % cfg.num_segments]
            seg = T.slice_last_dim(x, start, width)
            inp = seg if prev is None else T.concat_last_dim([seg, prev])
            z = T.broadcast_add_bias(
                T.matmul(inp, T.transpose2d(self.sub_weights[i])), self.sub_biases[i]
            )
            prev = T.ACTIVATIONS[cfg.sublayer_activations[i]](z)
            hidden.append(prev)
        out = T.matmul(T.concat_last_dim(hidden), T.transpose2d(self.out_weight))
        if self.out_bias is not None:
            out = T.broadcast_add_bias(out, self.out_bias)
        return out


def build_equivalent_spinal(W, b, act, V, c, block_width=2):
    """Rewrite a single-hidden-layer net as an exactly equivalent spinal layer.

    The shallow net is x -> V @ act(W @ x + b) + c with W of shape (H, d).
    Hidden neurons are handled in blocks of `block_width`; each block becomes
    a pair of sub-layers: an identity sub-layer accumulating the first input
    half's weighted sum (carry from the previous block zeroed), then a
    nonlinear sub-layer adding the second half, the carried partial sum, and
    the bias. Output-row weights sit only on the nonlinear sub-layers'
    slots, so the composite forward equals the shallow net for every input.
    """
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    H, d = W.shape
    if H % block_width:
        raise ConfigError(
            "hidden width %d not divisible by block width %d" % (H, block_width)
        )
    if act not in T.ACTIVATIONS:
        raise ConfigError("unknown activation %r" % (act,))
    m = block_width
    blocks = H // m
    L = 2 * blocks
    d1 = (d + 1) // 2  # first segment takes the extra feature on odd d

    config = SpinalConfig(
        input_width=d,
        num_sublayers=L,
        sublayer_width=m,
        num_segments=2,
        output_width=V.shape[0],
        sublayer_activations=["identity", act] * blocks,
        output_bias=True,
    )
    layer = SpinalLayer(config)

    for j in range(blocks):
        W_block = W[j * m : (j + 1) * m]
        # identity sub-layer: partial sum over the first input half
        lin = np.zeros(layer.sub_weights[2 * j].shape)
        lin[:, :d1] = W_block[:, :d1]
        layer.sub_weights[2 * j].data[...] = lin
        layer.sub_biases[2 * j].data[...] = 0.0
        # nonlinear sub-layer: second half plus carried partial sum plus bias
        nl = np.zeros(layer.sub_weights[2 * j + 1].shape)
        nl[:, : d - d1] = W_block[:, d1:]
        nl[:, d - d1 :] = np.eye(m)
        layer.sub_weights[2 * j + 1].data[...] = nl
        layer.sub_biases[2 * j + 1].data[...] = b[j * m : (j + 1) * m]

    out = np.zeros(layer.out_weight.shape)
    for j in range(blocks):
        out[:, (2 * j + 1) * m : (2 * j + 2) * m] = V[:, j * m : (j + 1) * m]
    layer.out_weight.data[...] = out
    layer.out_bias.data[...] = c
    return layer


def shallow_forward(W, b, act, V, c, x):
    """Reference forward of the single-hidden-layer net (plain numpy)."""
    acts = {"relu": lambda z: np.maximum(z, 0.0), "tanh": np.tanh, "identity": lambda z: z}
    h = acts[act](x @ W.T + b)
    return h @ V.T + c


def direct_gradient_probe(layer, x, target):
    """Per-sub-layer weight gradient norms for a squared-error loss.

    Because every sub-layer feeds the output row directly, sub-layer 0's
    gradient stays nonzero even with all carry weights zeroed.
    """
    for p in layer.parameters():
        p.zero_grad()
    pred = layer.forward(x)
    diff = T.sub(pred, target)
    loss = T.mean_all(T.mul_elementwise(diff, diff))
    T.backward(loss)
    norms = []
    for w in layer.sub_weights:
        norms.append(0.0 if w.grad is None else float(np.linalg.norm(w.grad)))
    return norms


def zero_carry_weights(layer):
    """Zero the carry blocks (previous sub-layer output -> sub-layer input)."""
    bounds = layer.config.segment_bounds()
    for i in range(1, layer.config.num_sublayers):
        seg_w = bounds[i % layer.config.num_segments][1]
        layer.sub_weights[i].data[:, seg_w:] = 0.0
