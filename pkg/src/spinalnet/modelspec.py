"""Declarative model description: parse, validate, assemble.

A ModelSpec is a list of one-line layer descriptors plus an input shape.
The same spec drives model assembly (build), parameter/multiplication
accounting (costing), and training configs, so the three can never drift.

Grammar (whitespace-separated tokens, one layer per line):

    input <d> | input <c>x<h>x<w>
    linear <in> <out> <activation>
    conv2d <in_ch> <out_ch> <k>
    maxpool2d
    relu
    flatten
    dropout <rate>
    spinal <in> <sublayers> <width> <segments> <out>
    log_softmax
"""

import numpy as np

from . import layers as L
from .spinal import SpinalConfig, SpinalLayer


class SpecError(ValueError):
    """Raised for malformed or shape-inconsistent model specs."""


class ModelSpec:
    def __init__(self, input_shape, layer_descriptors):
        self.input_shape = tuple(int(s) for s in input_shape)
        self.layers = [dict(d) for d in layer_descriptors]
        self.validate()

    # -- textual form -------------------------------------------------------

    @classmethod
    def from_lines(cls, lines):
        input_shape = None
        descriptors = []
        for raw in lines:
            line = raw.split("#")[0].strip()
            if not line:
                continue
            tokens = line.split()
            kind = tokens[0]
            try:
                if kind == "input":
                    input_shape = tuple(int(t) for t in tokens[1].split("x"))
                elif kind == "linear":
                    descriptors.append(
                        {"kind": "linear", "in": int(tokens[1]), "out": int(tokens[2]),
                         "act": tokens[3]}
                    )
                elif kind == "conv2d":
                    descriptors.append(
                        {"kind": "conv2d", "in_ch": int(tokens[1]),
                         "out_ch": int(tokens[2]), "k": int(tokens[3])}
                    )
                elif kind == "dropout":
                    descriptors.append({"kind": "dropout", "rate": float(tokens[1])})
                elif kind == "spinal":
                    descriptors.append(
                        {"kind": "spinal", "in": int(tokens[1]),
                         "sublayers": int(tokens[2]), "width": int(tokens[3]),
                         "segments": int(tokens[4]), "out": int(tokens[5])}
                    )
                elif kind in ("maxpool2d", "relu", "flatten", "log_softmax"):
                    descriptors.append({"kind": kind})
                else:
                    raise SpecError("unknown layer kind %r" % (kind,))
            except (IndexError, ValueError) as exc:
                if isinstance(exc, SpecError):
                    raise
                raise SpecError("malformed layer line %r" % (line,)) from exc
        if input_shape is None:
            raise SpecError("model spec must declare an input shape")
        return cls(input_shape, descriptors)

    @classmethod
    def from_text(cls, text):
        return cls.from_lines(text.splitlines())

    def to_lines(self):
        lines = ["input " + "x".join(str(s) for s in self.input_shape)]
        for d in self.layers:
            kind = d["kind"]
            if kind == "linear":
                lines.append("linear %d %d %s" % (d["in"], d["out"], d["act"]))
            elif kind == "conv2d":
                lines.append("conv2d %d %d %d" % (d["in_ch"], d["out_ch"], d["k"]))
            elif kind == "dropout":
                lines.append("dropout %g" % d["rate"])
            elif kind == "spinal":
                lines.append(
                    "spinal %d %d %d %d %d"
                    % (d["in"], d["sublayers"], d["width"], d["segments"], d["out"])
                )
            else:
                lines.append(kind)
        return lines

    def to_text(self):
        return "\n".join(self.to_lines()) + "\n"

    # -- shape propagation ---------------------------------------------------

    def validate(self):
        """Propagate shapes through every layer; also records them for costing."""
        shape = self.input_shape
        self.layer_input_shapes = []
        for d in self.layers:
            self.layer_input_shapes.append(shape)
            kind = d["kind"]
            if kind == "linear" or kind == "spinal":
                want = d["in"]
                if len(shape) != 1 or shape[0] != want:
                    raise SpecError(
                        "%s expects %d flat features, got %s" % (kind, want, shape)
                    )
                shape = (d["out"],)
            elif kind == "conv2d":
                if len(shape) != 3:
                    raise SpecError("conv2d expects (c, h, w) input, got %s" % (shape,))
                c, h, w = shape
                if c != d["in_ch"]:
                    raise SpecError(
                        "conv2d expects %d channels, got %d" % (d["in_ch"], c)
                    )
                if h < d["k"] or w < d["k"]:
                    raise SpecError("conv2d kernel %d too large for %s" % (d["k"], shape))
                shape = (d["out_ch"], h - d["k"] + 1, w - d["k"] + 1)
            elif kind == "maxpool2d":
                if len(shape) != 3 or shape[1] % 2 or shape[2] % 2:
                    raise SpecError("maxpool2d needs even (c, h, w) input, got %s" % (shape,))
                shape = (shape[0], shape[1] // 2, shape[2] // 2)
            elif kind == "flatten":
                shape = (int(np.prod(shape)),)
            elif kind == "log_softmax":
                if len(shape) != 1:
                    raise SpecError("log_softmax expects flat input, got %s" % (shape,))
            elif kind in ("relu", "dropout"):
                pass
            else:
                raise SpecError("unknown layer kind %r" % (kind,))
        self.output_shape = shape

    # -- assembly ------------------------------------------------------------

    def build(self, rng=None):
        rng = rng or np.random.default_rng(0)
        built = []
        for d in self.layers:
            kind = d["kind"]
            if kind == "linear":
                built.append(L.LinearLayer(d["in"], d["out"], d["act"], rng=rng))
            elif kind == "conv2d":
                built.append(L.Conv2dLayer(d["in_ch"], d["out_ch"], d["k"], rng=rng))
            elif kind == "maxpool2d":
                built.append(L.MaxPool2dLayer())
            elif kind == "relu":
                built.append(L.ReluLayer())
            elif kind == "flatten":
                built.append(L.FlattenLayer())
            elif kind == "dropout":
                built.append(L.DropoutLayer(d["rate"]))
            elif kind == "spinal":
                cfg = SpinalConfig(
                    input_width=d["in"],
                    num_sublayers=d["sublayers"],
                    sublayer_width=d["width"],
                    num_segments=d["segments"],
                    output_width=d["out"],
                )
                built.append(SpinalLayer(cfg, rng=rng))
            elif kind == "log_softmax":
                built.append(L.LogSoftmaxLayer())
        return Model(self, built)


class Model:
    """An assembled network: ordered layers sharing one parameter list."""

    def __init__(self, spec, built_layers):
        self.spec = spec
        self.layers = built_layers
        self.training = False

    def parameters(self):
        params = []
        for layer in self.layers:
            params.extend(layer.parameters())
        return params

    def train(self):
        self.training = True
        for layer in self.layers:
            if isinstance(layer, L.DropoutLayer):
                layer.training = True

    def eval(self):
        self.training = False
        for layer in self.layers:
            if isinstance(layer, L.DropoutLayer):
                layer.training = False

    def forward(self, x, dropout_rng=None):
        for layer in self.layers:
            if isinstance(layer, L.DropoutLayer):
                x = layer.forward(x, rng=dropout_rng)
            else:
                x = layer.forward(x)
        return x
