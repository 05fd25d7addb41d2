"""Structural cost accounting: parameters, multiplications, activations.

All counts are derived from the ModelSpec alone; weights, data, and seeds
never enter. Multiplication convention: one count per scalar weight*input
product in a single-sample forward pass; bias additions are free. The
fc_* fields restrict to fully-connected (linear/spinal) layers, since
convolutional and fully-connected costs are usually reported separately.
"""

import json
from dataclasses import asdict, dataclass, field

from .modelspec import ModelSpec, SpecError
from .spinal import SpinalConfig


@dataclass
class LayerCost:
    layer_id: str
    params: int
    mults: int
    activations: int


@dataclass
class CostReport:
    per_layer: list = field(default_factory=list)
    total_params: int = 0
    total_mults: int = 0
    fc_mults: int = 0
    fc_activations: int = 0

    def to_json(self, indent=2):
        return json.dumps(asdict(self), indent=indent)


def _spinal_config(d):
    return SpinalConfig(
        input_width=d["in"],
        num_sublayers=d["sublayers"],
        sublayer_width=d["width"],
        num_segments=d["segments"],
        output_width=d["out"],
    )


def cost_report(model: ModelSpec) -> CostReport:
    report = CostReport()
    for idx, (d, in_shape) in enumerate(zip(model.layers, model.layer_input_shapes)):
        kind = d["kind"]
        params = mults = acts = 0
        fc = False
        if kind == "linear":
            params = d["out"] * d["in"] + d["out"]
            mults = d["out"] * d["in"]
            acts = d["out"] if d["act"] != "identity" else 0
            fc = True
        elif kind == "conv2d":
            k = d["k"]
            params = d["out_ch"] * d["in_ch"] * k * k + d["out_ch"]
            out_h = in_shape[1] - k + 1
            out_w = in_shape[2] - k + 1
            mults = d["out_ch"] * d["in_ch"] * k * k * out_h * out_w
        elif kind == "spinal":
            cfg = _spinal_config(d)
            params = cfg.param_count()
            mults = cfg.mult_count()
            acts = cfg.activation_count()
            fc = True
        elif kind in ("maxpool2d", "relu", "flatten", "dropout", "log_softmax"):
            pass
        else:
            raise SpecError("unknown layer kind %r" % (kind,))
        report.per_layer.append(LayerCost("%d:%s" % (idx, kind), params, mults, acts))
        report.total_params += params
        report.total_mults += mults
        if fc:
            report.fc_mults += mults
            report.fc_activations += acts
    return report


def count_params(model: ModelSpec) -> int:
    return cost_report(model).total_params


def count_mults(model: ModelSpec):
    report = cost_report(model)
    return {"total_mults": report.total_mults, "fc_mults": report.fc_mults}


def count_activations(model: ModelSpec) -> int:
    return cost_report(model).fc_activations
