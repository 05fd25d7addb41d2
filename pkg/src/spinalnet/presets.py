"""Built-in model specs for the benchmark recipes.

"t1" is the 8-variable regression pair (two-hidden-layer MLP vs a 6
sub-layer spinal net, 300 hidden neurons each); "t2" is the small MNIST
CNN and its spinal-FC-head variants.
"""

from .modelspec import ModelSpec

T1_BASELINE = """\
input 8
linear 8 200 relu
linear 200 100 relu
linear 100 1 identity
"""

T1_SPINAL = """\
input 8
spinal 8 6 50 2 1
"""

T2_CNN = """\
input 1x28x28
conv2d 1 10 5
maxpool2d
relu
conv2d 10 20 5
dropout 0.5
maxpool2d
relu
flatten
linear 320 50 relu
linear 50 10 identity
log_softmax
"""

_T2_SPINAL_HEAD = """\
input 1x28x28
conv2d 1 10 5
maxpool2d
relu
conv2d 10 20 5
dropout 0.5
maxpool2d
relu
flatten
spinal 320 6 %d 2 10
log_softmax
"""


def get_model_spec(name):
    texts = {
        "t1-baseline": T1_BASELINE,
        "t1-spinal": T1_SPINAL,
        "t2-cnn": T2_CNN,
        "t2-spinal8": _T2_SPINAL_HEAD % 8,
        "t2-spinal10": _T2_SPINAL_HEAD % 10,
    }
    if name not in texts:
        raise KeyError(
            "unknown preset %r; available: %s" % (name, ", ".join(sorted(texts)))
        )
    return ModelSpec.from_text(texts[name])
