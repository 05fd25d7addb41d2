"""Timing comparison between the compiled and numpy conv/pool kernels."""

import time

import numpy as np

from .kernels import BACKEND, cython_backend, numpy_backend


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels(batch=64, repeats=5):
    rng = np.random.default_rng(0)
    x1 = rng.standard_normal((batch, 1, 28, 28))
    w1 = rng.standard_normal((10, 1, 5, 5))
    x2 = rng.standard_normal((batch, 10, 12, 12))
    w2 = rng.standard_normal((20, 10, 5, 5))

    backends = [("numpy", numpy_backend)]
    if cython_backend is not None:
        backends.append(("cython", cython_backend))
    else:
        print("compiled extension not built; showing numpy only")

    cases = [
        ("conv 1->10 k5 28x28", lambda k: k.conv2d_forward(x1, w1)),
        ("conv 10->20 k5 12x12", lambda k: k.conv2d_forward(x2, w2)),
        ("conv bwd weight", lambda k: k.conv2d_backward_weight(
            x2, k.conv2d_forward(x2, w2), 5)),
        ("conv bwd input", lambda k: k.conv2d_backward_input(
            k.conv2d_forward(x2, w2), w2, 12, 12)),
        ("maxpool 24x24", lambda k: k.maxpool2d_forward(
            rng.standard_normal((batch, 10, 24, 24)))),
    ]

    print("active backend: %s (batch=%d, best of %d)" % (BACKEND, batch, repeats))
    header = "%-22s" % "kernel" + "".join("%12s" % name for name, _ in backends)
    print(header)
    for label, call in cases:
        times = [_time(lambda k=kernel: call(k), repeats) for _, kernel in backends]
        row = "%-22s" % label + "".join("%10.2f ms" % (t * 1e3) for t in times)
        if len(times) == 2 and times[1] > 0:
            row += "   (numpy/cython = %.2fx)" % (times[0] / times[1])
        print(row)
    return 0
