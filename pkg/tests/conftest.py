import numpy as np
import pytest


def finite_diff_grads(f, params, h=1e-5):
    """Central finite differences of scalar f() w.r.t. each param Tensor.

    f rebuilds its graph on every call and returns a float; params are
    mutated in place and restored.
    """
    grads = []
    for p in params:
        g = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            plus = f()
            flat[i] = old - h
            minus = f()
            flat[i] = old
            gf[i] = (plus - minus) / (2 * h)
        grads.append(g)
    return grads


def max_rel_err(a, b, guard=1e-8):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), guard)
    return float(np.max(np.abs(a - b) / denom))


def assert_grads_match_fd(f, params, tol=1e-4, h=1e-5):
    """Run autodiff on f's graph and compare every param grad to FD."""
    from spinalnet import tensor as T

    for p in params:
        p.zero_grad()
    loss = f.build()
    T.backward(loss)
    numeric = finite_diff_grads(lambda: f.build().item(), params, h=h)
    for p, num in zip(params, numeric):
        assert p.grad is not None
        err = max_rel_err(p.grad, num)
        assert err < tol, "gradient mismatch: max rel err %.3e" % err


class GraphFn:
    """Callable wrapper so the same graph builder serves autodiff and FD."""

    def __init__(self, builder):
        self.build = builder


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
