"""Losses, SGD/Adam optimizers, seeding, and the training loop."""

import time
from dataclasses import dataclass

import numpy as np

from . import tensor as T


class TrainingDiverged(RuntimeError):
    """Raised when the training loss becomes NaN."""


@dataclass
class MetricsRecord:
    seed: int
    epoch: int
    train_loss: float
    eval_metric: float  # test MSE (regression) or test accuracy (classification)
    best_so_far: float
    wall_time_s: float


def seed_streams(root_seed):
    """One root seed fans out to independent generators per consumer."""
    init_ss, shuffle_ss, dropout_ss, data_ss = np.random.SeedSequence(root_seed).spawn(4)
    return {
        "init": np.random.default_rng(init_ss),
        "shuffle": np.random.default_rng(shuffle_ss),
        "dropout": np.random.default_rng(dropout_ss),
        "data": np.random.default_rng(data_ss),
    }


# ---------------------------------------------------------------------------
# losses


def mse_loss(pred, target):
    if pred.shape != target.shape:
        raise T.ShapeError("mse shape mismatch: %s vs %s" % (pred.shape, target.shape))
    diff = T.sub(pred, target)
    return T.mean_all(T.mul_elementwise(diff, diff))


def nll_loss(log_probs, class_ids):
    picked = T.take_per_row(log_probs, class_ids)
    return T.scale(T.mean_all(picked), -1.0)


# ---------------------------------------------------------------------------
# optimizers


class SGD:
    def __init__(self, params, lr, momentum=0.0):
        self.params = list(params)
        self.lr = lr
        self.momentum = momentum
        self.velocity = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def step(self):
        self.t += 1
        for p, v in zip(self.params, self.velocity):
            if p.grad is None:
                raise T.ContractError("optimizer step before backward: missing gradient")
            v *= self.momentum
            v += p.grad
            p.data -= self.lr * v
            p.zero_grad()


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, p in enumerate(self.params):
            if p.grad is None:
                raise T.ContractError("optimizer step before backward: missing gradient")
            g = p.grad
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
            m_hat = self.m[i] / (1 - b1 ** self.t)
            v_hat = self.v[i] / (1 - b2 ** self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            p.zero_grad()


def make_optimizer(kind, params, lr, momentum=0.0):
    if kind == "sgd":
        return SGD(params, lr, momentum=momentum)
    if kind == "adam":
        return Adam(params, lr)
    raise ValueError("unknown optimizer kind %r" % (kind,))


# ---------------------------------------------------------------------------
# evaluation and the training loop


def evaluate(model, dataset, batch_size=256):
    """Eval-mode metric: accuracy for classification, MSE for regression."""
    from .data import batches

    model.eval()
    if dataset.is_classification:
        correct = 0
        for xb, yb in batches(dataset, batch_size):
            out = model.forward(T.Tensor(xb))
            correct += int((out.data.argmax(axis=1) == yb).sum())
        return correct / len(dataset)
    total = 0.0
    for xb, yb in batches(dataset, batch_size):
        out = model.forward(T.Tensor(xb))
        total += float(((out.data - yb) ** 2).sum())
    return total / np.prod(dataset.targets.shape)


def fit(model, train_set, test_set, optimizer, epochs, seed, batch_size=None,
        shuffle=True, log=None):
    """Train for `epochs`, returning one MetricsRecord per epoch.

    batch_size None means full batch. Deterministic in (model init, seed).
    Classification is tracked by max accuracy, regression by min MSE.
    """
    from .data import batches

    streams = seed_streams(seed)
    classification = train_set.is_classification
    if batch_size is None:
        batch_size = len(train_set)
    records = []
    best = None
    start = time.perf_counter()

    for epoch in range(epochs):
        model.train()
        losses = []
        shuffle_seed = int(streams["shuffle"].integers(2**31)) if shuffle else 0
        for batch_idx, (xb, yb) in enumerate(
            batches(train_set, batch_size, shuffle=shuffle, seed=shuffle_seed)
        ):
            x = T.Tensor(xb)
            out = model.forward(x, dropout_rng=streams["dropout"])
            if classification:
                loss = nll_loss(out, yb)
            else:
                loss = mse_loss(out, T.Tensor(yb))
            value = loss.item()
            if np.isnan(value):
                raise TrainingDiverged(
                    "NaN loss at epoch %d, batch %d" % (epoch, batch_idx)
                )
            T.backward(loss)
            optimizer.step()
            losses.append(value)

        metric = evaluate(model, test_set)
        if best is None:
            best = metric
        else:
            best = max(best, metric) if classification else min(best, metric)
        records.append(
            MetricsRecord(
                seed=seed,
                epoch=epoch,
                train_loss=float(np.mean(losses)),
                eval_metric=metric,
                best_so_far=best,
                wall_time_s=time.perf_counter() - start,
            )
        )
        if log is not None:
            log(records[-1])
    return records
