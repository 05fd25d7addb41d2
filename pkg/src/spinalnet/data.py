"""Dataset ingestion: IDX-format image/label readers (gzip transparent),
the synthetic 8-variable regression generator, and batching.
"""

import gzip
import struct
from dataclasses import dataclass

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

TARGET_FUNCTIONS = {
    "sum": lambda x: x.sum(axis=1),
    "sin_sum": lambda x: np.sin(x.sum(axis=1)),
    "prod": lambda x: x.prod(axis=1),
    "sin_prod": lambda x: np.sin(x.prod(axis=1)),
}


class IdxFormatError(ValueError):
    """Raised for malformed IDX files; message names the offending file."""


@dataclass
class Dataset:
    inputs: np.ndarray  # float64, (N, ...) -- images normalized to [0, 1]
    targets: np.ndarray  # int64 class ids (N,) or float64 regression (N, 1)
    split: str = "train"

    def __post_init__(self):
        if len(self.inputs) != len(self.targets):
            raise ValueError(
                "inputs/targets length mismatch: %d vs %d"
                % (len(self.inputs), len(self.targets))
            )

    def __len__(self):
        return len(self.inputs)

    @property
    def is_classification(self):
        return np.issubdtype(self.targets.dtype, np.integer)


@dataclass
class RegressionSpec:
    target_fn: str
    noise_sigma: float = 0.2
    num_vars: int = 8
    train_samples: int = 1000
    test_samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.target_fn not in TARGET_FUNCTIONS:
            raise ValueError(
                "unknown target_fn %r; choose from %s"
                % (self.target_fn, sorted(TARGET_FUNCTIONS))
            )


def _open_maybe_gzip(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(fh, count, path, what):
    data = fh.read(count)
    if len(data) != count:
        raise IdxFormatError(
            "%s: truncated %s (wanted %d bytes, got %d)" % (path, what, count, len(data))
        )
    return data


def load_idx(images_path, labels_path):
    """Read an IDX image/label pair into a Dataset (pixels scaled to [0, 1])."""
    with _open_maybe_gzip(images_path) as fh:
        magic, n, rows, cols = struct.unpack(">IIII", _read_exact(fh, 16, images_path, "header"))
        if magic != IDX_IMAGES_MAGIC:
            raise IdxFormatError(
                "%s: bad image magic 0x%08x (expected 0x%08x)"
                % (images_path, magic, IDX_IMAGES_MAGIC)
            )
        raw = _read_exact(fh, n * rows * cols, images_path, "pixel payload")
        images = np.frombuffer(raw, dtype=np.uint8).reshape(n, 1, rows, cols)

    with _open_maybe_gzip(labels_path) as fh:
        magic, n_labels = struct.unpack(">II", _read_exact(fh, 8, labels_path, "header"))
        if magic != IDX_LABELS_MAGIC:
            raise IdxFormatError(
                "%s: bad label magic 0x%08x (expected 0x%08x)"
                % (labels_path, magic, IDX_LABELS_MAGIC)
            )
        labels = np.frombuffer(_read_exact(fh, n_labels, labels_path, "label payload"),
                               dtype=np.uint8)

    if n != n_labels:
        raise IdxFormatError(
            "%s: %d labels do not match %d images in %s"
            % (labels_path, n_labels, n, images_path)
        )
    return Dataset(inputs=images.astype(np.float64) / 255.0,
                   targets=labels.astype(np.int64))


def write_idx(images_path, labels_path, images_u8, labels_u8):
    """Write uint8 images (N, rows, cols) and labels (N,) in IDX format."""
    images_u8 = np.asarray(images_u8, dtype=np.uint8)
    labels_u8 = np.asarray(labels_u8, dtype=np.uint8)
    n, rows, cols = images_u8.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(images_u8.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels_u8)))
        fh.write(labels_u8.tobytes())


def gen_regression(spec: RegressionSpec):
    """Deterministic synthetic regression data: x ~ U[-1, 1]^num_vars,
    y = f(x) + Normal(0, noise_sigma^2). Returns (train, test) Datasets."""
    rng = np.random.default_rng(spec.seed)
    fn = TARGET_FUNCTIONS[spec.target_fn]
    datasets = []
    for split, count in (("train", spec.train_samples), ("test", spec.test_samples)):
        x = rng.uniform(-1.0, 1.0, size=(count, spec.num_vars))
        noise = rng.normal(0.0, spec.noise_sigma, size=count)
        y = (fn(x) + noise).reshape(-1, 1)
        datasets.append(Dataset(inputs=x, targets=y, split=split))
    return tuple(datasets)


def batches(dataset, batch_size, shuffle=False, seed=0):
    """Yield (inputs, targets) numpy views covering the dataset once;
    the last partial batch is kept."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n = len(dataset)
    order = np.arange(n)
    if shuffle:
        np.random.default_rng(seed).shuffle(order)
    for start in range(0, n, batch_size):
        idx = order[start : start + batch_size]
        yield dataset.inputs[idx], dataset.targets[idx]
