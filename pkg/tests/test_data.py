import gzip
import struct

import numpy as np
import numpy.testing as npt
import pytest

from spinalnet.data import (
    IDX_IMAGES_MAGIC,
    IDX_LABELS_MAGIC,
    IdxFormatError,
    Dataset,
    RegressionSpec,
    batches,
    gen_regression,
    load_idx,
    write_idx,
)


def make_idx_pair(tmp_path, images, labels, gz=False):
    img_path = tmp_path / ("imgs.idx" + (".gz" if gz else ""))
    lbl_path = tmp_path / ("lbls.idx" + (".gz" if gz else ""))
    write_idx(tmp_path / "raw_i", tmp_path / "raw_l", images, labels)
    if gz:
        for src, dst in ((tmp_path / "raw_i", img_path), (tmp_path / "raw_l", lbl_path)):
            with open(src, "rb") as fh, gzip.open(dst, "wb") as out:
                out.write(fh.read())
    else:
        (tmp_path / "raw_i").rename(img_path)
        (tmp_path / "raw_l").rename(lbl_path)
    return img_path, lbl_path


class TestIdx:
    def test_single_zero_image(self, tmp_path):
        img, lbl = make_idx_pair(tmp_path, np.zeros((1, 28, 28), np.uint8), [3])
        ds = load_idx(img, lbl)
        assert ds.inputs.shape == (1, 1, 28, 28)
        npt.assert_array_equal(ds.inputs, 0.0)
        assert list(ds.targets) == [3]

    def test_pixels_normalized(self, tmp_path):
        images = np.full((2, 4, 4), 255, np.uint8)
        img, lbl = make_idx_pair(tmp_path, images, [0, 1])
        ds = load_idx(img, lbl)
        npt.assert_array_equal(ds.inputs, 1.0)

    def test_roundtrip(self, tmp_path, rng):
        images = rng.integers(0, 256, size=(10, 6, 6), dtype=np.uint8)
        labels = rng.integers(0, 10, size=10, dtype=np.uint8)
        img, lbl = make_idx_pair(tmp_path, images, labels)
        ds = load_idx(img, lbl)
        npt.assert_array_equal((ds.inputs * 255).astype(np.uint8).reshape(10, 6, 6), images)
        npt.assert_array_equal(ds.targets, labels)

    def test_gzip_transparent(self, tmp_path, rng):
        images = rng.integers(0, 256, size=(3, 5, 5), dtype=np.uint8)
        img, lbl = make_idx_pair(tmp_path, images, [1, 2, 3], gz=True)
        ds = load_idx(img, lbl)
        assert len(ds) == 3

    def test_bad_magic_names_file(self, tmp_path):
        img, lbl = make_idx_pair(tmp_path, np.zeros((1, 4, 4), np.uint8), [0])
        bad = tmp_path / "bad.idx"
        bad.write_bytes(struct.pack(">IIII", 0xDEADBEEF, 1, 4, 4) + b"\x00" * 16)
        with pytest.raises(IdxFormatError, match="bad.idx"):
            load_idx(bad, lbl)

    def test_truncated_payload(self, tmp_path):
        img, lbl = make_idx_pair(tmp_path, np.zeros((2, 4, 4), np.uint8), [0, 1])
        data = img.read_bytes()
        img.write_bytes(data[:-5])
        with pytest.raises(IdxFormatError, match="truncated"):
            load_idx(img, lbl)

    def test_count_mismatch(self, tmp_path):
        img, _ = make_idx_pair(tmp_path, np.zeros((2, 4, 4), np.uint8), [0, 1])
        lbl3 = tmp_path / "three.idx"
        lbl3.write_bytes(struct.pack(">II", IDX_LABELS_MAGIC, 3) + b"\x00\x01\x02")
        with pytest.raises(IdxFormatError, match="do not match"):
            load_idx(img, lbl3)

    def test_label_magic_checked(self, tmp_path):
        img, _ = make_idx_pair(tmp_path, np.zeros((1, 4, 4), np.uint8), [0])
        wrong = tmp_path / "wrong.idx"
        wrong.write_bytes(struct.pack(">II", IDX_IMAGES_MAGIC, 1) + b"\x00")
        with pytest.raises(IdxFormatError, match="label magic"):
            load_idx(img, wrong)


class TestRegression:
    def test_noiseless_sum(self):
        spec = RegressionSpec("sum", noise_sigma=0.0, train_samples=5, test_samples=5)
        train, _ = gen_regression(spec)
        npt.assert_allclose(train.targets[:, 0], train.inputs.sum(axis=1))

    def test_sum_example_value(self):
        from spinalnet.data import TARGET_FUNCTIONS

        x = np.full((1, 8), 0.1)
        assert abs(TARGET_FUNCTIONS["sum"](x)[0] - 0.8) < 1e-12

    def test_sin_prod_zero_coordinate(self):
        from spinalnet.data import TARGET_FUNCTIONS

        x = np.array([[0.5, 0.0, -0.3, 0.9, 0.2, 0.1, -0.8, 0.4]])
        assert TARGET_FUNCTIONS["sin_prod"](x)[0] == 0.0

    def test_noise_is_centered(self):
        spec = RegressionSpec("sum", noise_sigma=0.3, train_samples=100_000,
                              test_samples=1, seed=7)
        train, _ = gen_regression(spec)
        residual = train.targets[:, 0] - train.inputs.sum(axis=1)
        assert abs(residual.mean()) < 3 * 0.3 / np.sqrt(100_000)

    def test_deterministic_in_seed(self):
        spec = RegressionSpec("sin_prod", seed=42)
        a_train, a_test = gen_regression(spec)
        b_train, b_test = gen_regression(spec)
        assert a_train.inputs.tobytes() == b_train.inputs.tobytes()
        assert a_test.targets.tobytes() == b_test.targets.tobytes()

    def test_inputs_in_unit_box(self):
        train, _ = gen_regression(RegressionSpec("prod", train_samples=1000))
        assert train.inputs.min() >= -1.0 and train.inputs.max() <= 1.0

    def test_unknown_target_rejected(self):
        with pytest.raises(ValueError):
            RegressionSpec("cube")


class TestBatches:
    def make(self, n):
        return Dataset(np.arange(n, dtype=float).reshape(n, 1),
                       np.arange(n, dtype=float).reshape(n, 1))

    def test_partial_batch_kept(self):
        sizes = [len(x) for x, _ in batches(self.make(10), 3)]
        assert sizes == [3, 3, 3, 1]

    def test_no_shuffle_preserves_order(self):
        ds = self.make(7)
        xs = np.concatenate([x for x, _ in batches(ds, 2)])
        npt.assert_array_equal(xs, ds.inputs)

    def test_shuffle_is_seeded_permutation(self):
        ds = self.make(20)
        first = np.concatenate([x for x, _ in batches(ds, 6, shuffle=True, seed=5)])
        second = np.concatenate([x for x, _ in batches(ds, 6, shuffle=True, seed=5)])
        npt.assert_array_equal(first, second)
        npt.assert_array_equal(np.sort(first, axis=0), ds.inputs)

    def test_bad_batch_size(self):
        with pytest.raises(ValueError):
            list(batches(self.make(3), 0))
