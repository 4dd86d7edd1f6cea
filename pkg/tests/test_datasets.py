import struct

import numpy as np
import pytest

import wpsc
from wpsc.bundle import load_bundle, save_bundle
from wpsc.datasets import (
    Dataset,
    SplitSpec,
    UosSpec,
    column_normalize,
    generate_uos,
    load_idx,
    load_pgm_dir,
    most_square_shape,
    split,
)
from wpsc.errors import (
    ConsistencyError,
    DegenerateColumnError,
    EmptyInputError,
    FormatError,
    InfeasibleSpecError,
    LabelingError,
)


def svd_rank(M, rtol=1e-8):
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > rtol * s[0]).sum())


class TestGenerateUos:
    def test_noiseless_one_dim_clusters(self):
        ds = generate_uos(UosSpec(C=2, d=1, D=4, n_per_cluster=3, seed=1))
        for c in range(2):
            block = ds.data[:, ds.labels == c]
            assert svd_rank(block) == 1
            # every column lies in the span of the cluster's SVD basis
            U, _, _ = np.linalg.svd(block, full_matrices=False)
            u = U[:, :1]
            resid = block - u @ (u.T @ block)
            assert np.abs(resid).max() <= 1e-10

    def test_rank_matches_c_times_d(self):
        ds = generate_uos(UosSpec(C=5, d=5, D=100, n_per_cluster=50, seed=3))
        assert svd_rank(ds.data) == 25

    def test_deterministic(self):
        spec = UosSpec(C=3, d=2, D=30, n_per_cluster=4, noise_sigma=0.1, seed=9)
        a, b = generate_uos(spec), generate_uos(spec)
        assert np.array_equal(a.data, b.data)
        assert np.array_equal(a.labels, b.labels)

    def test_infeasible_spec(self):
        with pytest.raises(InfeasibleSpecError):
            UosSpec(C=5, d=3, D=10, n_per_cluster=2)

    def test_noiseless_points_sit_in_svd_span(self):
        # sigma=0 invariant: ||x - U_c U_c' x|| <= 1e-10 per cluster
        ds = generate_uos(UosSpec(C=4, d=3, D=36, n_per_cluster=10, seed=5))
        for c in range(4):
            block = ds.data[:, ds.labels == c]
            U, _, _ = np.linalg.svd(block, full_matrices=False)
            u = U[:, :3]
            assert np.abs(block - u @ (u.T @ block)).max() <= 1e-10

    def test_image_shape_most_square(self):
        assert most_square_shape(100) == (10, 10)
        assert most_square_shape(72) == (8, 9)
        assert most_square_shape(64) == (8, 8)
        ds = generate_uos(UosSpec(C=2, d=1, D=100, n_per_cluster=2, seed=0))
        assert (ds.img_h, ds.img_w) == (10, 10)


class TestColumnNormalize:
    def test_example_column(self):
        data = np.zeros((4, 1))
        data[0, 0], data[1, 0] = 3.0, 4.0
        ds = Dataset(data=data, img_h=2, img_w=2)
        out = column_normalize(ds)
        assert np.allclose(out.data[:, 0], [0.6, 0.8, 0.0, 0.0], atol=1e-15)

    def test_idempotent(self):
        ds = generate_uos(UosSpec(C=2, d=2, D=16, n_per_cluster=5, seed=2))
        once = column_normalize(ds)
        twice = column_normalize(once)
        assert np.abs(once.data - twice.data).max() <= 1e-12

    def test_unit_norm_postcondition(self):
        ds = generate_uos(UosSpec(C=3, d=2, D=25, n_per_cluster=7, seed=4))
        out = column_normalize(ds)
        assert np.abs(np.linalg.norm(out.data, axis=0) - 1.0).max() <= 1e-12
        assert np.array_equal(out.labels, ds.labels)

    def test_zero_column_is_error(self):
        data = np.ones((4, 2))
        data[:, 1] = 0.0
        ds = Dataset(data=data, img_h=2, img_w=2)
        with pytest.raises(DegenerateColumnError):
            column_normalize(ds)


class TestSplit:
    def test_balanced_80_20(self):
        ds = generate_uos(UosSpec(C=2, d=2, D=16, n_per_cluster=50, seed=0))
        ins, outs = split(ds, SplitSpec(0.8, 1))
        assert ins.N == 80 and outs.N == 20
        assert np.bincount(ins.labels).tolist() == [40, 40]
        assert np.bincount(outs.labels).tolist() == [10, 10]

    def test_full_fraction_empty_out(self):
        ds = generate_uos(UosSpec(C=2, d=1, D=4, n_per_cluster=3, seed=0))
        ins, outs = split(ds, SplitSpec(1.0, 0))
        assert ins.N == 6 and outs.N == 0

    def test_deterministic_partition(self):
        ds = generate_uos(UosSpec(C=3, d=2, D=16, n_per_cluster=9, seed=0))
        a = split(ds, SplitSpec(0.7, 42))
        b = split(ds, SplitSpec(0.7, 42))
        assert np.array_equal(a[0].data, b[0].data)
        assert np.array_equal(a[1].data, b[1].data)

    def test_partition_property(self):
        # in/out index sets partition the columns; counts follow ceil rule
        ds = generate_uos(UosSpec(C=3, d=2, D=16, n_per_cluster=7, seed=1))
        ins, outs = split(ds, SplitSpec(0.6, 5))
        assert ins.N + outs.N == ds.N
        merged = np.concatenate([ins.data, outs.data], axis=1)
        orig = np.sort([tuple(col) for col in ds.data.T], axis=0)
        got = np.sort([tuple(col) for col in merged.T], axis=0)
        assert np.array_equal(orig, got)
        for c in range(3):
            assert (ins.labels == c).sum() == int(np.ceil(0.6 * 7))


class TestIdxLoader:
    def _write_idx_images(self, path, images):
        n, h, w = images.shape
        with open(path, "wb") as fh:
            fh.write(struct.pack(">IIII", 0x00000803, n, h, w))
            fh.write(images.astype(np.uint8).tobytes())

    def _write_idx_labels(self, path, labels):
        with open(path, "wb") as fh:
            fh.write(struct.pack(">II", 0x00000801, len(labels)))
            fh.write(np.asarray(labels, dtype=np.uint8).tobytes())

    def test_mnist_shape(self, tmp_path):
        rng = np.random.default_rng(0)
        images = rng.integers(0, 256, size=(5, 28, 28))
        labels = [0, 1, 0, 2, 1]
        self._write_idx_images(tmp_path / "imgs", images)
        self._write_idx_labels(tmp_path / "labels", labels)
        ds = load_idx(tmp_path / "imgs", tmp_path / "labels")
        assert ds.D == 784 and ds.img_h == ds.img_w == 28
        assert ds.data.min() >= 0.0 and ds.data.max() <= 1.0
        # row-major vectorization: pixel (r, c) of image i at row r*28+c
        assert ds.data[1 * 28 + 2, 3] == images[3, 1, 2] / 255.0
        assert ds.labels.tolist() == labels

    def test_label_magic_as_images_is_format_error(self, tmp_path):
        self._write_idx_labels(tmp_path / "bad", [1, 2, 3])
        with pytest.raises(FormatError):
            load_idx(tmp_path / "bad")

    def test_count_mismatch(self, tmp_path):
        rng = np.random.default_rng(1)
        self._write_idx_images(tmp_path / "imgs", rng.integers(0, 255, (3, 4, 4)))
        self._write_idx_labels(tmp_path / "labels", [0, 1, 0, 1])
        with pytest.raises(ConsistencyError):
            load_idx(tmp_path / "imgs", tmp_path / "labels")


def _write_pgm(path, img, maxval=255):
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode())
        fh.write(img.astype(np.uint8).tobytes())


class TestPgmLoader:
    def test_directory_of_classes(self, tmp_path):
        rng = np.random.default_rng(0)
        for cls in (1, 2, 5):
            for i in range(4):
                _write_pgm(tmp_path / f"obj{cls}__{i}.pgm",
                           rng.integers(0, 256, (8, 8)))
        ds = load_pgm_dir(tmp_path, r"obj(\d+)__")
        assert ds.D == 64 and ds.N == 12 and ds.C == 3
        assert ds.data.max() <= 1.0
        assert np.bincount(ds.labels).tolist() == [4, 4, 4]

    def test_empty_dir(self, tmp_path):
        with pytest.raises(EmptyInputError):
            load_pgm_dir(tmp_path, r"(\d+)")

    def test_mixed_dimensions(self, tmp_path):
        rng = np.random.default_rng(0)
        _write_pgm(tmp_path / "a1.pgm", rng.integers(0, 255, (8, 8)))
        _write_pgm(tmp_path / "b1.pgm", rng.integers(0, 255, (4, 4)))
        with pytest.raises(ConsistencyError):
            load_pgm_dir(tmp_path, r"(\d+)")

    def test_unmatched_filename(self, tmp_path):
        _write_pgm(tmp_path / "noclass.pgm", np.zeros((4, 4)))
        with pytest.raises(LabelingError):
            load_pgm_dir(tmp_path, r"obj(\d+)")

    def test_maxval_scaling(self, tmp_path):
        img = np.full((4, 4), 100)
        _write_pgm(tmp_path / "c1.pgm", img, maxval=100)
        ds = load_pgm_dir(tmp_path, r"c(\d+)")
        assert np.allclose(ds.data, 1.0)


class TestBundle:
    def test_round_trip_bit_identical(self, tmp_path):
        ds = generate_uos(UosSpec(C=3, d=2, D=24, n_per_cluster=5,
                                  noise_sigma=0.2, seed=11))
        path = tmp_path / "b.wpsc"
        save_bundle(ds, path)
        back = load_bundle(path)
        assert np.array_equal(back.data, ds.data)
        assert np.array_equal(back.labels, ds.labels)
        assert (back.img_h, back.img_w) == (ds.img_h, ds.img_w)

    def test_unlabeled_round_trip(self, tmp_path):
        ds = Dataset(data=np.arange(12.0).reshape(4, 3), img_h=2, img_w=2)
        path = tmp_path / "u.wpsc"
        save_bundle(ds, path)
        back = load_bundle(path)
        assert back.labels is None
        assert np.array_equal(back.data, ds.data)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk"
        path.write_bytes(b"NOTME\n" + b"\x00" * 40)
        with pytest.raises(FormatError):
            load_bundle(path)


class TestDatasetInvariants:
    def test_shape_mismatch(self):
        with pytest.raises(ConsistencyError):
            Dataset(data=np.zeros((5, 2)), img_h=2, img_w=2)

    def test_nan_rejected(self):
        data = np.zeros((4, 2))
        data[0, 0] = np.nan
        with pytest.raises(ConsistencyError):
            Dataset(data=data, img_h=2, img_w=2)

    def test_label_gap_rejected(self):
        with pytest.raises(ConsistencyError):
            Dataset(data=np.ones((4, 3)), img_h=2, img_w=2,
                    labels=np.array([0, 2, 2]))

    def test_data_read_only(self):
        ds = Dataset(data=np.ones((4, 2)), img_h=2, img_w=2)
        with pytest.raises(ValueError):
            ds.data[0, 0] = 5.0
