"""Dataset representation, ingestion, synthetic generation, and splitting.

A dataset is a D x N matrix whose columns are row-major vectorized images,
plus image geometry and optional integer cluster labels.
"""

import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateColumnError,
    EmptyInputError,
    FormatError,
    InfeasibleSpecError,
    LabelingError,
    ParameterError,
    SplitError,
)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class Dataset:
    """Column matrix of vectorized images with geometry and optional labels.

    Invariants enforced on construction: D == img_h * img_w, finite
    entries, and (if present) labels in {0..C-1} with every cluster
    nonempty. Instances are immutable; the underlying arrays are marked
    read-only so they can be shared across threads.
    """

    data: np.ndarray
    img_h: int
    img_w: int
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ConsistencyError("data must be a 2-D (D x N) matrix")
        if self.img_h <= 0 or self.img_w <= 0:
            raise ConsistencyError("image dimensions must be positive")
        if self.img_h * self.img_w != data.shape[0]:
            raise ConsistencyError(
                f"img_h*img_w = {self.img_h * self.img_w} != D = {data.shape[0]}"
            )
        if not np.all(np.isfinite(data)):
            raise ConsistencyError("data contains NaN or Inf entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64)
            if labels.shape != (data.shape[1],):
                raise ConsistencyError("labels length must equal N")
            if labels.size and labels.min() < 0:
                raise ConsistencyError("labels must be nonnegative")
            if labels.size:
                counts = np.bincount(labels)
                if np.any(counts == 0):
                    raise ConsistencyError("every cluster in {0..C-1} must be nonempty")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def D(self):
        return self.data.shape[0]

    @property
    def N(self):
        return self.data.shape[1]

    @property
    def C(self):
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def images(self):
        """View of the data as an (N, img_h, img_w) stack."""
        return self.data.T.reshape(self.N, self.img_h, self.img_w)

    def with_data(self, data, name=None):
        """Copy of this dataset with the matrix replaced, metadata kept."""
        return Dataset(data=data, img_h=self.img_h, img_w=self.img_w,
                       labels=self.labels, name=self.name if name is None else name)


@dataclass(frozen=True)
class SplitSpec:
    """Stratified in-/out-of-sample split: each cluster contributes
    ceil(in_fraction * N_c) in-sample points."""

    in_fraction: float
    seed: int

    def __post_init__(self):
        if not (0.0 < self.in_fraction <= 1.0):
            raise ParameterError("in_fraction must lie in (0, 1]")
        if self.seed < 0:
            raise ParameterError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class UosSpec:
    """Synthetic union-of-subspaces generator spec.

    ``noise_sigma`` is the additive Gaussian noise level expressed as the
    expected noise-to-signal column-norm ratio (0 means exact subspaces).
    """

    C: int
    d: int
    D: int
    n_per_cluster: int
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.C, self.d, self.D, self.n_per_cluster) < 1:
            raise ParameterError("C, d, D, n_per_cluster must be positive")
        if self.d >= self.D:
            raise InfeasibleSpecError(f"need d < D, got d={self.d}, D={self.D}")
        if self.C * self.d > self.D:
            raise InfeasibleSpecError(
                f"C*d = {self.C * self.d} exceeds ambient dimension D = {self.D}"
            )
        if self.noise_sigma < 0:
            raise ParameterError("noise_sigma must be nonnegative")


def most_square_shape(D):
    """(h, w) with h*w = D, h <= w, minimizing w - h."""
    h = 1
    for a in range(1, int(math.isqrt(D)) + 1):
        if D % a == 0:
            h = a
    return h, D // h


def generate_uos(spec):
    """Draw a union-of-subspaces dataset X = [A_1 Z_1 ... A_C Z_C] + sigma*E.

    Each cluster basis is the Q factor of a seeded D x d Gaussian matrix and
    coefficients are standard normal, so signal columns have expected norm
    sqrt(d). Noise entries are scaled by sqrt(d/D), making ``noise_sigma``
    the expected noise-to-signal column-norm ratio. Columns are labeled by
    cluster in block order; deterministic given spec.seed.
    """
    rng = np.random.default_rng(spec.seed)
    noise_scale = spec.noise_sigma * math.sqrt(spec.d / spec.D)
    blocks = []
    for _ in range(spec.C):
        basis, _ = np.linalg.qr(rng.standard_normal((spec.D, spec.d)))
        coeffs = rng.standard_normal((spec.d, spec.n_per_cluster))
        block = basis @ coeffs
        if spec.noise_sigma > 0:
            block = block + noise_scale * rng.standard_normal(block.shape)
        blocks.append(block)
    data = np.hstack(blocks)
    labels = np.repeat(np.arange(spec.C), spec.n_per_cluster)
    img_h, img_w = most_square_shape(spec.D)
    name = f"uos_C{spec.C}_d{spec.d}_D{spec.D}_s{spec.seed}"
    return Dataset(data=data, img_h=img_h, img_w=img_w, labels=labels, name=name)


def _read_idx(path, expected_magic, ndim):
    raw = Path(path).read_bytes()
    header = 4 * (1 + ndim)
    if len(raw) < header:
        raise FormatError(f"{path}: truncated IDX header")
    magic = struct.unpack(">I", raw[:4])[0]
    if magic != expected_magic:
        raise FormatError(
            f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    count = int(np.prod(dims))
    if len(raw) - header != count:
        raise ConsistencyError(
            f"{path}: payload is {len(raw) - header} bytes, dims {dims} imply {count}"
        )
    return dims, np.frombuffer(raw, dtype=np.uint8, offset=header)


def load_idx(images_path, labels_path=None, name=None):
    """Load an IDX (MNIST-distribution format) image file, optionally with labels.

    Pixels are mapped to [0, 1] by dividing by 255; each image becomes one
    column via row-major vectorization.
    """
    (n_images, rows, cols), pixels = _read_idx(images_path, IDX_IMAGES_MAGIC, 3)
    data = pixels.reshape(n_images, rows * cols).T.astype(np.float64) / 255.0
    labels = None
    if labels_path is not None:
        (n_labels,), raw_labels = _read_idx(labels_path, IDX_LABELS_MAGIC, 1)
        if n_labels != n_images:
            raise ConsistencyError(
                f"{n_images} images but {n_labels} labels"
            )
        labels = _relabel(raw_labels.astype(np.int64), labels_path)
    if name is None:
        name = Path(images_path).stem
    return Dataset(data=data, img_h=rows, img_w=cols, labels=labels, name=name)


def _relabel(raw, origin):
    """Map arbitrary integer class ids onto contiguous {0..C-1}."""
    uniq = np.unique(raw)
    lookup = {int(v): i for i, v in enumerate(uniq)}
    if len(lookup) < 1:
        raise LabelingError(f"{origin}: no class ids found")
    return np.array([lookup[int(v)] for v in raw], dtype=np.int64)


def _read_pgm(path):
    raw = Path(path).read_bytes()
    if raw[:2] != b"P5":
        raise FormatError(f"{path}: not a binary (P5) PGM file")
    # header tokens may be separated by whitespace and '#' comments
    pos, tokens = 2, []
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PGM header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"{path}: non-numeric PGM header fields") from None
    if not (0 < maxval <= 255):
        raise FormatError(f"{path}: maxval {maxval} outside (0, 255]")
    count = width * height
    if len(raw) - pos < count:
        raise ConsistencyError(f"{path}: PGM payload shorter than {count} bytes")
    img = np.frombuffer(raw, dtype=np.uint8, count=count, offset=pos)
    return img.reshape(height, width).astype(np.float64) / maxval


def load_pgm_dir(directory, class_from, name=None):
    """Load every binary PGM in ``directory``; class ids come from a regex.

    Files are processed in sorted filename order, must share identical
    dimensions, and pixels are scaled to [0, 1]. ``class_from`` is a regex
    whose first group captures an integer class id from the file name.
    """
    directory = Path(directory)
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".pgm")
    if not paths:
        raise EmptyInputError(f"{directory}: no .pgm files found")
    pattern = re.compile(class_from)
    images, raw_labels = [], []
    shape = None
    for p in paths:
        img = _read_pgm(p)
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise ConsistencyError(
                f"{p.name}: image is {img.shape}, others are {shape}"
            )
        m = pattern.search(p.name)
        if m is None or not m.groups():
            raise LabelingError(
                f"{p.name}: file name does not match class regex {class_from!r}"
            )
        images.append(img.reshape(-1))
        raw_labels.append(int(m.group(1)))
    data = np.stack(images, axis=1)
    labels = _relabel(np.asarray(raw_labels, dtype=np.int64), directory)
    if name is None:
        name = directory.name
    return Dataset(data=data, img_h=shape[0], img_w=shape[1], labels=labels, name=name)


def column_normalize(ds):
    """Rescale every column to unit Euclidean norm; metadata is preserved.

    A zero column is an error: downstream solvers divide by column norms.
    """
    norms = np.linalg.norm(ds.data, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateColumnError(
            f"{ds.name or 'dataset'}: zero column(s) at indices {zero[:8].tolist()}"
        )
    return ds.with_data(ds.data / norms)


def split(ds, spec):
    """Stratified split into (in_sample, out_sample) datasets.

    Each cluster contributes ceil(in_fraction * N_c) in-sample points,
    selected by a seeded permutation; both halves keep the original column
    order. Requires labels.
    """
    if ds.labels is None:
        raise SplitError("split requires labels for stratification")
    rng = np.random.default_rng(spec.seed)
    in_idx, out_idx = [], []
    for c in range(ds.C):
        members = np.flatnonzero(ds.labels == c)
        n_in = math.ceil(spec.in_fraction * members.size)
        if n_in < 1:
            raise SplitError(f"cluster {c} would have no in-sample points")
        perm = rng.permutation(members.size)
        in_idx.append(members[perm[:n_in]])
        out_idx.append(members[perm[n_in:]])
    in_idx = np.sort(np.concatenate(in_idx))
    out_idx = np.sort(np.concatenate(out_idx))
    return _take(ds, in_idx, "in"), _take(ds, out_idx, "out")


def _take(ds, idx, tag):
    labels = None if ds.labels is None else ds.labels[idx]
    name = f"{ds.name}[{tag}]" if ds.name else tag
    return Dataset(data=ds.data[:, idx], img_h=ds.img_h, img_w=ds.img_w,
                   labels=labels, name=name)
