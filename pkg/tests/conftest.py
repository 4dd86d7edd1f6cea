"""Shared synthetic-data constructions for the test suite."""

import numpy as np
import pytest

from wpsc.datasets import Dataset, UosSpec, column_normalize, generate_uos
from wpsc.wavelet import haar_analysis_2d, haar_synthesis_2d


def make_uos(C=5, d=5, D=100, n=50, sigma=0.0, seed=0, normalize=True):
    ds = generate_uos(UosSpec(C=C, d=d, D=D, n_per_cluster=n,
                              noise_sigma=sigma, seed=seed))
    return column_normalize(ds) if normalize else ds


def checkerboard_noise_uos(C=3, d=3, D=64, n=15, seed=0, amp=3.0):
    """UoS data plus a shared checkerboard direction with a random
    per-image amplitude. The checkerboard alternates sign between adjacent
    pixels, so level-1 low-pass filtering kills it exactly: the noise lives
    only in the D subband."""
    base = generate_uos(UosSpec(C=C, d=d, D=D, n_per_cluster=n,
                                noise_sigma=0.0, seed=seed))
    h, w = base.img_h, base.img_w
    rng = np.random.default_rng(seed + 1000)
    checker = ((-1.0) ** np.add.outer(np.arange(h), np.arange(w))).reshape(-1)
    amps = amp * (1.0 + rng.random(base.N))
    noisy = base.data + np.outer(checker, amps)
    return Dataset(data=noisy, img_h=h, img_w=w, labels=base.labels,
                   name="checkerboard")


def smooth_uos_with_hf_noise(C=4, d=3, D=64, n=20, seed=0, sigma=0.2):
    """Smooth (low-pass) subspace bases with additive noise confined to the
    level-1 D band: the A subband keeps the signal and drops the noise."""
    h = w = int(np.sqrt(D))
    assert h * w == D
    rng = np.random.default_rng(seed)
    blocks = []
    for _ in range(C):
        raw = rng.standard_normal((d, h, w))
        approx, _, _, _ = haar_analysis_2d(raw, 1)
        zero = np.zeros_like(approx)
        smooth = haar_synthesis_2d(approx, zero, zero, zero, 1)
        basis, _ = np.linalg.qr(smooth.reshape(d, D).T)
        block = basis @ rng.standard_normal((d, n))
        hf = haar_synthesis_2d(np.zeros((n, h, w)), np.zeros((n, h, w)),
                               np.zeros((n, h, w)),
                               rng.standard_normal((n, h, w)), 1)
        blocks.append(block + sigma * hf.reshape(n, D).T)
    data = np.hstack(blocks)
    labels = np.repeat(np.arange(C), n)
    return Dataset(data=data, img_h=h, img_w=w, labels=labels, name="hf-noise")


@pytest.fixture
def tiny_two_lines():
    """Two orthogonal 1-D subspaces, three exact unit-norm points each."""
    rng = np.random.default_rng(7)
    u = np.zeros(6)
    v = np.zeros(6)
    u[0], v[3] = 1.0, 1.0
    cols = []
    for base in (u, v):
        for _ in range(3):
            cols.append(base * np.sign(rng.standard_normal()))
    X = np.column_stack(cols)
    # rotate into a generic orientation so coordinates are not axis-aligned
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    return Q @ X, np.array([0, 0, 0, 1, 1, 1])
