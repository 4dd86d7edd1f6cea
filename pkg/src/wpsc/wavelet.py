"""Non-decimated 2D Haar wavelet-packet transform.

Filtering is separable with the orthonormal Haar pair lo = (1, 1)/sqrt(2),
hi = (1, -1)/sqrt(2), holes-upsampled by 2**(j-1) - 1 zeros at level j,
periodic extension, no downsampling. Subbands therefore keep the input
shape, the four level-1 energies sum to four times the input energy, and
the dual (time-reversed, quarter-scaled) bank reconstructs exactly.

Subband letters: A = lo.lo, H = lo.hi, V = hi.lo, D = hi.hi, where the
first letter filters along image rows (height) and the second along
columns (width).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DepthError, ParameterError, SizeError

ALPHABET = "AHVD"
_SQRT2 = np.sqrt(2.0)


def subband_level(path):
    """Resolution level of a subband path; '' is the original data."""
    if any(ch not in ALPHABET for ch in path):
        raise ParameterError(f"invalid subband path {path!r}")
    return len(path)


def _pass(x, step, axis, sign):
    # y[n] = (x[n] + sign * x[n + step mod L]) / sqrt(2)
    return (x + sign * np.roll(x, -step, axis=axis)) / _SQRT2


def _pass_adjoint(y, step, axis, sign):
    # z[n] = (y[n] + sign * y[n - step mod L]) / sqrt(2)
    return (y + sign * np.roll(y, step, axis=axis)) / _SQRT2


def _check_size(h, w, level):
    if h < 2 ** level or w < 2 ** level:
        raise SizeError(
            f"image {h}x{w} too small for level {level} (needs >= {2 ** level})"
        )


def haar_analysis_2d(img, level=1):
    """Split an image into (A, H, V, D) subbands at the given level.

    ``img`` may be a single h x w image or an (..., h, w) stack; the last
    two axes are filtered. Returns four arrays of the input shape.
    """
    img = np.asarray(img, dtype=np.float64)
    if level < 1:
        raise ParameterError("level must be >= 1")
    _check_size(img.shape[-2], img.shape[-1], level)
    step = 2 ** (level - 1)
    lo_r = _pass(img, step, -2, +1.0)
    hi_r = _pass(img, step, -2, -1.0)
    a = _pass(lo_r, step, -1, +1.0)
    h = _pass(lo_r, step, -1, -1.0)
    v = _pass(hi_r, step, -1, +1.0)
    d = _pass(hi_r, step, -1, -1.0)
    return a, h, v, d


def haar_synthesis_2d(a, h, v, d, level=1):
    """Invert :func:`haar_analysis_2d`: dual filters, quarter-scaled."""
    a, h, v, d = (np.asarray(s, dtype=np.float64) for s in (a, h, v, d))
    if not (a.shape == h.shape == v.shape == d.shape):
        raise ParameterError("subband shapes must match")
    if level < 1:
        raise ParameterError("level must be >= 1")
    _check_size(a.shape[-2], a.shape[-1], level)
    step = 2 ** (level - 1)
    lo_r = _pass_adjoint(a, step, -1, +1.0) + _pass_adjoint(h, step, -1, -1.0)
    hi_r = _pass_adjoint(v, step, -1, +1.0) + _pass_adjoint(d, step, -1, -1.0)
    out = _pass_adjoint(lo_r, step, -2, +1.0) + _pass_adjoint(hi_r, step, -2, -1.0)
    return out / 4.0


@dataclass(frozen=True)
class WaveletPacketSet:
    """All non-root subband coefficient matrices of a dataset.

    ``nodes`` maps each subband path (string over A/H/V/D, level = length)
    to a D x N matrix of the same shape as the input; for J levels there
    are sum_{j=1..J} 4**j nodes, iterated in lexicographic path order.
    """

    nodes: dict
    img_h: int
    img_w: int
    J: int

    def __getitem__(self, path):
        if path == "":
            raise ParameterError("path '' is the original data, not a node")
        return self.nodes[path]

    def paths(self):
        return list(self.nodes.keys())


def wp_children(wp, path):
    """The four children of a node, in the fixed order A, H, V, D."""
    if subband_level(path) >= wp.J:
        raise DepthError(f"node {path!r} is at max level J={wp.J}")
    return [path + ch for ch in ALPHABET]


def wp_decompose(ds, J):
    """Full wavelet-packet decomposition of a dataset down to level J.

    Each column is reshaped to img_h x img_w, recursively filtered (node p
    at level j spawns p+A/H/V/D via level j+1 filters), and re-vectorized
    into D x N node matrices.
    """
    if J < 1:
        raise ParameterError("J must be >= 1")
    _check_size(ds.img_h, ds.img_w, J)
    N, D = ds.N, ds.D
    cubes = {"": ds.images()}  # (N, h, w) stacks, filtered along axes 1, 2
    for j in range(1, J + 1):
        for path in [p for p in cubes if len(p) == j - 1]:
            a, h, v, d = haar_analysis_2d(cubes[path], level=j)
            for ch, sub in zip(ALPHABET, (a, h, v, d)):
                cubes[path + ch] = sub
    nodes = {
        path: cubes[path].reshape(N, D).T
        for path in sorted(cubes)
        if path != ""
    }
    return WaveletPacketSet(nodes=nodes, img_h=ds.img_h, img_w=ds.img_w, J=J)


def node_matrix(ds, path):
    """D x N coefficient matrix of a single subband of ``ds``.

    Computes only the ancestors of ``path`` instead of a full decomposition;
    path '' returns the data itself.
    """
    level = subband_level(path)
    if level == 0:
        return ds.data.copy()
    _check_size(ds.img_h, ds.img_w, level)
    cube = ds.images()
    for j, ch in enumerate(path, start=1):
        subs = haar_analysis_2d(cube, level=j)
        cube = subs[ALPHABET.index(ch)]
    return cube.reshape(ds.N, ds.D).T
