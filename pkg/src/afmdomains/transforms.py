"""Domain transforms applied to image tiles.

Every function accepts a single ``(M, N)`` tile or a stack ``(..., M, N)``
and transforms over the last two axes, so a whole row of tiles can be
processed in one call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft

FILTERBANKS = ("haar", "cdf53")
MAX_DWT_LEVELS = 3
SUBBANDS = ("lo", "hi_vr", "hi_hr", "hi_di")


def _check_finite(tile) -> np.ndarray:
    arr = np.asarray(tile, dtype=np.float64)
    if arr.ndim < 2:
        raise ValueError(f"tile must be at least 2-D, got shape {arr.shape}")
    if arr.shape[-1] < 1 or arr.shape[-2] < 1:
        raise ValueError("tile is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tile contains NaN or Inf")
    return arr


# -- Fourier / cosine ---------------------------------------------------------

def dft2(tile) -> np.ndarray:
    """Complex 2-D DFT with the ``1/(MN)`` forward prefactor."""
    arr = _check_finite(tile)
    m, n = arr.shape[-2:]
    return np.fft.fft2(arr, axes=(-2, -1)) / (m * n)


def dft2_amplitude(tile) -> np.ndarray:
    """Magnitude of the ``1/(MN)``-scaled 2-D DFT, DC term included."""
    return np.abs(dft2(tile))


def dct2(tile) -> np.ndarray:
    """2-D cosine transform with a flat ``2/sqrt(MN)`` prefactor.

    ``F(k, l) = 2/sqrt(MN) * sum_mn f(m, n) cos((2m+1)k pi / 2M) cos((2n+1)l pi / 2N)``.
    There is no extra weighting of the ``k = 0`` / ``l = 0`` rows, so this is
    *not* the orthonormal DCT-II; it differs from ``scipy.fft.dctn(norm="ortho")``
    on the first row and column.
    """
    arr = _check_finite(tile)
    m, n = arr.shape[-2:]
    # unnormalised scipy DCT-II carries a factor 2 per axis
    return scipy.fft.dctn(arr, type=2, axes=(-2, -1)) / (2.0 * math.sqrt(m * n))


# -- wavelets -----------------------------------------------------------------

def _pad_even(x: np.ndarray) -> np.ndarray:
    if x.shape[-1] % 2:
        x = np.concatenate([x, x[..., -1:]], axis=-1)
    return x


def _analysis_last(x: np.ndarray, bank: str) -> tuple[np.ndarray, np.ndarray]:
    x = _pad_even(x)
    even = x[..., 0::2]
    odd = x[..., 1::2]
    if bank == "haar":
        # unscaled; the 2-D caller applies 1/sqrt(2) per axis as one exact 1/2
        return even + odd, even - odd
    # LeGall 5/3 lifting, whole-sample symmetric extension at both ends
    nxt = np.concatenate([even[..., 1:], even[..., -1:]], axis=-1)
    d = odd - 0.5 * (even + nxt)
    prv = np.concatenate([d[..., :1], d[..., :-1]], axis=-1)
    s = even + 0.25 * (prv + d)
    return s, d


def _synthesis_last(s: np.ndarray, d: np.ndarray, bank: str, length: int) -> np.ndarray:
    if bank == "haar":
        even = s + d
        odd = s - d
    else:
        prv = np.concatenate([d[..., :1], d[..., :-1]], axis=-1)
        even = s - 0.25 * (prv + d)
        nxt = np.concatenate([even[..., 1:], even[..., -1:]], axis=-1)
        odd = d + 0.5 * (even + nxt)
    out = np.empty(s.shape[:-1] + (2 * s.shape[-1],))
    out[..., 0::2] = even
    out[..., 1::2] = odd
    return out[..., :length]


def _analysis_axis(x, bank, axis):
    lo, hi = _analysis_last(np.moveaxis(x, axis, -1), bank)
    return np.moveaxis(lo, -1, axis), np.moveaxis(hi, -1, axis)


def _synthesis_axis(lo, hi, bank, axis, length):
    out = _synthesis_last(np.moveaxis(lo, axis, -1), np.moveaxis(hi, axis, -1), bank, length)
    return np.moveaxis(out, -1, axis)


@dataclass
class WaveletLevel:
    lo: np.ndarray
    hi_vr: np.ndarray
    hi_hr: np.ndarray
    hi_di: np.ndarray
    input_shape: tuple[int, int]

    def subbands(self) -> tuple[np.ndarray, ...]:
        """Subbands in the order LL, HL (vertical detail), LH (horizontal detail), HH."""
        return self.lo, self.hi_vr, self.hi_hr, self.hi_di


@dataclass
class WaveletPyramid:
    filterbank: str
    levels: list[WaveletLevel] = field(default_factory=list)

    @property
    def n_levels(self) -> int:
        return len(self.levels)


def dwt2_multilevel(tile, filterbank: str = "haar", levels: int = 1) -> WaveletPyramid:
    """Separable multilevel 2-D DWT.

    Rows are filtered first (horizontal), then columns.  ``hi_vr`` is
    high-pass horizontally and low-pass vertically, so it responds to
    vertical edges; ``hi_hr`` is the transpose case and ``hi_di`` is
    high-pass in both directions.  Each further level decomposes the
    previous ``lo`` band.  Odd lengths are extended by repeating the last
    sample, so every subband side is ``ceil(previous / 2)``.

    ``filterbank="haar"`` uses the orthonormal pair ``[1, 1]/sqrt(2)``,
    ``[1, -1]/sqrt(2)``; ``"cdf53"`` is the LeGall 5/3 biorthogonal pair
    (low-pass ``[-1, 2, 6, 2, -1]/8``, high-pass ``[-1, 2, -1]/2``),
    computed by lifting with symmetric boundary extension.
    """
    if filterbank not in FILTERBANKS:
        raise ValueError(f"unknown filterbank {filterbank!r}; expected one of {FILTERBANKS}")
    if not (isinstance(levels, (int, np.integer)) and 1 <= levels <= MAX_DWT_LEVELS):
        raise ValueError(f"levels must be an integer in 1..{MAX_DWT_LEVELS}, got {levels}")
    current = _check_finite(tile)
    pyramid = WaveletPyramid(filterbank)
    for level in range(levels):
        m, n = current.shape[-2:]
        if m < 2 or n < 2:
            raise ValueError(
                f"tile too small for {levels} levels: level {level + 1} input is {m}x{n}")
        lo_h, hi_h = _analysis_axis(current, filterbank, -1)
        ll, lh = _analysis_axis(lo_h, filterbank, -2)
        hl, hh = _analysis_axis(hi_h, filterbank, -2)
        if filterbank == "haar":
            ll, lh, hl, hh = 0.5 * ll, 0.5 * lh, 0.5 * hl, 0.5 * hh
        pyramid.levels.append(WaveletLevel(ll, hl, lh, hh, (m, n)))
        current = ll
    return pyramid


def idwt2_multilevel(pyramid: WaveletPyramid) -> np.ndarray:
    """Invert :func:`dwt2_multilevel`."""
    bank = pyramid.filterbank
    current = pyramid.levels[-1].lo
    for lev in reversed(pyramid.levels):
        m, n = lev.input_shape
        lo_h = _synthesis_axis(current, lev.hi_hr, bank, -2, m)
        hi_h = _synthesis_axis(lev.hi_vr, lev.hi_di, bank, -2, m)
        current = _synthesis_axis(lo_h, hi_h, bank, -1, n)
        if bank == "haar":
            current = 0.5 * current
    return current


# -- Radon --------------------------------------------------------------------

def projection_length(m: int, n: int) -> int:
    """Canvas side for projections of an ``m x n`` tile.

    The diagonal ``ceil(sqrt(m^2 + n^2))``, bumped by one when needed so the
    unrotated tile sits on whole canvas columns.
    """
    d = math.ceil(math.hypot(m, n))
    if (d - n) % 2:
        d += 1
    return d


def radon_angles(n_angles: int) -> np.ndarray:
    if n_angles < 1:
        raise ValueError(f"n_angles must be >= 1, got {n_angles}")
    return np.arange(n_angles) * (180.0 / n_angles)


def _footprint_cdf(t: np.ndarray, a: float, b: float) -> np.ndarray:
    """CDF of the sum of two centred uniforms of widths ``a`` and ``b``.

    This is the projected footprint of a unit pixel: a trapezoid whose
    area is 1.
    """
    if b < 1e-12:
        return np.clip((t + a / 2) / a, 0.0, 1.0)
    if a < 1e-12:
        return np.clip((t + b / 2) / b, 0.0, 1.0)

    def ramp2(x):
        return np.maximum(x, 0.0) ** 2 / 2

    hi, lo = (a + b) / 2, abs(a - b) / 2
    out = (ramp2(t + hi) - ramp2(t + lo) - ramp2(t - lo) + ramp2(t - hi)) / (a * b)
    return np.clip(out, 0.0, 1.0)


@lru_cache(maxsize=32)
def _projection_operator(m: int, n: int, n_angles: int) -> np.ndarray:
    # Rotating by -theta and summing columns is linear in the tile.  Each
    # pixel is a unit square; its projection onto the column axis is a
    # trapezoid, and canvas column k receives the part of that trapezoid
    # lying in [k - 1/2, k + 1/2].  Weights per pixel sum to 1, so every
    # projection keeps the tile's total mass.
    d = projection_length(m, n)
    theta = np.deg2rad(radon_angles(n_angles))
    y = np.arange(m) - (m - 1) / 2.0
    x = np.arange(n) - (n - 1) / 2.0
    yy, xx = np.meshgrid(y, x, indexing="ij")
    yy = yy.ravel()
    xx = xx.ravel()
    edges = np.arange(d + 1) - 0.5
    centre = (d - 1) / 2.0
    op = np.empty((n_angles, d, m * n))
    for i, t in enumerate(theta):
        c, s = math.cos(t), math.sin(t)
        u = xx * c + yy * s + centre
        cdf = _footprint_cdf(edges[:, None] - u[None, :], abs(c), abs(s))
        op[i] = np.diff(cdf, axis=0)
    op.setflags(write=False)
    return op


@dataclass
class Sinogram:
    values: np.ndarray  # (..., projection_length, n_angles)
    angles: np.ndarray  # degrees


def radon_sinogram(tile, n_angles: int = 180) -> Sinogram:
    """Sinogram of line integrals at ``n_angles`` uniform angles in [0, 180).

    Column ``a`` holds the projection at ``a * 180 / n_angles`` degrees:
    the column sums of the tile after rotating it by minus that angle about
    its centre on a canvas of side :func:`projection_length`.  Pixels are
    treated as unit squares and each canvas column integrates the area of
    the rotated squares it overlaps (a strip integral), so at 0 degrees the
    projection is exactly the column sums and every projection sums to the
    tile total.  Outside the tile the image is 0.
    """
    arr = _check_finite(tile)
    angles = radon_angles(n_angles)
    m, n = arr.shape[-2:]
    op = _projection_operator(m, n, n_angles)
    flat = arr.reshape(arr.shape[:-2] + (m * n,))
    proj = flat @ op.reshape(-1, m * n).T
    proj = proj.reshape(arr.shape[:-2] + op.shape[:2])
    return Sinogram(np.swapaxes(proj, -1, -2), angles)
