"""Moment statistics of transformed tiles and the per-image feature cube."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import transforms
from .tiling import TileGrid, TileSpec, extract_tiles

STATS = ("mean", "variance", "skew", "kurtosis")
METHODS = ("dft", "dct", "dwt", "radon")
_DWT_BANDS = ("LL", "HL", "LH", "HH")

# Tile rows per work unit. Fixed so chunking never depends on the worker count.
_ROWS_PER_CHUNK = 8


def stats4(values, axes=None) -> np.ndarray:
    """Population mean, variance, skew and (non-excess) kurtosis.

    Moments are taken over ``axes`` (default: all axes) and stacked on a new
    last axis.  Where the variance is zero, skew and kurtosis are 0.

    >>> stats4([1.0, 2.0, 3.0, 4.0])
    array([2.5 , 1.25, 0.  , 1.64])
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot compute statistics of an empty matrix")
    if axes is None:
        axes = tuple(range(x.ndim))
    mean = x.mean(axis=axes, keepdims=True)
    dev = x - mean
    dev2 = dev * dev
    m2 = dev2.mean(axis=axes)
    m3 = (dev2 * dev).mean(axis=axes)
    m4 = (dev2 * dev2).mean(axis=axes)
    flat = m2 > 0
    safe = np.where(flat, m2, 1.0)
    skew = np.where(flat, m3 / safe ** 1.5, 0.0)
    kurt = np.where(flat, m4 / safe ** 2, 0.0)
    return np.stack([np.squeeze(mean, axis=axes), m2, skew, kurt], axis=-1)


@dataclass(frozen=True)
class FeatureOptions:
    """Which statistics to keep and the transform parameters."""

    channels: tuple[str, ...] = STATS
    wavelet: str = "haar"
    levels: int = 1
    n_angles: int = 180

    def __post_init__(self):
        if not self.channels:
            raise ValueError("feature mask must select at least one statistic")
        bad = [c for c in self.channels if c not in STATS]
        if bad:
            raise ValueError(f"unknown statistics {bad}; expected a subset of {STATS}")
        # canonical order so masks given in any order produce identical cubes
        object.__setattr__(self, "channels", tuple(s for s in STATS if s in self.channels))

    @property
    def stat_index(self) -> list[int]:
        return [STATS.index(c) for c in self.channels]


def channel_names(method: str, options: FeatureOptions = FeatureOptions()) -> list[str]:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if method != "dwt":
        return list(options.channels)
    return [f"L{lev + 1}_{band}_{stat}"
            for lev in range(options.levels)
            for band in _DWT_BANDS
            for stat in options.channels]


def _features_batch(tiles: np.ndarray, method: str, options: FeatureOptions) -> np.ndarray:
    """Full-statistics features for a stack of tiles ``(..., M, N)``, then masked."""
    idx = options.stat_index
    if method == "dft":
        return stats4(transforms.dft2_amplitude(tiles), axes=(-2, -1))[..., idx]
    if method == "dct":
        return stats4(transforms.dct2(tiles), axes=(-2, -1))[..., idx]
    if method == "radon":
        sino = transforms.radon_sinogram(tiles, options.n_angles).values
        return stats4(sino, axes=(-2, -1))[..., idx]
    if method == "dwt":
        pyr = transforms.dwt2_multilevel(tiles, options.wavelet, options.levels)
        parts = [stats4(band, axes=(-2, -1))[..., idx]
                 for lev in pyr.levels for band in lev.subbands()]
        return np.concatenate(parts, axis=-1)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def extract_features(tile, method: str, options: FeatureOptions = FeatureOptions()) -> np.ndarray:
    """Feature vector of one tile.

    dft, dct and radon give the selected statistics of the whole transform
    output.  dwt gives them per subband, level-major with bands ordered
    LL, HL, LH, HH; see :func:`channel_names`.
    """
    tile = np.asarray(tile, dtype=np.float64)
    if tile.ndim != 2:
        raise ValueError(f"tile must be 2-D, got shape {tile.shape}")
    return _features_batch(tile, method, options)


@dataclass
class FeatureCube:
    values: np.ndarray  # (grid_h, grid_w, F)
    channels: list[str]
    grid: TileGrid
    method: str = ""
    normalized: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.values.shape[-1]

    def vectors(self) -> np.ndarray:
        """Row-major ``(grid_h * grid_w, F)`` view for clustering."""
        return self.values.reshape(-1, self.values.shape[-1])


def build_feature_cube(image, spec: TileSpec, method: str,
                       options: FeatureOptions = FeatureOptions(),
                       workers: int = 1) -> FeatureCube:
    """Feature vectors for every tile of ``image`` on the stride lattice.

    Work is split into fixed blocks of tile rows; ``workers`` threads
    process the blocks and results are written back by index, so the cube
    is the same for any worker count.
    """
    names = channel_names(method, options)
    grid, tiles = extract_tiles(image, spec)
    out = np.empty(grid.shape + (len(names),))

    def run(start):
        stop = min(start + _ROWS_PER_CHUNK, grid.grid_h)
        out[start:stop] = _features_batch(np.ascontiguousarray(tiles[start:stop]), method, options)

    starts = range(0, grid.grid_h, _ROWS_PER_CHUNK)
    if workers <= 1:
        for s in starts:
            run(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    return FeatureCube(out, names, grid, method)


def zscore_normalize(cube: FeatureCube) -> FeatureCube:
    """Per-channel z-score with population std; constant channels become 0."""
    vals = np.asarray(cube.values, dtype=np.float64)
    if vals.size == 0:
        raise ValueError("cannot normalize an empty feature cube")
    flat = vals.reshape(-1, vals.shape[-1])
    mean = flat.mean(axis=0)
    std = flat.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    norm = np.where(std > 0, (flat - mean) / scale, 0.0)
    return FeatureCube(norm.reshape(vals.shape), list(cube.channels), cube.grid,
                       cube.method, normalized=True, extra=dict(cube.extra))


def correlation_matrix(cube) -> np.ndarray:
    """Pearson correlation between feature channels.

    Accepts a :class:`FeatureCube` or any array whose last axis is the
    channel axis (e.g. several cubes concatenated).  Zero-variance channels
    get zero off-diagonal entries; the diagonal is always 1.
    """
    vals = np.asarray(getattr(cube, "values", cube), dtype=np.float64)
    flat = vals.reshape(-1, vals.shape[-1])
    if flat.shape[0] < 2:
        raise ValueError("need at least 2 samples for a correlation")
    dev = flat - flat.mean(axis=0)
    norms = np.sqrt((dev * dev).sum(axis=0))
    live = norms > 0
    unit = np.where(live, dev / np.where(live, norms, 1.0), 0.0)
    corr = np.clip(unit.T @ unit, -1.0, 1.0)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return corr
