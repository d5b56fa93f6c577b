"""Tile geometry: tile size from the win factor and the interior tile lattice.

A tile of size ``t`` centred on pixel ``i`` covers the half-open slice
``[i - t // 2, i - t // 2 + t)``.  Centres run from ``t // 2`` in steps of
``stride`` while the tile stays inside the image, so boundary pixels never
get a tile of their own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def tile_dims(image_w: int, image_h: int, win_factor: float) -> tuple[int, int]:
    """Tile ``(width, height)`` for an image of the given size.

    Each side is ``image_side * win_factor`` rounded half away from zero and
    clamped to ``[2, image_side]``.

    >>> tile_dims(384, 384, 0.03)
    (12, 12)
    """
    if not (0.0 < win_factor < 1.0):
        raise ValueError(f"win_factor must lie in (0, 1), got {win_factor}")
    if image_w < 2 or image_h < 2:
        raise ValueError(f"image dimensions must be >= 2, got {image_w}x{image_h}")
    tw = min(max(_round_half_away(image_w * win_factor), 2), image_w)
    th = min(max(_round_half_away(image_h * win_factor), 2), image_h)
    return tw, th


@dataclass(frozen=True)
class TileSpec:
    tile_w: int
    tile_h: int
    stride: int = 1

    def __post_init__(self):
        if self.tile_w < 2 or self.tile_h < 2:
            raise ValueError(f"tile must be at least 2x2, got {self.tile_w}x{self.tile_h}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")

    @classmethod
    def from_win_factor(cls, image_w: int, image_h: int, win_factor: float, stride: int = 1):
        tw, th = tile_dims(image_w, image_h, win_factor)
        return cls(tw, th, stride)


@dataclass(frozen=True)
class TileGrid:
    """Regular lattice of tile centres inside an image."""

    grid_h: int
    grid_w: int
    offset: tuple[int, int]
    stride: int
    tile_h: int
    tile_w: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid_h, self.grid_w

    @property
    def center_rows(self) -> np.ndarray:
        return self.offset[0] + self.stride * np.arange(self.grid_h)

    @property
    def center_cols(self) -> np.ndarray:
        return self.offset[1] + self.stride * np.arange(self.grid_w)

    @property
    def centers(self) -> list[tuple[int, int]]:
        """Row-major list of ``(row, col)`` centre coordinates."""
        return [(int(r), int(c)) for r in self.center_rows for c in self.center_cols]

    def tile_slices(self, r: int, c: int) -> tuple[slice, slice]:
        """Pixel slices of the tile at grid cell ``(r, c)``."""
        row = self.offset[0] + r * self.stride - self.tile_h // 2
        col = self.offset[1] + c * self.stride - self.tile_w // 2
        return slice(row, row + self.tile_h), slice(col, col + self.tile_w)

    def sample(self, image: np.ndarray) -> np.ndarray:
        """Values of a full-size image at the tile centres, shape ``(grid_h, grid_w)``."""
        return np.asarray(image)[np.ix_(self.center_rows, self.center_cols)]

    def pad_to_image(self, grid_values: np.ndarray, image_shape: tuple[int, int]) -> np.ndarray:
        """Spread grid values back to an image-sized array.

        Every pixel takes the value of the nearest tile centre, so the
        excluded boundary is filled by replicating the interior.
        """
        h, w = image_shape
        rows = np.clip(np.rint((np.arange(h) - self.offset[0]) / self.stride), 0, self.grid_h - 1)
        cols = np.clip(np.rint((np.arange(w) - self.offset[1]) / self.stride), 0, self.grid_w - 1)
        return np.asarray(grid_values)[np.ix_(rows.astype(int), cols.astype(int))]


def tile_grid(image_shape: tuple[int, int], spec: TileSpec) -> TileGrid:
    h, w = image_shape
    if spec.tile_h > h or spec.tile_w > w:
        raise ValueError(
            f"tile {spec.tile_w}x{spec.tile_h} does not fit in image {w}x{h}")
    return TileGrid(
        grid_h=(h - spec.tile_h) // spec.stride + 1,
        grid_w=(w - spec.tile_w) // spec.stride + 1,
        offset=(spec.tile_h // 2, spec.tile_w // 2),
        stride=spec.stride,
        tile_h=spec.tile_h,
        tile_w=spec.tile_w,
    )


def extract_tiles(image, spec: TileSpec) -> tuple[TileGrid, np.ndarray]:
    """Enumerate all tiles of ``image`` on the stride lattice.

    Returns the grid and a read-only view of shape
    ``(grid_h, grid_w, tile_h, tile_w)``; cell ``(r, c)`` is the tile centred
    at ``grid.centers[r * grid_w + c]``.  No pixel data is copied.
    """
    pixels = getattr(image, "pixels", image)
    pixels = np.asarray(pixels, dtype=np.float64)
    grid = tile_grid(pixels.shape, spec)
    windows = sliding_window_view(pixels, (spec.tile_h, spec.tile_w))
    tiles = windows[::spec.stride, ::spec.stride]
    assert tiles.shape[:2] == grid.shape
    return grid, tiles
