"""Seeded two-texture test images with exact ground-truth masks.

Region A is uniform white noise, region B a smooth product of sines.  The
defaults make A bright and busy and B dark and smooth, which is the
contrast the DFT-variance feature picks up.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .cluster import IndexMap, make_rng
from .imgio import GrayImage

logger = logging.getLogger(__name__)

LAYOUTS = ("vertical-split", "horizontal-split", "disk", "stripes")
MIN_VARIANCE_RATIO = 10.0


@dataclass(frozen=True)
class SynthSpec:
    width: int = 256
    height: int = 256
    layout: str = "vertical-split"
    noise_mean: float = 170.0
    noise_amplitude: float = 60.0
    sine_mean: float = 40.0
    sine_amplitude: float = 25.0
    sine_period: float = 16.0
    seed: int = 0
    nm_per_pixel: float = 5.0
    disk_radius: float | None = None  # default: min(width, height) / 4
    stripe_width: int = 32

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise ValueError(f"unknown layout {self.layout!r}; expected one of {LAYOUTS}")
        if self.width < 2 or self.height < 2:
            raise ValueError("image must be at least 2x2")
        for name, mean, amp in (("noise", self.noise_mean, self.noise_amplitude),
                                ("sine", self.sine_mean, self.sine_amplitude)):
            if amp < 0:
                raise ValueError(f"{name}_amplitude must be >= 0")
            if mean - amp < 0 or mean + amp > 255:
                raise ValueError(
                    f"{name} texture overflows [0, 255]: mean {mean} +/- amplitude {amp}")
        if self.sine_period <= 0:
            raise ValueError("sine_period must be positive")
        if self.stripe_width < 1:
            raise ValueError("stripe_width must be >= 1")


def region_a_mask(spec: SynthSpec) -> np.ndarray:
    """Boolean map of texture A for the spec's layout."""
    h, w = spec.height, spec.width
    yy, xx = np.mgrid[:h, :w]
    if spec.layout == "vertical-split":
        mask = xx < w // 2
    elif spec.layout == "horizontal-split":
        mask = yy < h // 2
    elif spec.layout == "disk":
        radius = spec.disk_radius if spec.disk_radius is not None else min(h, w) / 4
        cy, cx = h // 2, w // 2
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius * radius
    else:
        mask = (xx // spec.stripe_width) % 2 == 0
    if mask.all() or not mask.any():
        raise ValueError(f"layout {spec.layout!r} leaves one texture with no area")
    return mask


def synth_texture_image(spec: SynthSpec = SynthSpec()) -> tuple[GrayImage, IndexMap]:
    """Render the image and its light/dark ground truth.

    Texture A is marked light (1) iff its mean intensity is strictly higher
    than texture B's.  The same spec always renders the same bits.
    """
    a_mask = region_a_mask(spec)
    rng = make_rng(spec.seed)
    h, w = spec.height, spec.width
    noise = spec.noise_mean + rng.uniform(-spec.noise_amplitude, spec.noise_amplitude, size=(h, w))
    yy, xx = np.mgrid[:h, :w]
    k = 2 * np.pi / spec.sine_period
    smooth = spec.sine_mean + spec.sine_amplitude * np.sin(k * xx) * np.sin(k * yy)
    pixels = np.clip(np.where(a_mask, noise, smooth), 0.0, 255.0)

    a_light = pixels[a_mask].mean() > pixels[~a_mask].mean()
    truth = (a_mask if a_light else ~a_mask).astype(np.uint8)
    image = GrayImage(pixels, spec.nm_per_pixel)
    return image, IndexMap(truth, (0, 0), 1, spec.nm_per_pixel)


def dft_variance_ratio(image: GrayImage, truth: IndexMap, tile: int = 12) -> float:
    """Ratio of mean DFT-amplitude variance between the two regions.

    Only tiles lying entirely inside one region are used.  Returns the
    larger region mean over the smaller.
    """
    from .features import stats4
    from .tiling import TileSpec, extract_tiles
    from .transforms import dft2_amplitude

    spec = TileSpec(tile, tile, stride=max(1, tile // 2))
    grid, tiles = extract_tiles(image, spec)
    var = stats4(dft2_amplitude(tiles), axes=(-2, -1))[..., 1]
    _, label_tiles = extract_tiles(truth.labels.astype(float), spec)
    frac = label_tiles.mean(axis=(-2, -1))
    light = var[frac == 1.0]
    dark = var[frac == 0.0]
    if light.size == 0 or dark.size == 0:
        raise ValueError(f"no {tile}x{tile} tile fits entirely inside both regions")
    hi, lo = sorted((light.mean(), dark.mean()), reverse=True)
    return float(hi / lo) if lo > 0 else float("inf")


def check_contrast(image: GrayImage, truth: IndexMap, tile: int = 12) -> bool:
    """Warn (and return False) when the DFT-variance contrast is below 10x."""
    ratio = dft_variance_ratio(image, truth, tile)
    if ratio < MIN_VARIANCE_RATIO:
        logger.warning("DFT-variance contrast between textures is only %.2fx", ratio)
        return False
    return True
