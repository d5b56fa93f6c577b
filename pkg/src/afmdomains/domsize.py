"""Local thickness of binary domains and domain-size distributions."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

logger = logging.getLogger(__name__)


def squared_edt(mask) -> np.ndarray:
    """Exact squared Euclidean distance to the nearest background pixel.

    Everything outside the image counts as background.  Values are integers
    (returned as int64); background pixels are 0.
    """
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1, constant_values=False)
    d = ndimage.distance_transform_edt(padded)[1:-1, 1:-1]
    return np.rint(d * d).astype(np.int64)


# neighbour offsets (dr, dc, squared step)
_NEIGHBOURS = [(dr, dc, dr * dr + dc * dc)
               for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]


def _covered_by_neighbour(d2: np.ndarray) -> np.ndarray:
    """Pixels whose inscribed disk lies inside a neighbour's inscribed disk.

    Disk(c, r) is inside disk(c', r') when r' >= r + |c - c'|.  With integer
    squares a = r'^2, b = r^2, s = |c - c'|^2 this is
    ``a - b - s >= 0 and (a - b - s)^2 >= 4 b s``, evaluated exactly.
    """
    h, w = d2.shape
    padded = np.pad(d2, 1, constant_values=0)
    covered = np.zeros(d2.shape, dtype=bool)
    for dr, dc, s in _NEIGHBOURS:
        a = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        diff = a - d2 - s
        covered |= (diff >= 0) & (diff * diff >= 4 * d2 * s)
    return covered


def local_thickness(mask) -> np.ndarray:
    """Radius of the largest inscribed disk covering each foreground pixel.

    ``LT(p) = max { EDT(c) : |p - c| <= EDT(c) }`` where ``EDT`` is the
    Euclidean distance to the nearest background pixel (outside the image is
    background).  Background pixels get 0, and the result is exact: every
    value is ``sqrt`` of an integer squared distance.

    Only disks that are not contained in a neighbouring pixel's disk are
    painted, which in practice leaves the medial ridge of each domain.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    d2 = squared_edt(mask)
    out2 = np.zeros_like(d2)
    centres = mask & ~_covered_by_neighbour(d2)
    rows, cols = np.nonzero(centres)
    r2s = d2[rows, cols]
    h, w = mask.shape
    for r, c, r2 in zip(rows, cols, r2s):
        rad = int(np.floor(np.sqrt(r2)))
        r0, r1 = max(r - rad, 0), min(r + rad + 1, h)
        c0, c1 = max(c - rad, 0), min(c + rad + 1, w)
        dy = (np.arange(r0, r1) - r)[:, None]
        dx = (np.arange(c0, c1) - c)[None, :]
        inside = dy * dy + dx * dx <= r2
        window = out2[r0:r1, c0:c1]
        np.maximum(window, np.where(inside, r2, 0), out=window)
    # a disk of radius EDT(c) reaches the nearest background pixels exactly
    out2[~mask] = 0
    return np.sqrt(out2.astype(np.float64))


@dataclass
class DomainSizeDistribution:
    radius_px: np.ndarray   # integer bin radii, strictly increasing
    counts: np.ndarray
    nm_per_pixel: float

    @property
    def radius_nm(self) -> np.ndarray:
        return self.radius_px * self.nm_per_pixel

    @property
    def probability(self) -> np.ndarray:
        total = self.counts.sum()
        if total == 0:
            return np.zeros(0)
        return self.counts / total

    @property
    def empty(self) -> bool:
        return self.counts.size == 0

    def mean_nm(self) -> float:
        if self.empty:
            raise ValueError("mean of an empty distribution")
        return float((self.radius_nm * self.probability).sum())

    def to_csv(self) -> str:
        lines = ["radius_nm,probability,count"]
        for rad, p, n in zip(self.radius_nm, self.probability, self.counts):
            lines.append(f"{rad:.6g},{p:.12g},{int(n)}")
        return "\n".join(lines) + "\n"


def size_distribution(tmap, nm_per_pixel: float) -> DomainSizeDistribution:
    """Histogram of foreground thickness values at integer pixel radii.

    Bin ``r`` collects values in ``(r - 1, r]``.  Only populated bins are
    kept.  An all-zero map gives an empty distribution.
    """
    if not (nm_per_pixel > 0):
        raise ValueError(f"nm_per_pixel must be positive, got {nm_per_pixel}")
    vals = np.asarray(tmap, dtype=np.float64)
    vals = vals[vals > 0]
    if vals.size == 0:
        logger.warning("empty foreground: size distribution is empty")
        return DomainSizeDistribution(np.zeros(0, dtype=int), np.zeros(0, dtype=int), nm_per_pixel)
    bins = np.ceil(vals).astype(np.int64)
    radii, counts = np.unique(bins, return_counts=True)
    return DomainSizeDistribution(radii, counts, float(nm_per_pixel))


@dataclass
class DomainSizeSummary:
    mean_nm: float
    std_nm: float
    max_nm: float
    min_nm: float
    n_images: int
    warnings: list[str] = field(default_factory=list)


def aggregate_stats(distributions, grouping) -> dict:
    """Per-group statistics of the per-image mean domain size.

    Parameters
    ----------
    distributions : sequence of DomainSizeDistribution
    grouping : sequence
        Group (sample) id for each distribution.

    Returns
    -------
    dict
        ``{group_id: DomainSizeSummary}`` with the mean, population std,
        max and min over the images in the group.  Images with an empty
        distribution are left out and named in ``warnings``.
    """
    distributions = list(distributions)
    grouping = list(grouping)
    if len(distributions) != len(grouping):
        raise ValueError("need exactly one group id per distribution")
    groups: dict = {}
    for i, (dist, gid) in enumerate(zip(distributions, grouping)):
        means, warns = groups.setdefault(gid, ([], []))
        if dist.empty:
            warns.append(f"image {i} has an empty distribution and was excluded")
        else:
            means.append(dist.mean_nm())
    out = {}
    for gid, (means, warns) in groups.items():
        if not means:
            raise ValueError(f"group {gid!r} has no non-empty distributions")
        arr = np.array(means)
        out[gid] = DomainSizeSummary(float(arr.mean()), float(arr.std()), float(arr.max()),
                                     float(arr.min()), len(means), warns)
    return out
