"""Segmentation scores for binary light/dark index maps."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


def _labels(x) -> np.ndarray:
    return np.asarray(getattr(x, "labels", x)).astype(np.int64)


def _pair(pred, truth):
    p = _labels(pred)
    t = _labels(truth)
    if p.shape != t.shape:
        raise ValueError(f"dimension mismatch: pred {p.shape} vs truth {t.shape}")
    if p.size == 0:
        raise ValueError("empty index maps")
    return p, t


def accuracy(pred, truth) -> float:
    """Fraction of cells whose labels agree."""
    p, t = _pair(pred, truth)
    return float(np.count_nonzero(p == t)) / p.size


def _overlaps(p, t):
    for i in (0, 1):
        a = p == i
        b = t == i
        inter = np.count_nonzero(a & b)
        yield inter, np.count_nonzero(a), np.count_nonzero(b)


def dice(pred, truth) -> tuple[float, list[float]]:
    """Dice per domain and their unweighted mean.

    Returns ``(overall, [dice_dark, dice_light])``.  A domain absent from
    both maps scores 1.
    """
    p, t = _pair(pred, truth)
    per = []
    for inter, na, nb in _overlaps(p, t):
        per.append(1.0 if na + nb == 0 else 2.0 * inter / (na + nb))
    return 0.5 * (per[0] + per[1]), per


def iou(pred, truth) -> tuple[float, list[float]]:
    """Intersection over union per domain and their unweighted mean."""
    p, t = _pair(pred, truth)
    per = []
    for inter, na, nb in _overlaps(p, t):
        union = na + nb - inter
        per.append(1.0 if union == 0 else inter / union)
    return 0.5 * (per[0] + per[1]), per


@dataclass
class SegmentationScore:
    accuracy: float
    dice: float
    iou: float
    dice_per_domain: list[float]
    iou_per_domain: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def score(pred, truth) -> SegmentationScore:
    d, dper = dice(pred, truth)
    j, jper = iou(pred, truth)
    return SegmentationScore(accuracy(pred, truth), d, j, dper, jper)
