"""Grayscale image loading, phase normalization and PGM output."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class ImageIOError(OSError):
    """Raised when an image or its sidecar cannot be read or is invalid."""


@dataclass(frozen=True)
class GrayImage:
    """Real-valued intensity grid in [0, 255] with a physical pixel size.

    ``pixels`` is indexed ``[row, col]``; ``nm_per_pixel`` maps one pixel
    to nanometres.
    """

    pixels: np.ndarray
    nm_per_pixel: float

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 2 or px.shape[1] < 2:
            raise ValueError(f"image must be 2-D with both sides >= 2, got shape {px.shape}")
        if not np.all(np.isfinite(px)) or px.min() < 0 or px.max() > 255:
            raise ValueError("intensities must be finite and within [0, 255]")
        if not (self.nm_per_pixel > 0):
            raise ValueError(f"nm_per_pixel must be positive, got {self.nm_per_pixel}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def normalize_intensity(raw) -> np.ndarray:
    """Linearly map raw phase values (degrees) onto [0, 255].

    The minimum maps to 0 and the maximum to 255.  A constant input maps to
    all zeros.

    >>> normalize_intensity([-180.0, 0.0, 180.0])
    array([  0. , 127.5, 255. ])
    """
    values = np.asarray(raw, dtype=np.float64)
    if values.size == 0:
        raise ValueError("raw phase matrix is empty")
    if not np.all(np.isfinite(values)):
        raise ValueError("raw phase matrix contains NaN or Inf")
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros_like(values)
    out = (values - lo) * (255.0 / (hi - lo))
    # guard the endpoints against rounding
    return np.clip(out, 0.0, 255.0)


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ImageIOError(f"{path}: not a grayscale PGM (magic {magic!r})")

    # header: magic, width, height, maxval separated by whitespace, '#' comments allowed
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ImageIOError(f"{path}: truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(data[start:pos]))
    width, height, maxval = tokens
    if not 0 < maxval < 65536:
        raise ImageIOError(f"{path}: invalid PGM maxval {maxval}")

    if magic == b"P2":
        body = data[pos:].split()
        if len(body) < width * height:
            raise ImageIOError(f"{path}: truncated PGM body")
        arr = np.array([int(v) for v in body[:width * height]], dtype=np.int64)
    else:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        count = width * height
        if len(data) - pos < count * dtype.itemsize:
            raise ImageIOError(f"{path}: truncated PGM body")
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos).astype(np.int64)
    return arr.reshape(height, width), maxval


def _read_png(path: Path):
    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode in ("L", "1"):
                return np.asarray(im.convert("L"), dtype=np.int64), 255
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.int64)
                return arr, 65535
    except OSError as exc:
        raise ImageIOError(f"{path}: unreadable image ({exc})") from exc
    raise ImageIOError(f"{path}: not a grayscale image (mode {mode})")


def read_raster(path) -> np.ndarray:
    """Read a grayscale PGM or PNG as a float array scaled to [0, 255]."""
    path = Path(path)
    if not path.is_file():
        raise ImageIOError(f"{path}: no such file")
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic in (b"P2", b"P5"):
        arr, maxval = _read_pgm(path)
    elif magic == b"\x89P":
        arr, maxval = _read_png(path)
    else:
        raise ImageIOError(f"{path}: unsupported image format (expected PGM or PNG)")
    if maxval == 255:
        return arr.astype(np.float64)
    return arr.astype(np.float64) * (255.0 / maxval)


def read_sidecar(path) -> float:
    """Return ``scan_size_nm`` from a JSON sidecar."""
    path = Path(path)
    try:
        meta = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ImageIOError(f"{path}: no such file") from exc
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"{path}: unreadable sidecar ({exc})") from exc
    scan = meta.get("scan_size_nm") if isinstance(meta, dict) else None
    if isinstance(scan, bool) or not isinstance(scan, (int, float)):
        raise ImageIOError(f"{path}: scan_size_nm missing or not a number")
    if not (scan > 0) or not np.isfinite(scan):
        raise ImageIOError(f"{path}: scan_size_nm must be positive, got {scan}")
    return float(scan)


def load_image(image_path, sidecar_path) -> GrayImage:
    """Load a grayscale image and derive its pixel size from the sidecar.

    Parameters
    ----------
    image_path : path-like
        8- or 16-bit grayscale PNG, or PGM (P2/P5).  16-bit data is scaled
        linearly so that 65535 (or the PGM maxval) maps to 255.
    sidecar_path : path-like
        JSON document holding ``scan_size_nm``, the physical image width.
    """
    pixels = read_raster(image_path)
    scan = read_sidecar(sidecar_path)
    if pixels.shape[0] < 2 or pixels.shape[1] < 2:
        raise ImageIOError(f"{image_path}: image must be at least 2x2")
    return GrayImage(pixels, scan / pixels.shape[1])


def write_pgm(path, pixels, maxval: int = 255) -> None:
    """Write a binary (P5) PGM.

    Values are rounded to the nearest integer and clipped to ``[0, maxval]``.
    ``maxval > 255`` writes big-endian 16-bit samples.
    """
    arr = np.clip(np.rint(np.asarray(pixels, dtype=np.float64)), 0, maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.astype(dtype).tobytes())


def write_sidecar(path, scan_size_nm: float) -> None:
    with open(path, "w") as fh:
        json.dump({"scan_size_nm": scan_size_nm}, fh)
        fh.write("\n")
