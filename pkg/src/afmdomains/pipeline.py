"""End-to-end segmentation runs, evaluation and batch aggregation.

Output layout of :func:`run_segmentation` under ``output_dir``::

    masks/<stem>.pgm          index map, dark = 0, light = 255
    masks/<stem>.grid.json    tile-grid geometry of the index map
    light/<stem>.pgm          light-domain mask (0/255)
    dark/<stem>.pgm           dark-domain mask (0/255)
    thickness/<stem>_{light,dark}.pgm   16-bit, value = round(LT * 100)
    sizes/<stem>_{light,dark}.csv       radius_nm,probability,count
    report.json               per-image status, paths and timings
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .cluster import DARK, LIGHT, kmeans, label_domains, merge_clusters
from .domsize import (DomainSizeDistribution, aggregate_stats, local_thickness,
                      size_distribution)
from .features import (METHODS, STATS, FeatureOptions, build_feature_cube,
                       correlation_matrix, zscore_normalize)
from .imgio import ImageIOError, load_image, read_raster, write_pgm
from .metrics import score
from .tiling import TileSpec
from .transforms import FILTERBANKS, MAX_DWT_LEVELS

logger = logging.getLogger(__name__)

DOMAINS = {"dark": DARK, "light": LIGHT}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending setting."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field


@dataclass
class PipelineConfig:
    method: str = "dft"
    win_factor: float = 0.03
    stride: int = 1
    features: tuple[str, ...] = ("variance",)
    wavelet: str = "haar"
    levels: int = 1
    angles: int = 180
    k: int = 2
    merge_map: tuple[int, ...] | None = None
    seed: int = 0
    max_iter: int = 300
    tol: float = 1e-6
    inputs: list[str] = field(default_factory=list)
    output_dir: str = "out"
    workers: int = 1
    pad_boundary: bool = False
    dump_cube: bool = False

    def validate(self) -> "PipelineConfig":
        if self.method not in METHODS:
            raise ConfigError("method", f"unsupported method {self.method!r}; choose from {METHODS}")
        if not (isinstance(self.win_factor, (int, float)) and 0 < self.win_factor < 1):
            raise ConfigError("win_factor", f"must lie in (0, 1), got {self.win_factor!r}")
        if not isinstance(self.stride, int) or self.stride < 1:
            raise ConfigError("stride", f"must be an integer >= 1, got {self.stride!r}")
        feats = tuple(self.features)
        if not feats:
            raise ConfigError("features", "feature mask must not be empty")
        bad = [f for f in feats if f not in STATS]
        if bad:
            raise ConfigError("features", f"unknown statistics {bad}; choose from {STATS}")
        self.features = feats
        if self.wavelet not in FILTERBANKS:
            raise ConfigError("wavelet", f"unsupported wavelet {self.wavelet!r}; choose from {FILTERBANKS}")
        if not isinstance(self.levels, int) or not 1 <= self.levels <= MAX_DWT_LEVELS:
            raise ConfigError("levels", f"must be an integer in 1..{MAX_DWT_LEVELS}, got {self.levels!r}")
        if not isinstance(self.angles, int) or self.angles < 1:
            raise ConfigError("angles", f"must be an integer >= 1, got {self.angles!r}")
        if not isinstance(self.k, int) or self.k < 2:
            raise ConfigError("k", f"must be an integer >= 2, got {self.k!r}")
        if self.k > 2:
            if self.merge_map is None:
                raise ConfigError("merge_map", f"k = {self.k} needs a merge map onto the two domains")
            if len(self.merge_map) != self.k or any(m not in (0, 1) for m in self.merge_map):
                raise ConfigError("merge_map", f"must list 0 or 1 for each of the {self.k} clusters")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.max_iter, int) or self.max_iter < 1:
            raise ConfigError("max_iter", f"must be an integer >= 1, got {self.max_iter!r}")
        if not (isinstance(self.tol, (int, float)) and self.tol >= 0):
            raise ConfigError("tol", f"must be >= 0, got {self.tol!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", f"must be an integer >= 1, got {self.workers!r}")
        return self

    @property
    def feature_options(self) -> FeatureOptions:
        return FeatureOptions(tuple(self.features), self.wavelet, self.levels, self.angles)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["features"] = list(self.features)
        if self.merge_map is not None:
            d["merge_map"] = list(self.merge_map)
        return d


# config-file key -> PipelineConfig field; sections are only for readability
_CONFIG_KEYS = {
    "method": "method", "win_factor": "win_factor", "stride": "stride",
    "features": "features", "wavelet": "wavelet", "levels": "levels",
    "angles": "angles", "n_angles": "angles", "k": "k", "merge_map": "merge_map",
    "seed": "seed", "max_iter": "max_iter", "tol": "tol", "inputs": "inputs",
    "output": "output_dir", "output_dir": "output_dir", "workers": "workers",
    "pad_boundary": "pad_boundary", "dump_cube": "dump_cube",
}


def config_from_mapping(data: dict, base: PipelineConfig | None = None) -> PipelineConfig:
    """Build a config from a (possibly sectioned) mapping of settings."""
    cfg = dataclasses.replace(base) if base is not None else PipelineConfig()
    flat = {}
    for key, value in data.items():
        if isinstance(value, dict):
            for sub, v in value.items():
                flat[sub] = (f"{key}.{sub}", v)
        else:
            flat[key] = (key, value)
    for key, (where, value) in flat.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(where, "unknown setting")
        name = _CONFIG_KEYS[key]
        if name == "features" and isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        if name in ("features", "merge_map") and value is not None:
            value = tuple(value)
        setattr(cfg, name, value)
    return cfg


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ImageIOError(f"{path}: no such config file") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"{path}: {exc}") from exc
    return config_from_mapping(data)


# -- artifact writers -----------------------------------------------------------

def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_mask(path: Path, mask: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    write_pgm(path, np.where(mask, 255, 0))


def cube_to_csv(cube) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "c", *cube.channels])
    gh, gw, _ = cube.values.shape
    for r in range(gh):
        for c in range(gw):
            w.writerow([r, c, *(repr(float(v)) for v in cube.values[r, c])])
    return buf.getvalue()


def matrix_to_csv(names, mat) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *names])
    for name, row in zip(names, mat):
        w.writerow([name, *(f"{v:.12g}" for v in row)])
    return buf.getvalue()


def read_distribution_csv(path, nm_per_pixel: float) -> DomainSizeDistribution:
    radii, counts = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            radii.append(int(round(float(row["radius_nm"]) / nm_per_pixel)))
            counts.append(int(row["count"]))
    return DomainSizeDistribution(np.array(radii, dtype=int), np.array(counts, dtype=int),
                                  nm_per_pixel)


def sidecar_for(image_path) -> Path:
    return Path(image_path).with_suffix(".json")


# -- segmentation -------------------------------------------------------------

@dataclass
class SegmentationResult:
    index_map: object
    cube: object
    kmeans: object
    thickness: dict
    distributions: dict
    nm_per_cell: float


def segment_image(image, config: PipelineConfig) -> SegmentationResult:
    """Run the full workflow on one in-memory image."""
    spec = TileSpec.from_win_factor(image.width, image.height, config.win_factor, config.stride)
    cube = build_feature_cube(image, spec, config.method, config.feature_options,
                              workers=config.workers)
    norm = zscore_normalize(cube)
    result = kmeans(norm.vectors(), k=config.k, seed=config.seed,
                    max_iter=config.max_iter, tol=config.tol)
    if config.k > 2:
        result = merge_clusters(result, config.merge_map)
    index_map = label_domains(result, cube, image)
    labels = index_map.labels
    nm_per_cell = image.nm_per_pixel * config.stride
    if config.pad_boundary:
        labels = cube.grid.pad_to_image(labels, (image.height, image.width))
        nm_per_cell = image.nm_per_pixel
        index_map.offset, index_map.stride = (0, 0), 1
    thickness, dists = {}, {}
    for name, dom in DOMAINS.items():
        thickness[name] = local_thickness(labels == dom)
        dists[name] = size_distribution(thickness[name], nm_per_cell)
    index_map.labels = labels
    return SegmentationResult(index_map, cube, result, thickness, dists, nm_per_cell)


def _sample_id(sidecar: Path, stem: str) -> str:
    try:
        meta = json.loads(sidecar.read_text())
        return str(meta.get("sample_id", stem))
    except (OSError, ValueError, AttributeError):
        return stem


def run_segmentation(config: PipelineConfig) -> dict:
    """Segment every input image and write artifacts under ``output_dir``.

    Each image needs a JSON sidecar with the same stem.  Unreadable images
    are skipped and recorded in the report with the reason.
    """
    config.validate()
    if not config.inputs:
        raise ConfigError("inputs", "no input images given")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for raw_path in config.inputs:
        path = Path(raw_path)
        stem = path.stem
        entry = {"image": str(path), "stem": stem}
        t0 = time.perf_counter()
        try:
            image = load_image(path, sidecar_for(path))
        except ImageIOError as exc:
            entry.update(status="skipped", reason=str(exc))
            logger.warning("skipping %s: %s", path, exc)
            entries.append(entry)
            continue
        try:
            seg = segment_image(image, config)
        except ValueError as exc:
            entry.update(status="skipped", reason=str(exc))
            logger.warning("skipping %s: %s", path, exc)
            entries.append(entry)
            continue
        t_seg = time.perf_counter()

        grid = seg.cube.grid
        labels = seg.index_map.labels
        paths = {
            "index_map": out / "masks" / f"{stem}.pgm",
            "light_mask": out / "light" / f"{stem}.pgm",
            "dark_mask": out / "dark" / f"{stem}.pgm",
        }
        _write_mask(paths["index_map"], labels == LIGHT)
        _write_mask(paths["light_mask"], labels == LIGHT)
        _write_mask(paths["dark_mask"], labels == DARK)
        geometry = {"offset": [0, 0], "stride": 1} if config.pad_boundary else \
            {"offset": list(grid.offset), "stride": grid.stride}
        geometry.update(shape=list(labels.shape), image_shape=[image.height, image.width],
                        tile=[grid.tile_h, grid.tile_w])
        _write_text(out / "masks" / f"{stem}.grid.json", json.dumps(geometry, sort_keys=True) + "\n")
        mean_sizes = {}
        for name in DOMAINS:
            tpath = out / "thickness" / f"{stem}_{name}.pgm"
            tpath.parent.mkdir(parents=True, exist_ok=True)
            write_pgm(tpath, np.rint(seg.thickness[name] * 100), maxval=65535)
            spath = out / "sizes" / f"{stem}_{name}.csv"
            _write_text(spath, seg.distributions[name].to_csv())
            paths[f"{name}_thickness"] = tpath
            paths[f"{name}_sizes"] = spath
            dist = seg.distributions[name]
            mean_sizes[name] = None if dist.empty else dist.mean_nm()
        if config.dump_cube:
            cpath = out / "cubes" / f"{stem}.csv"
            _write_text(cpath, cube_to_csv(seg.cube))
            paths["cube"] = cpath
        t_end = time.perf_counter()
        entry.update(
            status="ok",
            sample_id=_sample_id(sidecar_for(path), stem),
            nm_per_pixel=image.nm_per_pixel,
            nm_per_cell=seg.nm_per_cell,
            grid=geometry,
            kmeans_iterations=seg.kmeans.iterations,
            mean_domain_size_nm=mean_sizes,
            outputs={k: str(v) for k, v in paths.items()},
            timings_ms={"segment": 1000 * (t_seg - t0), "total": 1000 * (t_end - t0)},
        )
        entries.append(entry)
    report = {"tool": "afmdomains", "version": __version__, "config": config.to_dict(),
              "images": entries}
    _write_text(out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


# -- evaluation ---------------------------------------------------------------

def _read_labels(path: Path) -> np.ndarray:
    return (read_raster(path) > 127.5).astype(np.uint8)


def evaluate(pred_dir, truth_dir, out_dir=None) -> dict:
    """Score predicted index maps against ground-truth masks of the same name.

    When a prediction is smaller than its ground truth and a
    ``<stem>.grid.json`` geometry file sits next to it, the ground truth is
    sampled at the tile centres before scoring.
    """
    pred_dir, truth_dir = Path(pred_dir), Path(truth_dir)
    for d in (pred_dir, truth_dir):
        if not d.is_dir():
            raise ImageIOError(f"{d}: not a directory")
    preds = {p.stem: p for p in sorted(pred_dir.glob("*.pgm"))}
    truths = {p.stem: p for p in sorted(truth_dir.glob("*.pgm"))}
    pairs, errors = [], []
    for stem in sorted(preds.keys() & truths.keys()):
        pred = _read_labels(preds[stem])
        truth = _read_labels(truths[stem])
        geo_path = pred_dir / f"{stem}.grid.json"
        if pred.shape != truth.shape and geo_path.is_file():
            geo = json.loads(geo_path.read_text())
            (r0, c0), s = geo["offset"], geo["stride"]
            rows = r0 + s * np.arange(pred.shape[0])
            cols = c0 + s * np.arange(pred.shape[1])
            if rows[-1] < truth.shape[0] and cols[-1] < truth.shape[1]:
                truth = truth[np.ix_(rows, cols)]
        if pred.shape != truth.shape:
            errors.append({"name": stem, "error": f"dimension mismatch: pred {pred.shape} "
                                                  f"vs truth {truth.shape}"})
            continue
        pairs.append({"name": stem, **score(pred, truth).to_dict()})
    unmatched = sorted(preds.keys() ^ truths.keys())
    summary = {}
    if pairs:
        for key in ("accuracy", "dice", "iou"):
            summary[key] = float(np.mean([p[key] for p in pairs]))
    report = {"pairs": pairs, "mean": summary, "unmatched": unmatched, "errors": errors}
    if out_dir is not None:
        out = Path(out_dir)
        _write_text(out / "metrics.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "accuracy", "dice", "iou", "dice_dark", "dice_light",
                    "iou_dark", "iou_light"])
        for p in pairs:
            w.writerow([p["name"], *(f"{p[k]:.12g}" for k in ("accuracy", "dice", "iou")),
                        *(f"{v:.12g}" for v in p["dice_per_domain"]),
                        *(f"{v:.12g}" for v in p["iou_per_domain"])])
        if summary:
            w.writerow(["mean", *(f"{summary[k]:.12g}" for k in ("accuracy", "dice", "iou"))])
        _write_text(out / "metrics.csv", buf.getvalue())
    return report


# -- aggregation --------------------------------------------------------------

@dataclass
class AggregateRow:
    sample_id: str
    domain: str
    mean_nm: float
    std_nm: float
    max_nm: float
    min_nm: float
    n_images: int


def batch_aggregate(reports) -> tuple[list[AggregateRow], list[str]]:
    """Per-sample, per-domain statistics of the per-image mean domain size.

    ``reports`` are run reports (dicts or paths to ``report.json``).  Skipped
    images and images with an empty domain are excluded and noted.
    """
    by_domain = {name: ([], []) for name in DOMAINS}
    notes = []
    for rep in reports:
        if not isinstance(rep, dict):
            rep = json.loads(Path(rep).read_text())
        for entry in rep.get("images", []):
            if entry.get("status") != "ok":
                notes.append(f"{entry.get('image')}: excluded ({entry.get('reason', 'failed')})")
                continue
            for name in DOMAINS:
                dist = read_distribution_csv(entry["outputs"][f"{name}_sizes"],
                                             entry["nm_per_cell"])
                dists, groups = by_domain[name]
                dists.append(dist)
                groups.append(entry.get("sample_id", entry["stem"]))
    rows = []
    for name, (dists, groups) in by_domain.items():
        if not dists:
            continue
        for gid, summ in sorted(aggregate_stats(dists, groups).items()):
            rows.append(AggregateRow(gid, name, summ.mean_nm, summ.std_nm, summ.max_nm,
                                     summ.min_nm, summ.n_images))
            notes.extend(f"{gid}/{name}: {w}" for w in summ.warnings)
    rows.sort(key=lambda r: (r.sample_id, r.domain))
    if not rows:
        raise ValueError("no successful images to aggregate")
    return rows, notes


def aggregate_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample_id", "domain", "mean_nm", "std_nm", "max_nm", "min_nm", "n_images"])
    for r in rows:
        w.writerow([r.sample_id, r.domain, f"{r.mean_nm:.12g}", f"{r.std_nm:.12g}",
                    f"{r.max_nm:.12g}", f"{r.min_nm:.12g}", r.n_images])
    return buf.getvalue()


# -- statistics correlation ---------------------------------------------------

def correlate(config: PipelineConfig, per_image: bool = False) -> dict:
    """Correlation between feature channels, pooled over all inputs.

    Cubes are taken before normalisation; Pearson correlation does not
    change under per-channel affine maps anyway.
    """
    config.validate()
    if not config.inputs:
        raise ConfigError("inputs", "no input images given")
    cubes = {}
    names = None
    for raw in config.inputs:
        path = Path(raw)
        image = load_image(path, sidecar_for(path))
        spec = TileSpec.from_win_factor(image.width, image.height, config.win_factor, config.stride)
        cube = build_feature_cube(image, spec, config.method, config.feature_options,
                                  workers=config.workers)
        names = cube.channels
        cubes[path.stem] = cube.vectors()
    if len(names) < 2:
        raise ConfigError("features", "correlation needs at least two feature channels")
    result = {"channels": names}
    if per_image:
        result["per_image"] = {k: correlation_matrix(v) for k, v in cubes.items()}
    result["pooled"] = correlation_matrix(np.concatenate(list(cubes.values()), axis=0))
    return result
