"""Command-line entry point: ``afmdomains {segment,evaluate,synth,aggregate,correlate}``.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .imgio import ImageIOError, write_pgm, write_sidecar
from .pipeline import (ConfigError, PipelineConfig, aggregate_to_csv, batch_aggregate,
                       config_from_mapping, correlate, evaluate, load_config,
                       matrix_to_csv, run_segmentation)
from .synth import LAYOUTS, SynthSpec, check_contrast, synth_texture_image

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("afmdomains")


def _add_segment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("images", nargs="*", help="input images (PGM/PNG) with .json sidecars")
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--method", help="dft, dct, dwt or radon")
    p.add_argument("--win-factor", type=float, dest="win_factor")
    p.add_argument("--stride", type=int)
    p.add_argument("--features", help="comma-separated subset of mean,variance,skew,kurtosis")
    p.add_argument("--levels", type=int, help="DWT decomposition levels (1-3)")
    p.add_argument("--wavelet", help="haar or cdf53")
    p.add_argument("--angles", type=int, help="number of Radon projection angles")
    p.add_argument("--k", type=int, help="number of k-means clusters")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker threads (never changes outputs)")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("--pad-boundary", action="store_true", default=None, dest="pad_boundary",
                   help="emit image-sized maps, filling the boundary from the nearest tile")


def _config_from_args(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    for name in ("method", "win_factor", "stride", "features", "levels", "wavelet", "angles",
                 "k", "seed", "workers", "output_dir", "pad_boundary"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "dump_cube", False):
        overrides["dump_cube"] = True
    if args.images:
        overrides["inputs"] = list(args.images)
    return config_from_mapping(overrides, base=cfg).validate()


def cmd_segment(args) -> int:
    cfg = _config_from_args(args)
    report = run_segmentation(cfg)
    ok = [e for e in report["images"] if e["status"] == "ok"]
    for e in report["images"]:
        if e["status"] != "ok":
            log.warning("%s skipped: %s", e["image"], e["reason"])
    print(f"segmented {len(ok)}/{len(report['images'])} images -> {cfg.output_dir}")
    return EXIT_OK if ok else EXIT_IO


def cmd_evaluate(args) -> int:
    report = evaluate(args.pred_dir, args.truth_dir, args.out)
    for name in report["unmatched"]:
        log.warning("unmatched file: %s", name)
    for err in report["errors"]:
        log.warning("%s: %s", err["name"], err["error"])
    print(json.dumps(report["mean"], sort_keys=True))
    return EXIT_OK if report["pairs"] else EXIT_IO


def cmd_synth(args) -> int:
    out = Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "truth").mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        try:
            spec = SynthSpec(width=args.width, height=args.height, layout=args.layout,
                             seed=seed, nm_per_pixel=args.nm_per_pixel)
        except ValueError as exc:
            raise ConfigError("synth", str(exc)) from exc
        image, truth = synth_texture_image(spec)
        check_contrast(image, truth)
        name = f"synth_{args.layout}_{seed:04d}"
        write_pgm(out / "images" / f"{name}.pgm", image.pixels)
        write_sidecar(out / "images" / f"{name}.json", spec.nm_per_pixel * spec.width)
        write_pgm(out / "truth" / f"{name}.pgm", truth.labels * 255)
    print(f"wrote {args.count} synthetic images -> {out}")
    return EXIT_OK


def cmd_aggregate(args) -> int:
    rows, notes = batch_aggregate(args.reports)
    for note in notes:
        log.warning(note)
    text = aggregate_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_correlate(args) -> int:
    args.features = args.features or "mean,variance,skew,kurtosis"
    cfg = _config_from_args(args)
    result = correlate(cfg, per_image=args.per_image)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "correlation.csv").write_text(matrix_to_csv(result["channels"], result["pooled"]))
    for stem, mat in result.get("per_image", {}).items():
        (out / f"correlation_{stem}.csv").write_text(matrix_to_csv(result["channels"], mat))
    sys.stdout.write(matrix_to_csv(result["channels"], result["pooled"]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="afmdomains", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment images into light/dark domains")
    _add_segment_flags(p)
    p.add_argument("--dump-cube", action="store_true", help="also write feature cubes as CSV")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score predicted masks against ground truth")
    p.add_argument("pred_dir")
    p.add_argument("truth_dir")
    p.add_argument("--out", help="directory for metrics.json / metrics.csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate synthetic two-texture images")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--layout", choices=LAYOUTS, default="vertical-split")
    p.add_argument("--nm-per-pixel", type=float, default=5.0, dest="nm_per_pixel")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("aggregate", help="per-sample domain-size statistics from run reports")
    p.add_argument("reports", nargs="+", help="report.json files from segment runs")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("correlate", help="correlation matrix between feature statistics")
    _add_segment_flags(p)
    p.add_argument("--per-image", action="store_true", dest="per_image")
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ImageIOError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AssertionError, ValueError, ArithmeticError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
