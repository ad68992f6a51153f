"""Command-line pipeline: ingestion -> saliency -> grid -> resample -> stats.

All commands are deterministic: identical inputs and config produce
byte-identical outputs. Exit codes: 0 success, 1 usage/config error,
2 input/format error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import WarpConfig, load_config
from .dataset import (
    AnnotationSet,
    boxes_from_segmentation,
    load_annotations,
    shift_report,
)
from .errors import (
    ConfigError,
    DegenerateDistributionError,
    InputError,
    ScaleWarpError,
    ShapeMismatchError,
)
from .geometry import Raster, classify_size, scale_distribution
from .grid import build_grid, invert_grid
from .rasters import grid_raster, read_grid_csv, read_raster, write_grid_csv, write_raster
from .resample import unwarp_raster, warp_raster
from .saliency import (
    SaliencyMap,
    expansion_factor,
    geometric_prior_saliency,
    instance_saliency,
    saliency_scale,
    static_prior_saliency,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1, not 2."""

    def error(self, message):
        raise ConfigError(message)


def _parse_pair(text: str, name: str, sep: str, cast):
    parts = text.split(sep)
    if len(parts) != 2:
        raise ConfigError(f"{name} must be two values separated by {sep!r}, got {text!r}")
    try:
        return cast(parts[0]), cast(parts[1])
    except ValueError as exc:
        raise ConfigError(f"malformed {name}: {exc}") from exc


def _config_from(args) -> WarpConfig:
    cfg = load_config(args.config)
    overrides: dict = {
        "P": args.P,
        "U": args.U,
        "floor_eps": args.floor_eps,
        "kernel_sigma": args.kernel_sigma,
        "t1": args.t1,
        "t2": args.t2,
        "prior": args.prior,
        "spread": args.spread,
    }
    if args.vp is not None:
        x, y = _parse_pair(args.vp, "--vp", ",", float)
        overrides["vp"] = (x, y)
    if args.saliency_grid is not None:
        h, w = _parse_pair(args.saliency_grid, "--saliency-grid", "x", int)
        overrides.update(saliency_grid_h=h, saliency_grid_w=w)
    if args.warp_grid is not None:
        h, w = _parse_pair(args.warp_grid, "--warp-grid", "x", int)
        overrides.update(warp_grid_h=h, warp_grid_w=w)
    if args.classes is not None:
        overrides["foreground_classes"] = tuple(
            int(v) for v in args.classes.split(",") if v.strip()
        )
    try:
        return cfg.with_overrides(**overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _dataset_f(boxes, cfg: WarpConfig) -> int:
    """Expansion factor of the supplied box population, falling back to 1
    for empty or degenerate distributions."""
    try:
        return expansion_factor(scale_distribution(boxes, cfg.t1, cfg.t2))
    except DegenerateDistributionError:
        return 1


def _select_image(ann: AnnotationSet, image_id):
    if image_id is None:
        if not ann.images:
            raise InputError("annotation set contains no images")
        return ann.images[0]
    return ann.image(int(image_id))


def _output_raster(out: Raster, path: Path) -> Raster:
    """Round float results back to 8-bit when the destination is a PNG."""
    if path.suffix.lower() == ".png" and out.dtype != np.uint8:
        return Raster(np.clip(np.rint(out.data), 0, 255).astype(np.uint8))
    return out


def _load_mask_boxes(args, cfg: WarpConfig):
    mask = read_raster(args.mask)
    boxes = boxes_from_segmentation(mask, cfg.foreground_classes)
    return boxes, (mask.height, mask.width)


def cmd_saliency(args) -> None:
    cfg = _config_from(args)
    prior = cfg.prior

    if prior == "geometric":
        if cfg.vp is None:
            raise ConfigError("geometric prior requires --vp")
        if cfg.spread is None:
            raise ConfigError("geometric prior requires --spread")
        if args.size is not None:
            w, h = _parse_pair(args.size, "--size", "x", int)
        elif args.annotations is not None:
            im = _select_image(load_annotations(args.annotations), args.image_id)
            h, w = im.height, im.width
        else:
            raise ConfigError("geometric prior requires --size or --annotations for image dims")
        f = 1
        s = saliency_scale(cfg.P, f)
        sal = geometric_prior_saliency(cfg.vp, cfg.spread, cfg.saliency_params(), h, w)
    else:
        if args.mask is not None:
            boxes, (h, w) = _load_mask_boxes(args, cfg)
            population = boxes
        elif args.annotations is not None:
            ann = load_annotations(args.annotations)
            im = _select_image(ann, args.image_id)
            h, w = im.height, im.width
            boxes = list(ann.boxes_for(im.id))
            population = ann.all_boxes()
        else:
            raise InputError(f"{prior} prior requires --annotations or --mask")
        f = _dataset_f(population, cfg)
        s = saliency_scale(cfg.P, f)
        if prior == "instance":
            sal = instance_saliency(boxes, s, cfg.saliency_params(), h, w)
        else:
            sal = static_prior_saliency(population, s, cfg.saliency_params(), h, w)

    out = Path(args.out)
    write_raster(Raster(sal.values.astype(np.float32)), out)
    sidecar = Path(args.sidecar) if args.sidecar else out.with_suffix(".json")
    _write_json(
        {
            "schema": SCHEMA_VERSION,
            "prior": prior,
            "P": cfg.P,
            "U": cfg.U,
            "f": f,
            "s": s,
            "image_h": h,
            "image_w": w,
        },
        sidecar,
    )


def _saliency_for_warp(args, cfg: WarpConfig, image: Raster) -> SaliencyMap:
    h, w = image.height, image.width
    if args.saliency is not None:
        ras = read_raster(args.saliency)
        if ras.channels != 1:
            raise InputError(f"saliency raster must be single-channel, got {ras.channels}")
        return SaliencyMap.from_external(ras.plane(0), h, w, cfg.saliency_params())
    if args.annotations is None:
        raise InputError("warp requires --saliency or --annotations")
    if cfg.prior == "geometric":
        raise ConfigError("geometric prior needs a precomputed map: run the saliency command first")
    ann = load_annotations(args.annotations)
    im = _select_image(ann, args.image_id)
    if (im.height, im.width) != (h, w):
        raise ShapeMismatchError((im.height, im.width), (h, w), "annotated image")
    s = saliency_scale(cfg.P, _dataset_f(ann.all_boxes(), cfg))
    if cfg.prior == "instance":
        return instance_saliency(list(ann.boxes_for(im.id)), s, cfg.saliency_params(), h, w)
    return static_prior_saliency(ann.all_boxes(), s, cfg.saliency_params(), h, w)


def cmd_warp(args) -> None:
    cfg = _config_from(args)
    image = read_raster(args.image)
    sal = _saliency_for_warp(args, cfg, image)
    grid = build_grid(sal, cfg.kernel_sigma, cfg.warp_grid_h, cfg.warp_grid_w)
    warped = warp_raster(image, grid, args.interp)
    out = Path(args.out)
    write_raster(_output_raster(warped, out), out)
    write_grid_csv(grid, args.grid_out)
    if args.grid_raster_out:
        write_raster(grid_raster(grid), args.grid_raster_out)


def cmd_unwarp(args) -> None:
    _config_from(args)  # validates overrides even though none are consumed here
    raster = read_raster(args.input)
    grid = read_grid_csv(args.grid)
    gh, gw = grid.image_h, grid.image_w
    rh, rw = raster.height, raster.width
    if (rh, rw) != (gh, gw):
        stride_ok = (
            rh >= 2
            and rw >= 2
            and gh % rh == 0
            and gw % rw == 0
            and gh // rh == gw // rw
        )
        if not stride_ok:
            raise ShapeMismatchError((gh, gw), (rh, rw), "raster vs grid")
    out = Path(args.out)
    unwarped = unwarp_raster(raster, invert_grid(grid), args.interp)
    write_raster(_output_raster(unwarped, out), out)


def _histogram_rows(ann: AnnotationSet, cfg: WarpConfig):
    counts: dict[int, list[int]] = {}
    for box in ann.all_boxes():
        counts.setdefault(box.class_id, [0, 0, 0])[classify_size(box, cfg.t1, cfg.t2)] += 1
    for class_id in sorted(counts):
        name = ann.class_names.get(class_id, "")
        yield class_id, name, counts[class_id]


def _write_histogram(ann: AnnotationSet, cfg: WarpConfig, path: Path) -> None:
    lines = ["class_id,class_name,small,medium,large"]
    for class_id, name, (n_s, n_m, n_l) in _histogram_rows(ann, cfg):
        lines.append(f"{class_id},{name},{n_s},{n_m},{n_l}")
    path.write_text("\n".join(lines) + "\n")


def cmd_stats(args) -> None:
    cfg = _config_from(args)
    ann = load_annotations(args.annotations)
    out = Path(args.out)
    hist_path = Path(args.hist_out) if args.hist_out else out.with_name(out.stem + "_hist.csv")
    _write_histogram(ann, cfg, hist_path)

    boxes = ann.all_boxes()
    dist = scale_distribution(boxes, cfg.t1, cfg.t2)
    if dist.is_empty:
        log.warning("annotation set contains no boxes; emitting empty distribution")
        _write_json({"schema": SCHEMA_VERSION, "before": dist.to_dict()}, out)
        return

    if args.grids_dir is None:
        doc = {"schema": SCHEMA_VERSION, "before": dist.to_dict()}
        try:
            doc["f"] = expansion_factor(dist)
        except DegenerateDistributionError:
            log.warning("degenerate scale distribution; omitting expansion factor")
        _write_json(doc, out)
        return

    grids_dir = Path(args.grids_dir)
    grids = {}
    missing = []
    for im in ann.images:
        if not ann.boxes.get(im.id):
            continue
        path = grids_dir / f"{im.id}.csv"
        if not path.exists():
            missing.append(im.id)
            continue
        grid = read_grid_csv(path)
        if (grid.image_h, grid.image_w) != (im.height, im.width):
            raise ShapeMismatchError(
                (im.height, im.width), (grid.image_h, grid.image_w), f"grid for image {im.id}"
            )
        grids[im.id] = grid
    if missing:
        raise InputError(f"missing warp grid for image id(s): {missing}")
    rep = shift_report(ann, grids, cfg.t1, cfg.t2, max_workers=args.jobs)
    _write_json(rep.to_dict(), out)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="TOML config file")
    g.add_argument("--P", type=float, help="saliency product")
    g.add_argument("--U", type=float, help="saliency upper bound")
    g.add_argument("--floor-eps", dest="floor_eps", type=float, help="uniform saliency floor")
    g.add_argument("--kernel-sigma", dest="kernel_sigma", type=float, help="warp kernel bandwidth (px)")
    g.add_argument("--t1", type=float, help="small/medium area threshold (px^2)")
    g.add_argument("--t2", type=float, help="medium/large area threshold (px^2)")
    g.add_argument("--prior", choices=("instance", "static", "geometric"), help="saliency prior")
    g.add_argument("--vp", help="vanishing point as X,Y (geometric prior)")
    g.add_argument("--spread", type=float, help="geometric prior spread (px)")
    g.add_argument("--saliency-grid", dest="saliency_grid", help="saliency lattice as HxW")
    g.add_argument("--warp-grid", dest="warp_grid", help="warp grid knots as HxW")
    g.add_argument("--classes", help="foreground class ids for masks, comma separated")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _Parser(prog="scalewarp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("saliency", parents=[common], help="generate a saliency raster")
    p.add_argument("--annotations", help="annotation JSON")
    p.add_argument("--image-id", dest="image_id", help="image id within the annotations")
    p.add_argument("--mask", help="segmentation mask raster (instance prior via from-seg boxes)")
    p.add_argument("--size", help="image dims as WxH (geometric prior without annotations)")
    p.add_argument("--out", required=True, help="output saliency raster (.ras)")
    p.add_argument("--sidecar", help="sidecar JSON path (default: output with .json suffix)")
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("warp", parents=[common], help="warp an image")
    p.add_argument("--image", required=True, help="input image (PNG or .ras)")
    p.add_argument("--annotations", help="annotation JSON for on-the-fly saliency")
    p.add_argument("--image-id", dest="image_id", help="image id within the annotations")
    p.add_argument("--saliency", help="precomputed saliency raster")
    p.add_argument("--interp", choices=("bilinear", "nearest"), default="bilinear")
    p.add_argument("--out", required=True, help="warped output raster")
    p.add_argument("--grid-out", dest="grid_out", required=True, help="warp grid CSV output")
    p.add_argument("--grid-raster-out", dest="grid_raster_out", help="dense grid visualization (.ras)")
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("unwarp", parents=[common], help="unwarp a raster through a grid")
    p.add_argument("--input", required=True, help="warped raster (image or feature resolution)")
    p.add_argument("--grid", required=True, help="warp grid CSV")
    p.add_argument("--interp", choices=("bilinear", "nearest"), default="bilinear")
    p.add_argument("--out", required=True, help="unwarped output raster")
    p.set_defaults(func=cmd_unwarp)

    p = sub.add_parser("stats", parents=[common], help="scale statistics and shift report")
    p.add_argument("--annotations", required=True, help="annotation JSON")
    p.add_argument("--grids-dir", dest="grids_dir", help="directory of per-image grid CSVs (<id>.csv)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for per-image mapping")
    p.add_argument("--out", required=True, help="report JSON output")
    p.add_argument("--hist-out", dest="hist_out", help="histogram CSV (default: <out>_hist.csv)")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ScaleWarpError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
