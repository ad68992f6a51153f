"""Annotation ingestion, mask-derived boxes, and scale-shift statistics.

Annotations use a minimal COCO-style JSON subset: ``images`` with id and
dims, ``annotations`` with ``bbox`` as corner-form [x, y, w, h], and
``categories`` mapping ids to names. Boxes are clipped to the image
rectangle on load; boxes degenerating below one pixel are dropped and
counted.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from scipy import ndimage

from .errors import DegenerateDistributionError, InputError
from .geometry import BBox, Raster, ScaleDistribution, SizeClass, classify_size, scale_distribution
from .grid import WarpGrid
from .resample import warp_boxes
from .saliency import expansion_factor

log = logging.getLogger(__name__)

# 4-connectivity: diagonal neighbors do not join components.
FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class ImageInfo:
    id: int
    height: int
    width: int
    file_name: str | None = None


@dataclass(frozen=True)
class AnnotationSet:
    images: tuple[ImageInfo, ...]
    boxes: Mapping[int, tuple[BBox, ...]]
    class_names: Mapping[int, str] = field(default_factory=dict)
    dropped_boxes: int = 0

    def image(self, image_id: int) -> ImageInfo:
        for im in self.images:
            if im.id == image_id:
                return im
        raise InputError(f"unknown image id {image_id}")

    def image_ids(self) -> list[int]:
        return [im.id for im in self.images]

    def boxes_for(self, image_id: int) -> tuple[BBox, ...]:
        self.image(image_id)
        return self.boxes.get(image_id, ())

    def all_boxes(self) -> list[BBox]:
        out: list[BBox] = []
        for im in self.images:
            out.extend(self.boxes.get(im.id, ()))
        return out


def _clip_box(x: float, y: float, w: float, h: float, img: ImageInfo, class_id: int) -> BBox | None:
    x1 = max(x, 0.0)
    y1 = max(y, 0.0)
    x2 = min(x + w, img.width - 1.0)
    y2 = min(y + h, img.height - 1.0)
    if x2 - x1 < 1.0 or y2 - y1 < 1.0:
        return None
    return BBox.from_corners(x1, y1, x2, y2, class_id)


def load_annotations(source) -> AnnotationSet:
    """Load the COCO-subset annotation JSON from a path, file, or dict."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, "rb") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read annotations: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed annotation JSON: {exc}") from exc
    elif isinstance(source, dict):
        doc = source
    else:
        raise InputError(f"unsupported annotation source type {type(source)!r}")

    try:
        images = tuple(
            ImageInfo(
                id=int(im["id"]),
                height=int(im["height"]),
                width=int(im["width"]),
                file_name=im.get("file_name"),
            )
            for im in doc.get("images", [])
        )
        by_id = {im.id: im for im in images}
        if len(by_id) != len(images):
            raise InputError("duplicate image ids in annotations")
        class_names = {int(c["id"]): str(c["name"]) for c in doc.get("categories", [])}

        boxes: dict[int, list[BBox]] = {im.id: [] for im in images}
        dropped = 0
        for ann in doc.get("annotations", []):
            image_id = int(ann["image_id"])
            if image_id not in by_id:
                raise InputError(f"annotation references unknown image id {image_id}")
            x, y, w, h = (float(v) for v in ann["bbox"])
            box = _clip_box(x, y, w, h, by_id[image_id], int(ann.get("category_id", 0)))
            if box is None:
                dropped += 1
            else:
                boxes[image_id].append(box)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed annotation record: {exc}") from exc

    if dropped:
        log.warning("dropped %d degenerate box(es) on load", dropped)
    return AnnotationSet(
        images=images,
        boxes={k: tuple(v) for k, v in boxes.items()},
        class_names=class_names,
        dropped_boxes=dropped,
    )


def boxes_from_segmentation(mask: Raster, foreground_classes: Iterable[int] | None = None) -> list[BBox]:
    """Minimum enclosing axis-aligned boxes of per-class connected components.

    Components are 4-connected (diagonal contact does not merge), one box
    per component, single-pixel components kept. ``foreground_classes``
    defaults to every nonzero class id present in the mask.
    """
    if mask.channels != 1:
        raise InputError(f"segmentation mask must be single-channel, got {mask.channels}")
    plane = mask.plane(0)
    ids = np.rint(plane).astype(np.int64)
    if not np.allclose(plane, ids, atol=1e-6):
        raise InputError("segmentation mask values must be integral class ids")
    if foreground_classes is None:
        classes = sorted(int(c) for c in np.unique(ids) if c != 0)
    else:
        classes = sorted(set(int(c) for c in foreground_classes))

    out: list[BBox] = []
    for class_id in classes:
        labeled, n = ndimage.label(ids == class_id, structure=FOUR_CONNECTED)
        for sl in ndimage.find_objects(labeled, max_label=n):
            if sl is None:
                continue
            r0, r1 = sl[0].start, sl[0].stop - 1
            c0, c1 = sl[1].start, sl[1].stop - 1
            out.append(
                BBox(
                    cx=(c0 + c1) / 2.0,
                    cy=(r0 + r1) / 2.0,
                    w=float(c1 - c0 + 1),
                    h=float(r1 - r0 + 1),
                    class_id=class_id,
                )
            )
    return out


@dataclass(frozen=True)
class ShiftReport:
    """Before/after scale statistics for a warped annotation set."""

    before: ScaleDistribution
    after: ScaleDistribution
    f: int | None
    per_class_area_ratios: tuple[float | None, float | None, float | None]
    dropped_boxes: int = 0

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "f": self.f,
            "per_class_ratios": list(self.per_class_area_ratios),
            "dropped_boxes": self.dropped_boxes,
        }


def shift_report(
    ann: AnnotationSet,
    grids: Mapping[int, WarpGrid],
    t1: float,
    t2: float,
    max_workers: int = 1,
) -> ShiftReport:
    """Measure how per-image warps move the size-class distribution.

    Area ratios (warped/original) are averaged per original size class.
    Both distributions use the same thresholds. Raises if any image with
    boxes lacks a grid.
    """
    missing = [im.id for im in ann.images if ann.boxes.get(im.id) and im.id not in grids]
    if missing:
        raise InputError(f"missing warp grid for image id(s): {missing}")

    originals = ann.all_boxes()
    before = scale_distribution(originals, t1, t2)

    work = [(im.id, ann.boxes.get(im.id, ())) for im in ann.images if ann.boxes.get(im.id)]

    def run(item):
        # map one box at a time so originals stay paired with their warps
        # even when some boxes are skipped
        image_id, boxes = item
        grid = grids[image_id]
        pairs: list[tuple[BBox, BBox]] = []
        n_skipped = 0
        for orig in boxes:
            mapped, n = warp_boxes([orig], grid)
            if n:
                n_skipped += n
            else:
                pairs.append((orig, mapped[0]))
        return pairs, n_skipped

    if max_workers > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run, work))
    else:
        results = [run(item) for item in work]

    warped_all: list[BBox] = []
    skipped = 0
    ratios: dict[SizeClass, list[float]] = {c: [] for c in SizeClass}
    for pairs, n_skip in results:
        skipped += n_skip
        for orig, new in pairs:
            warped_all.append(new)
            ratios[classify_size(orig, t1, t2)].append(new.area / orig.area)

    try:
        f = expansion_factor(before)
    except DegenerateDistributionError:
        f = None

    after = scale_distribution(warped_all, t1, t2)
    per_class = tuple(
        (float(np.mean(ratios[c])) if ratios[c] else None) for c in SizeClass
    )
    return ShiftReport(
        before=before,
        after=after,
        f=f,
        per_class_area_ratios=per_class,
        dropped_boxes=skipped,
    )
