import json

import numpy as np
import pytest
from helpers import gradient_image, three_box_scene

from scalewarp.geometry import Raster
from scalewarp.rasters import write_raster


def scene_annotation_doc():
    boxes, (h, w) = three_box_scene()
    names = {1: "car", 2: "bus", 3: "truck"}
    return {
        "images": [{"id": 1, "width": w, "height": h, "file_name": "scene.png"}],
        "annotations": [
            {"image_id": 1, "bbox": [b.x1, b.y1, b.w, b.h], "category_id": b.class_id}
            for b in boxes
        ],
        "categories": [{"id": k, "name": v} for k, v in names.items()],
    }


def scene_image_u8():
    """Deterministic 8-bit scene: diagonal gradient with box rectangles."""
    boxes, (h, w) = three_box_scene()
    y, x = np.mgrid[0:h, 0:w]
    img = ((x + y) * 255 // (h + w - 2)).astype(np.uint8)
    for value, b in zip((40, 130, 220), boxes):
        img[int(b.y1) : int(b.y2), int(b.x1) : int(b.x2)] = value
    return img


def seven_two_one_doc(size=768):
    """One image with 7 small, 2 medium, 1 large box at fixed positions."""
    anns = []
    for i in range(7):
        anns.append({"image_id": 1, "bbox": [48.0 + 100.0 * i, 88.0, 24.0, 24.0], "category_id": 1})
    anns.append({"image_id": 1, "bbox": [175.0, 280.0, 50.0, 40.0], "category_id": 2})
    anns.append({"image_id": 1, "bbox": [475.0, 280.0, 50.0, 40.0], "category_id": 2})
    anns.append({"image_id": 1, "bbox": [334.0, 500.0, 100.0, 100.0], "category_id": 3})
    return {
        "images": [{"id": 1, "width": size, "height": size}],
        "annotations": anns,
        "categories": [{"id": 1, "name": "car"}, {"id": 2, "name": "bus"}, {"id": 3, "name": "truck"}],
    }


@pytest.fixture(scope="session")
def scene_dir(tmp_path_factory):
    """The bundled synthetic scene: annotations, image, gradient, mask."""
    d = tmp_path_factory.mktemp("scene")
    (d / "annotations.json").write_text(json.dumps(scene_annotation_doc(), indent=2))
    (d / "empty.json").write_text(
        json.dumps(
            {
                "images": [{"id": 1, "width": 256, "height": 256}],
                "annotations": [],
                "categories": [],
            }
        )
    )
    (d / "seven_two_one.json").write_text(json.dumps(seven_two_one_doc(), indent=2))

    write_raster(Raster(scene_image_u8()), d / "scene.png")
    write_raster(Raster(gradient_image(256, 256).astype(np.float32)), d / "gradient.ras")

    mask = np.zeros((96, 96), dtype=np.int32)
    mask[10:20, 12:30] = 5
    mask[50:80, 40:70] = 7
    mask[5, 90] = 5
    write_raster(Raster(mask.astype(np.float32)), d / "mask.ras")
    return d
