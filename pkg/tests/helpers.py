"""Shared synthetic scenes and independent sampling oracles for tests."""

import numpy as np

from scalewarp.geometry import BBox


def three_box_scene():
    """One small (400 px^2), one medium (2000), one large (10000) box.

    Scale fractions are (1/3, 1/3, 1/3), so the expansion factor is 2 and
    the saliency scale with the default P=256 is 128.
    """
    boxes = [
        BBox(60.0, 60.0, 20.0, 20.0, class_id=1),
        BBox(180.0, 80.0, 50.0, 40.0, class_id=2),
        BBox(120.0, 180.0, 100.0, 100.0, class_id=3),
    ]
    return boxes, (256, 256)


def gradient_image(h, w):
    """Smooth, gently varying field with unit dynamic range."""
    y, x = np.mgrid[0:h, 0:w].astype(np.float64)
    return 0.5 + 0.25 * np.sin(2 * np.pi * x / 128.0) + 0.25 * np.cos(2 * np.pi * y / 128.0)


def small_heavy_scene(rng, image_h=256, image_w=256):
    """Random scene with 7 small, 2 medium, 1 large box (psi = 0.7/0.2/0.1).

    Small boxes sit near the small/medium area threshold so that modest
    oversampling promotes them.
    """
    boxes = []

    def place(w, h, class_id):
        cx = rng.uniform(w / 2 + 2, image_w - 1 - w / 2 - 2)
        cy = rng.uniform(h / 2 + 2, image_h - 1 - h / 2 - 2)
        boxes.append(BBox(cx, cy, w, h, class_id))

    for _ in range(7):
        # area 529..961, always below the 1024 small/medium threshold
        place(rng.uniform(23.0, 31.0), rng.uniform(23.0, 31.0), class_id=1)
    for _ in range(2):
        # area 2025..6400, always medium
        place(rng.uniform(45.0, 80.0), rng.uniform(45.0, 80.0), class_id=2)
    side = rng.uniform(100.0, 140.0)  # area >= 10000, always large
    place(side, side, class_id=3)
    return boxes


def bilinear_2d(im, xq, yq):
    """Direct 2-D bilinear sampling oracle (meshgrid form, no separability)."""
    im = np.asarray(im, dtype=np.float64)
    if im.ndim == 2:
        im = im[:, :, None]
    h, w = im.shape[:2]
    xg, yg = np.meshgrid(np.clip(xq, 0, w - 1), np.clip(yq, 0, h - 1))
    x0 = np.clip(np.floor(xg).astype(int), 0, w - 2)
    y0 = np.clip(np.floor(yg).astype(int), 0, h - 2)
    fx = (xg - x0)[:, :, None]
    fy = (yg - y0)[:, :, None]
    ia = im[y0, x0]
    ib = im[y0 + 1, x0]
    ic = im[y0, x0 + 1]
    id_ = im[y0 + 1, x0 + 1]
    return (
        ia * (1 - fx) * (1 - fy)
        + ic * fx * (1 - fy)
        + ib * (1 - fx) * fy
        + id_ * fx * fy
    )


def brute_force_unwarp(warped, grid, n_search=20001):
    """Unwarp by dense search: for each unwarped pixel, scan the output
    axis for the coordinate whose source position is nearest, then sample
    the warped raster there with the direct 2-D oracle."""
    warped = np.asarray(warped, dtype=np.float64)
    h, w = warped.shape[:2]
    u = np.linspace(0.0, w - 1.0, n_search)
    ux = u[np.argmin(np.abs(grid.source_x(u)[None, :] - np.arange(w)[:, None]), axis=1)]
    v = np.linspace(0.0, h - 1.0, n_search)
    vy = v[np.argmin(np.abs(grid.source_y(v)[None, :] - np.arange(h)[:, None]), axis=1)]
    return bilinear_2d(warped, ux, vy)
