"""Shared fixtures: synthetic poses, object/shadow scenes and datasets."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from shadowcast import (
    AnnotationRecord,
    KeypointSet,
    Point2,
    derive_torso_block,
)
from shadowcast.imgio import save_mask, save_rgb

STANDING_POINTS = {
    "Head": (128.0, 40.0),
    "ElbowL": (108.0, 90.0),
    "ElbowR": (148.0, 90.0),
    "WristL": (104.0, 130.0),
    "WristR": (152.0, 130.0),
    "KneeL": (118.0, 160.0),
    "KneeR": (138.0, 160.0),
    "AnkleL": (116.0, 210.0),
    "AnkleR": (140.0, 210.0),
}


def make_record(points=None, canvas=256, image_id="fixture", original=None) -> AnnotationRecord:
    pts = {n: Point2(*xy) for n, xy in (points or STANDING_POINTS).items()}
    kps = KeypointSet(points=pts, canvas_w=canvas, canvas_h=canvas)
    block = derive_torso_block(kps)
    ow = oh = original if original is not None else canvas
    return AnnotationRecord(
        image_id=image_id,
        pose="front",
        keypoints=kps,
        torso_block=block,
        provenance="manual",
        original_w=ow,
        original_h=oh,
    )


@pytest.fixture
def standing_record() -> AnnotationRecord:
    return make_record()


def bar_scene(theta_rad: float, height: int = 80, canvas=(160, 360)):
    """Object bar plus a one-row ground shadow strip for a given elevation.

    Returns (combined_mask, object_mask, true_theta, base_center) where
    true_theta reflects the rounded strip tip actually drawn.
    """
    h_img, w_img = canvas
    x0, x1 = 30, 37
    y1 = h_img - 30
    y0 = y1 - height
    obj = np.zeros((h_img, w_img), np.uint8)
    obj[y0:y1 + 1, x0:x1 + 1] = 1
    base_cx = (x0 + x1) / 2.0
    reach = height / math.tan(theta_rad)
    tip = int(round(base_cx + reach))
    combined = obj.copy()
    combined[y1, x1:tip + 1] = 1
    true_theta = math.atan2(height, tip - base_cx)
    return combined, obj, true_theta, Point2(base_cx, float(y1))


def checkerboard_rgb(h: int, w: int, a=200, b=60) -> np.ndarray:
    img = np.full((h, w, 3), a, np.uint8)
    yy, xx = np.mgrid[0:h, 0:w]
    img[((yy // 8) + (xx // 8)) % 2 == 1] = b
    return img


@pytest.fixture
def dataset_dir(tmp_path: Path) -> Path:
    """Two-tuple dataset: one with shadow evidence (bos), one without."""
    h, w = 200, 320
    base = np.full((h, w, 3), 200, np.uint8)

    # foreground object: vertical bar
    fg = np.zeros((h, w), np.uint8)
    fg[60:141, 40:48] = 1

    # ground truth adds a darkened ground strip at the bar base (the shadow)
    gt = base.copy()
    strip = np.zeros((h, w), np.uint8)
    strip[138:141, 48:128] = 1
    gt[strip == 1] = (gt[strip == 1] * 0.55).astype(np.uint8)

    save_rgb(base, tmp_path / "t1_composite.png")
    save_rgb(gt, tmp_path / "t1_gt.png")
    save_mask(fg, tmp_path / "t1_fg.png")

    # bos-free tuple: no difference between composite and ground truth
    save_rgb(base, tmp_path / "t2_composite.png")
    save_rgb(base, tmp_path / "t2_gt.png")
    save_mask(fg, tmp_path / "t2_fg.png")

    manifest = {
        "tuples": [
            {
                "tuple_id": "t1",
                "composite": "t1_composite.png",
                "fg_object_mask": "t1_fg.png",
                "ground_truth": "t1_gt.png",
                "split": "bos",
            },
            {
                "tuple_id": "t2",
                "composite": "t2_composite.png",
                "fg_object_mask": "t2_fg.png",
                "ground_truth": "t2_gt.png",
                "split": "bos_free",
            },
        ],
        "annotations": {},
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return tmp_path
