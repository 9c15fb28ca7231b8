"""Binary mask rasterization: line segments, filled quads, skeleton masks.

Masks are uint8 numpy arrays of shape (height, width) holding strictly
{0, 1}. Pixel (row r, col c) corresponds to the point (x=c, y=r).
Line drawing uses the integer midpoint algorithm so golden tests can
enumerate pixels exactly; thickness is a square dilation of the 1-pixel
line.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimMismatchError,
    IncompleteAnnotationError,
    InvalidDimsError,
    InvalidThicknessError,
    NonBinaryInputError,
)
from .geometry import (
    KEYPOINT_ORDER,
    AnnotationRecord,
    Point2,
    SkeletonTopology,
    torso_anchors,
)


def new_mask(width: int, height: int) -> np.ndarray:
    if width <= 0 or height <= 0:
        raise InvalidDimsError(f"mask dims must be positive, got {width}x{height}")
    return np.zeros((height, width), dtype=np.uint8)


def require_binary(mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise NonBinaryInputError(f"mask must be 2D, got shape {mask.shape}")
    if mask.size == 0:
        raise InvalidDimsError("mask has zero size")
    vals = np.unique(mask)
    if not np.all(np.isin(vals, (0, 1))):
        raise NonBinaryInputError(f"mask holds non-binary values {vals[:8]}")
    return mask.astype(np.uint8, copy=False)


def line_pixels(p0: Point2, p1: Point2) -> list:
    """Integer midpoint (Bresenham) pixels from p0 to p1, endpoints rounded."""
    x0, y0 = int(np.floor(p0[0] + 0.5)), int(np.floor(p0[1] + 0.5))
    x1, y1 = int(np.floor(p1[0] + 0.5)), int(np.floor(p1[1] + 0.5))
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    out = []
    x, y = x0, y0
    while True:
        out.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return out


def _stamp(mask: np.ndarray, pixels, thickness: int) -> None:
    """Set line pixels dilated by a thickness x thickness square."""
    h, w = mask.shape
    lo = -((thickness - 1) // 2)
    hi = thickness // 2
    for x, y in pixels:
        y0, y1 = max(0, y + lo), min(h - 1, y + hi)
        x0, x1 = max(0, x + lo), min(w - 1, x + hi)
        if y0 <= y1 and x0 <= x1:
            mask[y0:y1 + 1, x0:x1 + 1] = 1


def draw_segment(mask: np.ndarray, p0: Point2, p1: Point2, thickness: int = 1) -> None:
    """Draw one line segment into the mask, clipped to bounds."""
    if thickness < 1:
        raise InvalidThicknessError(f"thickness must be >= 1, got {thickness}")
    _stamp(mask, line_pixels(p0, p1), thickness)


def fill_quad(mask: np.ndarray, corners) -> None:
    """Even-odd scanline fill of a quadrilateral over pixel centers.

    Edges use the half-open [y_min, y_max) rule so shared vertices are
    not double counted; a zero-area quad therefore fills nothing.
    """
    h, w = mask.shape
    pts = [(float(c[0]), float(c[1])) for c in corners]
    ys = [p[1] for p in pts]
    y_start = max(0, int(np.ceil(min(ys))))
    y_end = min(h - 1, int(np.floor(max(ys))))
    n = len(pts)
    for y in range(y_start, y_end + 1):
        xs = []
        for i in range(n):
            (x0, y0), (x1, y1) = pts[i], pts[(i + 1) % n]
            if y0 == y1:
                continue
            lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
            if lo <= y < hi:
                xs.append(x0 + (y - y0) * (x1 - x0) / (y1 - y0))
        xs.sort()
        for j in range(0, len(xs) - 1, 2):
            a = max(0, int(np.ceil(xs[j])))
            b = min(w - 1, int(np.floor(xs[j + 1])))
            if a <= b:
                mask[y, a:b + 1] = 1


def rasterize_skeleton(
    rec: AnnotationRecord,
    topo: SkeletonTopology,
    thickness: int,
    out_w: int,
    out_h: int,
) -> np.ndarray:
    """Render topology edges as thick polylines plus the filled torso block.

    Coordinates are taken as-is; rescale the record first if the output
    raster does not match its canvas.
    """
    if thickness < 1:
        raise InvalidThicknessError(f"thickness must be >= 1, got {thickness}")
    if not rec.keypoints.is_complete():
        missing = [n for n in KEYPOINT_ORDER if n not in rec.keypoints.points]
        raise IncompleteAnnotationError(
            f"record {rec.image_id!r} missing keypoints {missing}"
        )
    mask = new_mask(out_w, out_h)
    anchors = torso_anchors(rec)

    def resolve(name: str) -> Point2:
        if name in anchors:
            return anchors[name]
        return rec.keypoints[name]

    for a, b in topo.edges:
        draw_segment(mask, resolve(a), resolve(b), thickness)
    if rec.torso_block is not None:
        fill_quad(mask, rec.torso_block.corners)
    return mask


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union; empty vs empty counts as full agreement."""
    a = require_binary(a)
    b = require_binary(b)
    if a.shape != b.shape:
        raise DimMismatchError(f"mask dims differ: {a.shape} vs {b.shape}")
    inter = int(np.logical_and(a, b).sum())
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    return inter / union
