"""Project a keypoint skeleton through a light estimate and render its shadow.

Each topology edge is anchored at the endpoint nearer the ground chain
(ankles; the torso block bridges upper and lower body) and its free end
is pushed along the light azimuth by limb length over k. The resulting
segments plus the projected torso quad form the hard shadow mask, which
can be softened with a Gaussian and multiplied into the composite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import (
    AlphaRangeError,
    DimMismatchError,
    IncompleteAnnotationError,
    InvalidDimsError,
    NegativeSigmaError,
)
from .geometry import (
    KEYPOINT_ORDER,
    TORSO_BOTTOM,
    TORSO_TOP,
    AnnotationRecord,
    Point2,
    SkeletonTopology,
    torso_anchors,
)
from .raster import draw_segment, fill_quad, new_mask, require_binary
from .triangle import LightEstimate, project_shadow_point


@dataclass(frozen=True)
class RenderParams:
    alpha: float = 0.45
    sigma: float = 2.0
    limb_thickness: int = 5
    ground_line: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise AlphaRangeError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.sigma < 0:
            raise NegativeSigmaError(f"sigma must be >= 0, got {self.sigma}")
        if self.limb_thickness < 1:
            raise InvalidDimsError(f"limb thickness must be >= 1, got {self.limb_thickness}")


@dataclass(frozen=True)
class ShadowSegment:
    limb_name: str
    start: Point2
    end: Point2
    thickness: int
    # Body endpoint the tip was projected from; kept for consistency checks.
    source_free: Point2 = None


@dataclass(frozen=True)
class ShadowSkeleton:
    segments: tuple
    block_quad: tuple


def _ground_distances(topo: SkeletonTopology) -> dict:
    """Hop counts from the ground contacts (ankles) through the body graph.

    The torso block joins the two anchors, so arms reach the ground via
    torso-top -> torso-bottom -> knees even though no explicit edge
    exists between the anchors.
    """
    adjacency: dict = {}

    def link(a: str, b: str) -> None:
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)

    for a, b in topo.edges:
        link(a, b)
    if TORSO_TOP in adjacency or TORSO_BOTTOM in adjacency:
        link(TORSO_TOP, TORSO_BOTTOM)

    ground = [n for n in ("AnkleL", "AnkleR") if n in adjacency]
    if not ground and TORSO_BOTTOM in adjacency:
        ground = [TORSO_BOTTOM]
    if not ground:
        ground = list(adjacency)[:1]
    dist = {n: 0 for n in ground}
    queue = deque(ground)
    while queue:
        node = queue.popleft()
        for nxt in adjacency.get(node, ()):
            if nxt not in dist:
                dist[nxt] = dist[node] + 1
                queue.append(nxt)
    return dist


_BODY_ORDER = {n: i for i, n in enumerate(KEYPOINT_ORDER + (TORSO_TOP, TORSO_BOTTOM))}


def _split_edge(dist: dict, edge) -> tuple:
    a, b = edge
    fallback = len(dist) + 1
    da, db = dist.get(a, fallback), dist.get(b, fallback)
    if (da, -_BODY_ORDER.get(a, 0)) <= (db, -_BODY_ORDER.get(b, 0)):
        return a, b
    return b, a


def edge_anchor(topo: SkeletonTopology, edge) -> tuple:
    """Split an edge into (anchor, free) endpoints.

    The anchor is the endpoint topologically nearer the ground; when the
    hop counts tie, the later name in the canonical order anchors.
    """
    return _split_edge(_ground_distances(topo), edge)


def project_skeleton(
    rec: AnnotationRecord,
    topo: SkeletonTopology,
    light: LightEstimate,
    params: RenderParams,
) -> ShadowSkeleton:
    """Shadow segments for every limb plus the projected torso quad.

    Each segment runs from the edge's anchor point to the projected
    position of its free end; the torso block projects its head-end
    corners from the matching ground-end corners.
    """
    if not rec.keypoints.is_complete():
        missing = [n for n in KEYPOINT_ORDER if n not in rec.keypoints.points]
        raise IncompleteAnnotationError(f"record {rec.image_id!r} missing keypoints {missing}")
    anchors = torso_anchors(rec)
    dist = _ground_distances(topo)

    def resolve(name: str) -> Point2:
        return anchors[name] if name in anchors else rec.keypoints[name]

    segments = []
    for edge in topo.edges:
        anchor_name, free_name = _split_edge(dist, edge)
        anchor, free = resolve(anchor_name), resolve(free_name)
        tip = project_shadow_point(free, anchor, light.k, light.azimuth)
        segments.append(ShadowSegment(
            limb_name=free_name,
            start=anchor,
            end=tip,
            thickness=params.limb_thickness,
            source_free=free,
        ))

    if rec.torso_block is not None:
        tl, tr, br, bl = rec.torso_block.corners
        quad = (
            project_shadow_point(tl, bl, light.k, light.azimuth),
            project_shadow_point(tr, br, light.k, light.azimuth),
            br,
            bl,
        )
    else:
        top, bottom = anchors[TORSO_TOP], anchors[TORSO_BOTTOM]
        tip = project_shadow_point(top, bottom, light.k, light.azimuth)
        quad = (tip, tip, bottom, bottom)
    return ShadowSkeleton(segments=tuple(segments), block_quad=quad)


def render_shadow_mask(sk: ShadowSkeleton, out_w: int, out_h: int) -> np.ndarray:
    """Union of all segment rasters plus the filled torso quad."""
    mask = new_mask(out_w, out_h)
    for seg in sk.segments:
        draw_segment(mask, seg.start, seg.end, seg.thickness)
    fill_quad(mask, sk.block_quad)
    return mask


def _gaussian_kernel(sigma: float, max_radius: int) -> np.ndarray:
    radius = min(int(np.ceil(3.0 * sigma)), max_radius)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs ** 2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def soften_mask(mask: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian blur with reflective padding; sigma 0 is the identity."""
    if sigma < 0:
        raise NegativeSigmaError(f"sigma must be >= 0, got {sigma}")
    mask = require_binary(mask).astype(np.float64)
    if sigma == 0:
        return mask
    h, w = mask.shape
    ky = _gaussian_kernel(sigma, h - 1)
    kx = _gaussian_kernel(sigma, w - 1)
    # scipy's "mirror" boundary equals numpy's reflect padding (edge not repeated).
    out = ndimage.convolve1d(mask, kx, axis=1, mode="mirror")
    out = ndimage.convolve1d(out, ky, axis=0, mode="mirror")
    return np.clip(out, 0.0, 1.0)


def composite_shadow(
    base: np.ndarray,
    shadow: np.ndarray,
    fg_mask: np.ndarray,
    alpha: float,
) -> np.ndarray:
    """Darken the base under the shadow, leaving foreground pixels alone."""
    base = np.asarray(base)
    if base.ndim != 3 or base.shape[2] != 3:
        raise InvalidDimsError(f"base must be HxWx3, got shape {base.shape}")
    shadow = np.asarray(shadow, dtype=np.float64)
    fg = require_binary(fg_mask)
    if shadow.shape != base.shape[:2] or fg.shape != base.shape[:2]:
        raise DimMismatchError(
            f"dims differ: base {base.shape[:2]}, shadow {shadow.shape}, fg {fg.shape}"
        )
    if not 0.0 <= alpha <= 1.0:
        raise AlphaRangeError(f"alpha must lie in [0, 1], got {alpha}")
    if shadow.min() < 0.0 or shadow.max() > 1.0:
        raise InvalidDimsError("soft shadow values must lie in [0, 1]")
    factor = 1.0 - alpha * shadow
    factor = np.where(fg == 1, 1.0, factor)
    out = np.floor(base.astype(np.float64) * factor[..., None] + 0.5)
    return np.clip(out, 0, 255).astype(np.uint8)
