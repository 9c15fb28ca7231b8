"""End-to-end shadow synthesis for dataset tuples.

For a tuple and its keypoint annotation: estimate the light (from the
tuple's object/shadow pair when available, otherwise the configured
default), project the skeleton, render and soften the shadow mask,
composite it under the foreground, and report per-limb coefficient
consistency of the projected geometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import Config
from .errors import DegenerateTriangleError, NoContoursError, ShadowToolError
from .geometry import AnnotationRecord, rescale_annotation
from .imgio import load_mask, load_rgb
from .manifest import DatasetTuple, tuple_shadow_mask
from .render import (
    RenderParams,
    ShadowSkeleton,
    composite_shadow,
    project_skeleton,
    render_shadow_mask,
    soften_mask,
)
from .triangle import (
    KReport,
    LightEstimate,
    LimbCorrespondence,
    estimate_light_from_background,
    validate_k_consistency,
)


@dataclass(frozen=True)
class PipelineResult:
    tuple_id: str
    output: np.ndarray
    shadow_mask: np.ndarray
    soft_shadow: np.ndarray
    light: LightEstimate
    k_report: KReport
    skeleton: ShadowSkeleton
    light_source: str  # "background", "default" or "override"


def skeleton_correspondences(sk: ShadowSkeleton) -> list:
    """Limb correspondences (body point, anchor, shadow tip) per segment."""
    return [
        LimbCorrespondence(
            limb_name=seg.limb_name,
            p1=seg.source_free,
            p2=seg.start,
            p3=seg.end,
        )
        for seg in sk.segments
        if seg.source_free is not None
        and seg.start.dist(seg.end) > 0.0
        and seg.start.dist(seg.source_free) > 0.0
    ]


def estimate_tuple_light(t: DatasetTuple, cfg: Config):
    """Light for a tuple: object/shadow evidence when present, else default.

    Returns (light, source) where source is "background" or "default".
    """
    if t.split != "bos":
        return cfg.default_light(), "default"
    try:
        fg = load_mask(t.fg_object_mask_path)
        shadow = tuple_shadow_mask(t, threshold=cfg.diff_threshold)
        union = ((fg | shadow) > 0).astype(np.uint8)
        return estimate_light_from_background(union, fg), "background"
    except (DegenerateTriangleError, NoContoursError):
        return cfg.default_light(), "default"


def run_shadow_pipeline(
    t: DatasetTuple,
    rec: AnnotationRecord,
    cfg: Config,
    light_override: Optional[LightEstimate] = None,
) -> PipelineResult:
    """Synthesize the foreground shadow for one tuple."""
    try:
        base = load_rgb(t.composite_path)
        fg = load_mask(t.fg_object_mask_path)
        h, w = base.shape[:2]

        if light_override is not None:
            light, source = light_override, "override"
        else:
            light, source = estimate_tuple_light(t, cfg)

        scaled = rescale_annotation(rec, w, h)
        params = RenderParams(
            alpha=cfg.alpha,
            sigma=cfg.sigma,
            limb_thickness=cfg.thickness,
            ground_line=cfg.ground_line,
        )
        sk = project_skeleton(scaled, cfg.topology, light, params)
        mask = render_shadow_mask(sk, w, h)
        if params.ground_line is not None:
            cutoff = min(max(int(np.ceil(params.ground_line)), 0), h)
            mask[:cutoff, :] = 0
        soft = soften_mask(mask, params.sigma)
        out = composite_shadow(base, soft, fg, params.alpha)

        report = validate_k_consistency(skeleton_correspondences(sk))
        return PipelineResult(
            tuple_id=t.tuple_id,
            output=out,
            shadow_mask=mask,
            soft_shadow=soft,
            light=light,
            k_report=report,
            skeleton=sk,
            light_source=source,
        )
    except ShadowToolError as exc:
        raise type(exc)(f"tuple {t.tuple_id!r}: {exc}") from exc
