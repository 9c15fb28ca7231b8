"""Keypoint-driven ground-shadow synthesis and evaluation toolkit."""

__version__ = "0.1.0"

from .geometry import (
    KEYPOINT_ORDER,
    DEFAULT_TOPOLOGY,
    AnnotationRecord,
    AnnotationSession,
    KeypointSet,
    Point2,
    SkeletonTopology,
    TorsoBlock,
    derive_torso_block,
    record_from_json,
    record_to_json,
    rescale_annotation,
    session_add_point,
    session_commit,
    session_undo,
)
from .raster import line_pixels, mask_iou, rasterize_skeleton
from .triangle import (
    DEFAULT_LIGHT,
    KReport,
    LightEstimate,
    LimbCorrespondence,
    ShadowTriangle,
    compute_k,
    estimate_light_from_background,
    extract_shadow_triangle,
    k_from_theta,
    project_shadow_point,
    theta_from_k,
    validate_k_consistency,
    verify_physical_relation,
)
from .render import (
    RenderParams,
    ShadowSegment,
    ShadowSkeleton,
    composite_shadow,
    project_skeleton,
    render_shadow_mask,
    soften_mask,
)
from .metrics import (
    MetricReport,
    ber,
    evaluate_tuple,
    psnr,
    rmse,
    ssim,
)
from .losses import (
    LossWeights,
    adversarial_loss,
    image_l1_loss,
    mask_l1_loss,
    masked_weighted_noise_loss,
    perceptual_loss,
    total_diffusion_loss,
    total_gan_loss,
)
from .config import Config, load_config
from .manifest import DatasetTuple, Manifest, derive_shadow_mask, load_manifest
from .pipeline import PipelineResult, run_shadow_pipeline

__all__ = [
    "__version__",
    "KEYPOINT_ORDER",
    "DEFAULT_TOPOLOGY",
    "DEFAULT_LIGHT",
    "AnnotationRecord",
    "AnnotationSession",
    "KeypointSet",
    "Point2",
    "SkeletonTopology",
    "TorsoBlock",
    "derive_torso_block",
    "record_from_json",
    "record_to_json",
    "rescale_annotation",
    "session_add_point",
    "session_commit",
    "session_undo",
    "line_pixels",
    "mask_iou",
    "rasterize_skeleton",
    "KReport",
    "LightEstimate",
    "LimbCorrespondence",
    "ShadowTriangle",
    "compute_k",
    "estimate_light_from_background",
    "extract_shadow_triangle",
    "k_from_theta",
    "project_shadow_point",
    "theta_from_k",
    "validate_k_consistency",
    "verify_physical_relation",
    "RenderParams",
    "ShadowSegment",
    "ShadowSkeleton",
    "composite_shadow",
    "project_skeleton",
    "render_shadow_mask",
    "soften_mask",
    "MetricReport",
    "ber",
    "evaluate_tuple",
    "psnr",
    "rmse",
    "ssim",
    "LossWeights",
    "adversarial_loss",
    "image_l1_loss",
    "mask_l1_loss",
    "masked_weighted_noise_loss",
    "perceptual_loss",
    "total_diffusion_loss",
    "total_gan_loss",
    "Config",
    "load_config",
    "DatasetTuple",
    "Manifest",
    "derive_shadow_mask",
    "load_manifest",
    "PipelineResult",
    "run_shadow_pipeline",
]
