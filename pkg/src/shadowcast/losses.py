"""Training-objective value functions over caller-supplied arrays.

These are pure evaluations (no autodiff): the masked noise objective and
mask supervision used by the diffusion stage, and the adversarial /
reconstruction / perceptual trio used by the post-processing refiner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    EmptyScoreMapError,
    LayerShapeMismatchError,
    MaskRangeError,
    NegativeComponentError,
    ShapeMismatchError,
)

# Maps an array to a list of feature layers (e.g. identity, downsampled copies).
FeatureExtractor = Callable[[np.ndarray], Sequence[np.ndarray]]


@dataclass(frozen=True)
class LossWeights:
    lambda_mask: float = 1.0
    lambda_adv: float = 1.0
    lambda_img: float = 1.0
    lambda_perc: float = 1.0

    def __post_init__(self):
        for name in ("lambda_mask", "lambda_adv", "lambda_img", "lambda_perc"):
            if getattr(self, name) < 0:
                raise NegativeComponentError(f"{name} must be >= 0")


def _pair(a, b, what: str):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{what} shapes differ: {a.shape} vs {b.shape}")
    return a, b


def masked_weighted_noise_loss(eps, eps_hat, w_fs) -> float:
    """Mean squared error of the noise residual, weighted by the soft mask."""
    eps, eps_hat = _pair(eps, eps_hat, "noise tensors")
    w = np.asarray(w_fs, dtype=np.float64)
    try:
        np.broadcast_shapes(w.shape, eps.shape)
    except ValueError as exc:
        raise ShapeMismatchError(f"mask shape {w.shape} does not broadcast to {eps.shape}") from exc
    if w.size and (w.min() < 0.0 or w.max() > 1.0):
        raise MaskRangeError("soft mask values must lie in [0, 1]")
    return float(np.mean((w * (eps - eps_hat)) ** 2))


def mask_l1_loss(m_hat, m) -> float:
    """Mean absolute difference between predicted and reference masks."""
    m_hat, m = _pair(m_hat, m, "masks")
    return float(np.mean(np.abs(m_hat - m)))


def total_diffusion_loss(l_mwsg: float, l_mask: float, lambda_mask: float) -> float:
    if l_mwsg < 0 or l_mask < 0 or lambda_mask < 0:
        raise NegativeComponentError("loss components and weight must be >= 0")
    return l_mwsg + lambda_mask * l_mask


def adversarial_loss(d_scores) -> float:
    """Least-squares generator objective over a patch score map."""
    scores = np.asarray(d_scores, dtype=np.float64)
    if scores.size == 0:
        raise EmptyScoreMapError("score map has no elements")
    return float(np.mean((scores - 1.0) ** 2))


def image_l1_loss(pred, gt) -> float:
    """Mean absolute reconstruction difference."""
    pred, gt = _pair(pred, gt, "images")
    return float(np.mean(np.abs(pred - gt)))


def perceptual_loss(extractor: FeatureExtractor, pred, gt) -> float:
    """Sum over feature layers of mean absolute differences."""
    feats_pred = list(extractor(np.asarray(pred, dtype=np.float64)))
    feats_gt = list(extractor(np.asarray(gt, dtype=np.float64)))
    if len(feats_pred) != len(feats_gt):
        raise LayerShapeMismatchError(
            f"extractor returned {len(feats_pred)} vs {len(feats_gt)} layers"
        )
    total = 0.0
    for i, (fp, fg) in enumerate(zip(feats_pred, feats_gt)):
        fp = np.asarray(fp, dtype=np.float64)
        fg = np.asarray(fg, dtype=np.float64)
        if fp.shape != fg.shape:
            raise LayerShapeMismatchError(
                f"layer {i} shapes differ: {fp.shape} vs {fg.shape}"
            )
        total += float(np.mean(np.abs(fp - fg)))
    return total


def total_gan_loss(l_adv: float, l_img: float, l_perc: float, w: LossWeights) -> float:
    if l_adv < 0 or l_img < 0 or l_perc < 0:
        raise NegativeComponentError("loss components must be >= 0")
    return w.lambda_adv * l_adv + w.lambda_img * l_img + w.lambda_perc * l_perc
