"""Shadow quality metrics: global/local RMSE, SSIM, balanced error rate, PSNR.

"Global" metrics run over the whole image; "local" metrics restrict to
the ground-truth shadow region (balanced error rate uses a dilated
region so boundary mistakes count). Intensities are 8-bit, evaluated in
float64.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import (
    DimMismatchError,
    EmptyRegionError,
    SingleClassRegionError,
    TooSmallError,
)
from .raster import require_binary

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = (0.01 * 255.0) ** 2
SSIM_C2 = (0.03 * 255.0) ** 2
LOCAL_BER_DILATION_RADIUS = 7

CSV_COLUMNS = ("tuple_id", "grmse", "lrmse", "gssim", "lssim", "gber", "lber", "psnr")


@dataclass(frozen=True)
class MetricReport:
    tuple_id: str
    grmse: float
    lrmse: Optional[float]
    gssim: float
    lssim: Optional[float]
    gber: Optional[float]
    lber: Optional[float]
    psnr: float

    def to_dict(self) -> dict:
        return {
            "tuple_id": self.tuple_id,
            "grmse": self.grmse,
            "lrmse": self.lrmse,
            "gssim": self.gssim,
            "lssim": self.lssim,
            "gber": self.gber,
            "lber": self.lber,
            "psnr": self.psnr,
        }


def _check_rgb_pair(pred: np.ndarray, gt: np.ndarray):
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.ndim != 3 or pred.shape[2] != 3 or gt.ndim != 3 or gt.shape[2] != 3:
        raise DimMismatchError(
            f"images must be HxWx3, got {pred.shape} and {gt.shape}"
        )
    if pred.shape != gt.shape:
        raise DimMismatchError(f"image dims differ: {pred.shape} vs {gt.shape}")
    return pred.astype(np.float64), gt.astype(np.float64)


def _region_mask(region: Optional[np.ndarray], shape) -> Optional[np.ndarray]:
    if region is None:
        return None
    region = require_binary(region)
    if region.shape != tuple(shape):
        raise DimMismatchError(f"region dims {region.shape} differ from image {tuple(shape)}")
    return region.astype(bool)


def rmse(pred: np.ndarray, gt: np.ndarray, region: Optional[np.ndarray] = None) -> float:
    """Root mean squared intensity difference over included pixels."""
    pred, gt = _check_rgb_pair(pred, gt)
    sel = _region_mask(region, pred.shape[:2])
    diff2 = (pred - gt) ** 2
    if sel is None:
        return float(np.sqrt(diff2.mean()))
    if not sel.any():
        raise EmptyRegionError("evaluation region selects no pixels")
    return float(np.sqrt(diff2[sel].mean()))


def luma(image: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an RGB image, in 0..255 floats."""
    image = np.asarray(image, dtype=np.float64)
    return image[..., 0] * 0.299 + image[..., 1] * 0.587 + image[..., 2] * 0.114


def _ssim_window() -> np.ndarray:
    half = SSIM_WINDOW // 2
    xs = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(xs ** 2) / (2.0 * SSIM_SIGMA ** 2))
    k = np.outer(g, g)
    return k / k.sum()


_SSIM_KERNEL = _ssim_window()


def ssim_map(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """Structural similarity at every fully-covered window center.

    Returns an (H-10, W-10) array of per-window index values on luma.
    """
    pred, gt = _check_rgb_pair(pred, gt)
    h, w = pred.shape[:2]
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise TooSmallError(
            f"image {w}x{h} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    x = luma(pred)
    y = luma(gt)
    half = SSIM_WINDOW // 2

    def wmean(img):
        return ndimage.correlate(img, _SSIM_KERNEL, mode="constant")[half:h - half, half:w - half]

    mu_x = wmean(x)
    mu_y = wmean(y)
    xx = wmean(x * x) - mu_x * mu_x
    yy = wmean(y * y) - mu_y * mu_y
    xy = wmean(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * xy + SSIM_C2)
    den = (mu_x ** 2 + mu_y ** 2 + SSIM_C1) * (xx + yy + SSIM_C2)
    return num / den


def ssim(pred: np.ndarray, gt: np.ndarray, region: Optional[np.ndarray] = None) -> float:
    """Mean structural similarity over window centers, optionally in a region."""
    values = ssim_map(pred, gt)
    half = SSIM_WINDOW // 2
    sel = _region_mask(region, np.asarray(pred).shape[:2])
    if sel is None:
        return float(values.mean())
    inner = sel[half:sel.shape[0] - half, half:sel.shape[1] - half]
    if not inner.any():
        raise EmptyRegionError("no window centers inside the region")
    return float(values[inner].mean())


def ber(
    pred_mask: np.ndarray,
    gt_mask: np.ndarray,
    region: Optional[np.ndarray] = None,
) -> float:
    """Balanced error rate of a predicted mask against ground truth."""
    pred = require_binary(pred_mask).astype(bool)
    gt = require_binary(gt_mask).astype(bool)
    if pred.shape != gt.shape:
        raise DimMismatchError(f"mask dims differ: {pred.shape} vs {gt.shape}")
    sel = _region_mask(region, gt.shape)
    if sel is not None:
        pred, gt = pred[sel], gt[sel]
    pos = int(gt.sum())
    neg = int(gt.size - pos)
    if pos == 0 or neg == 0:
        raise SingleClassRegionError("ground truth has one class; error rate undefined")
    fn = int((gt & ~pred).sum())
    fp = int((~gt & pred).sum())
    return 0.5 * (fn / pos + fp / neg)


def psnr(pred: np.ndarray, gt: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give +inf."""
    pred, gt = _check_rgb_pair(pred, gt)
    mse = float(((pred - gt) ** 2).mean())
    if mse == 0.0:
        return math.inf
    return 20.0 * math.log10(255.0) - 10.0 * math.log10(mse)


def dilate_region(mask: np.ndarray, radius: int = LOCAL_BER_DILATION_RADIUS) -> np.ndarray:
    """Grow a mask by a Euclidean disk of the given radius."""
    mask = require_binary(mask)
    if radius <= 0:
        return mask.copy()
    span = np.arange(-radius, radius + 1)
    disk = (span[:, None] ** 2 + span[None, :] ** 2) <= radius * radius
    return ndimage.binary_dilation(mask.astype(bool), structure=disk).astype(np.uint8)


def evaluate_tuple(
    pred: np.ndarray,
    gt: np.ndarray,
    gt_shadow_mask: np.ndarray,
    pred_shadow_mask: np.ndarray,
    tuple_id: str = "",
) -> MetricReport:
    """All metrics for one prediction; local fields are None when undefined."""
    gt_mask = require_binary(gt_shadow_mask)

    grmse = rmse(pred, gt)
    gssim_v = ssim(pred, gt)
    psnr_v = psnr(pred, gt)

    lrmse = lssim = None
    if gt_mask.any():
        lrmse = rmse(pred, gt, region=gt_mask)
        try:
            lssim = ssim(pred, gt, region=gt_mask)
        except EmptyRegionError:
            lssim = None

    def safe_ber(region):
        try:
            return ber(pred_shadow_mask, gt_mask, region=region)
        except SingleClassRegionError:
            return None

    gber = safe_ber(None)
    lber = safe_ber(dilate_region(gt_mask)) if gt_mask.any() else None

    return MetricReport(
        tuple_id=tuple_id,
        grmse=grmse,
        lrmse=lrmse,
        gssim=gssim_v,
        lssim=lssim,
        gber=gber,
        lber=lber,
        psnr=psnr_v,
    )


def aggregate_reports(reports: Sequence[MetricReport]) -> dict:
    """Mean of each metric over the reports that define it (finite values)."""
    out = {}
    for metric in CSV_COLUMNS[1:]:
        values = [
            getattr(r, metric) for r in reports
            if getattr(r, metric) is not None and math.isfinite(getattr(r, metric))
        ]
        out[metric] = {
            "mean": (sum(values) / len(values)) if values else None,
            "count": len(values),
        }
    return out


def reports_to_csv(reports: Sequence[MetricReport]) -> str:
    """CSV with the fixed column set; absent values are empty cells."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        row = [r.tuple_id]
        for metric in CSV_COLUMNS[1:]:
            v = getattr(r, metric)
            row.append("" if v is None else repr(float(v)))
        writer.writerow(row)
    return buf.getvalue()
