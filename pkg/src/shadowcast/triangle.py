"""Shadow triangle geometry: extraction, scaling coefficient and projection.

A standing object and its ground shadow define a triangle {A, B, C}:
A is the top-center of the object's bounding box, B the bottom-center,
C the extreme bottom point of the shadow. The ratio k = |AB| / |BC|
approximates tan(theta) for elevation theta under parallel light, and
drives limb-by-limb shadow projection in image space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import (
    DegenerateTriangleError,
    DimMismatchError,
    MissingReferenceError,
    NoContoursError,
    NonPositiveError,
    NonPositiveKError,
    NonUnitAzimuthError,
    OutOfRangeError,
    ShadowToolError,
    ZeroLimbError,
    ZeroShadowError,
)
from .geometry import Point2
from .raster import require_binary

UNIT_TOL = 1e-9
# Candidate shadow points live in the lowest fifth of the object box.
BOTTOM_BAND = 0.8

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class ShadowTriangle:
    a: Point2
    b: Point2
    c: Point2
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "A": [self.a.x, self.a.y],
            "B": [self.b.x, self.b.y],
            "C": [self.c.x, self.c.y],
            "degenerate": self.degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class LightEstimate:
    """Parallel-light description: coefficient k, elevation, image azimuth."""

    k: float
    theta: float
    azimuth: Point2

    def __post_init__(self):
        if not self.k > 0:
            raise NonPositiveKError(f"k must be positive, got {self.k}")
        if not 0 < self.theta <= math.pi / 2:
            raise OutOfRangeError(f"theta must lie in (0, pi/2], got {self.theta}")
        _check_unit(self.azimuth)
        if abs(self.k - math.tan(self.theta)) > 1e-9 * max(1.0, self.k):
            raise OutOfRangeError(
                f"k={self.k} inconsistent with tan(theta)={math.tan(self.theta)}"
            )

    @classmethod
    def from_theta(cls, theta: float, azimuth) -> "LightEstimate":
        az = _as_unit(azimuth)
        return cls(k=k_from_theta(theta), theta=theta, azimuth=az)

    @classmethod
    def from_k(cls, k: float, azimuth) -> "LightEstimate":
        az = _as_unit(azimuth)
        return cls(k=float(k), theta=theta_from_k(k), azimuth=az)

    def to_dict(self) -> dict:
        return {"k": self.k, "theta": self.theta, "azimuth": [self.azimuth.x, self.azimuth.y]}


@dataclass(frozen=True)
class LimbCorrespondence:
    """A limb (p1 free end, p2 ground-contact end) and its shadow tip p3."""

    limb_name: str
    p1: Point2
    p2: Point2
    p3: Point2


@dataclass(frozen=True)
class KReport:
    """Per-limb shadow coefficients measured against the Head reference."""

    ks: dict
    reference_k: float
    deviations: dict
    mean_deviation: float
    max_deviation: float

    def rounded(self, ndigits: int = 2) -> "KReport":
        return KReport(
            ks={n: round(v, ndigits) for n, v in self.ks.items()},
            reference_k=round(self.reference_k, ndigits),
            deviations={n: round(v, ndigits) for n, v in self.deviations.items()},
            mean_deviation=round(self.mean_deviation, ndigits),
            max_deviation=round(self.max_deviation, ndigits),
        )

    def to_dict(self) -> dict:
        return {
            "reference": "Head",
            "k": dict(self.ks),
            "deviation": dict(self.deviations),
            "mean": self.mean_deviation,
            "max": self.max_deviation,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _check_unit(az: Point2) -> None:
    norm = math.hypot(az.x, az.y)
    if abs(norm - 1.0) > UNIT_TOL:
        raise NonUnitAzimuthError(f"azimuth norm {norm} is not 1")


def _as_unit(azimuth) -> Point2:
    ax, ay = float(azimuth[0]), float(azimuth[1])
    norm = math.hypot(ax, ay)
    if norm == 0.0:
        raise NonUnitAzimuthError("azimuth vector is zero")
    return Point2(ax / norm, ay / norm)


def azimuth_from_angle(angle_rad: float) -> Point2:
    return Point2(math.cos(angle_rad), math.sin(angle_rad))


# --- triangle vertex extraction ----------------------------------------------

def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull of (x, y) integer points; collinear points dropped."""
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
                if cross <= 0:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _dominant_component(mask: np.ndarray) -> np.ndarray:
    """Boolean mask of the 8-connected component with the largest area."""
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        raise NoContoursError("mask has no foreground pixels")
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=range(1, count + 1))
    return labels == (int(np.argmax(sizes)) + 1)


def _boundary_points(component: np.ndarray) -> np.ndarray:
    """(x, y) centers of the component's boundary pixels."""
    interior = ndimage.binary_erosion(component)
    rows, cols = np.nonzero(component & ~interior)
    return np.column_stack((cols, rows))


def extract_shadow_triangle(mask: np.ndarray) -> ShadowTriangle:
    """Extract {A, B, C} from a binary mask.

    The dominant 8-connected component is selected by area; A and B sit
    on the vertical midline of its bounding box; C is the convex-hull
    point in the bottom band farthest from B (ties: larger x, then
    larger y). With no bottom-band candidates C collapses onto B and
    the triangle is degenerate.
    """
    mask = require_binary(mask)
    component = _dominant_component(mask)
    rows, cols = np.nonzero(component)
    x0, x1 = int(cols.min()), int(cols.max())
    y0, y1 = int(rows.min()), int(rows.max())
    w, h = x1 - x0, y1 - y0
    a = Point2(x0 + w / 2.0, float(y0))
    b = Point2(x0 + w / 2.0, float(y0 + h))

    hull = _convex_hull(_boundary_points(component))
    cutoff = y0 + BOTTOM_BAND * h
    candidates = hull[hull[:, 1] > cutoff]
    if len(candidates) == 0:
        return ShadowTriangle(a=a, b=b, c=b, degenerate=True)
    d2 = (candidates[:, 0] - b.x) ** 2 + (candidates[:, 1] - b.y) ** 2
    order = np.lexsort((candidates[:, 1], candidates[:, 0], d2))
    best = candidates[order[-1]]
    c = Point2(float(best[0]), float(best[1]))
    return ShadowTriangle(a=a, b=b, c=c, degenerate=False)


# --- scaling coefficient and projection ---------------------------------------

def compute_k(p1: Point2, p2: Point2, p3: Point2) -> float:
    """Ratio of limb length to shadow length."""
    limb = math.hypot(p1[0] - p2[0], p1[1] - p2[1])
    shadow = math.hypot(p2[0] - p3[0], p2[1] - p3[1])
    if shadow == 0.0:
        raise ZeroShadowError("shadow endpoint coincides with limb base")
    if limb == 0.0:
        raise ZeroLimbError("limb endpoints coincide")
    return limb / shadow


def k_from_theta(theta: float) -> float:
    if not 0 < theta < math.pi / 2:
        raise OutOfRangeError(f"theta must lie in (0, pi/2), got {theta}")
    return math.tan(theta)


def theta_from_k(k: float) -> float:
    if not k > 0:
        raise OutOfRangeError(f"k must be positive, got {k}")
    return math.atan(float(k))


DEFAULT_LIGHT = LightEstimate.from_theta(math.pi / 4, (math.sqrt(0.5), math.sqrt(0.5)))


def project_shadow_point(p1: Point2, p2: Point2, k: float, azimuth) -> Point2:
    """Shadow position of limb end p1 anchored at p2, scaled by 1/k."""
    if not k > 0:
        raise NonPositiveKError(f"k must be positive, got {k}")
    az = Point2(float(azimuth[0]), float(azimuth[1]))
    _check_unit(az)
    length = math.hypot(p1[0] - p2[0], p1[1] - p2[1])
    if length == 0.0:
        return Point2(float(p2[0]), float(p2[1]))
    reach = length / k
    return Point2(p2[0] + reach * az.x, p2[1] + reach * az.y)


def verify_physical_relation(limb_height: float, shadow_length: float) -> float:
    """Elevation angle from object height and shadow length."""
    if not (limb_height > 0 and shadow_length > 0):
        raise NonPositiveError(
            f"height and length must be positive, got {limb_height}, {shadow_length}"
        )
    return math.atan(limb_height / shadow_length)


# --- light estimation from object / shadow pairs ------------------------------

def estimate_light_from_background(
    object_and_shadow_mask: np.ndarray,
    object_mask: np.ndarray,
) -> LightEstimate:
    """Recover the parallel light from a background object-shadow pair.

    The object mask fixes the limb segment A-B on its own bounding box;
    the combined mask contributes the shadow tip C. Using the combined
    box for A and B would drag the midline toward the shadow and bias
    both k and the azimuth, so the two masks are kept separate.
    """
    union = require_binary(object_and_shadow_mask)
    obj = require_binary(object_mask)
    if union.shape != obj.shape:
        raise DimMismatchError(f"mask dims differ: {union.shape} vs {obj.shape}")
    if np.any(obj & ~union):
        raise ShadowToolError("object mask is not contained in the combined mask")

    obj_tri = extract_shadow_triangle(obj)
    union_tri = extract_shadow_triangle(union)
    if union_tri.degenerate:
        raise DegenerateTriangleError("combined mask shows no shadow extent")
    c = union_tri.c

    rows, cols = np.nonzero(_dominant_component(obj))
    x0, x1 = cols.min() - 0.5, cols.max() + 0.5
    y0, y1 = rows.min() - 0.5, rows.max() + 0.5
    if x0 <= c.x <= x1 and y0 <= c.y <= y1:
        raise DegenerateTriangleError("shadow tip lies inside the object box")

    a, b = obj_tri.a, obj_tri.b
    height = a.dist(b)
    reach = b.dist(c)
    if height == 0.0 or reach == 0.0:
        raise DegenerateTriangleError("object or shadow extent collapsed")
    k = height / reach
    azimuth = Point2((c.x - b.x) / reach, (c.y - b.y) / reach)
    return LightEstimate(k=k, theta=math.atan(k), azimuth=azimuth)


def validate_k_consistency(correspondences: Sequence[LimbCorrespondence]) -> KReport:
    """Per-limb coefficients and their deviations from the Head limb."""
    ks = {}
    for corr in correspondences:
        try:
            ks[corr.limb_name] = compute_k(corr.p1, corr.p2, corr.p3)
        except (ZeroShadowError, ZeroLimbError) as exc:
            raise type(exc)(f"limb {corr.limb_name!r}: {exc}") from exc
    if "Head" not in ks:
        raise MissingReferenceError("correspondences contain no 'Head' limb")
    ref = ks["Head"]
    deviations = {n: abs(v - ref) for n, v in ks.items() if n != "Head"}
    if deviations:
        mean_dev = sum(deviations.values()) / len(deviations)
        max_dev = max(deviations.values())
    else:
        mean_dev = max_dev = 0.0
    return KReport(
        ks=ks,
        reference_k=ref,
        deviations=deviations,
        mean_deviation=mean_dev,
        max_deviation=max_dev,
    )
