"""Keypoint body model: domain types, annotation sessions and the torso block.

The body is modelled with nine named keypoints plus one oriented torso
block. Annotation is a small state machine: points arrive in a fixed
name order, a commit is gated on a minimum point count, and the torso
block is derived from the committed points. All types are immutable
values; the operations below return new values instead of mutating.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Optional

from .errors import (
    BelowMinimumError,
    DegenerateAxisError,
    EmptySessionError,
    InvalidDimsError,
    MissingKeypointError,
    OutOfBoundsError,
    ParseError,
    SessionClosedError,
    SetFullError,
)

# Fixed click order; sessions bind incoming points to these names in turn.
KEYPOINT_ORDER = (
    "Head",
    "ElbowL",
    "ElbowR",
    "WristL",
    "WristR",
    "KneeL",
    "KneeR",
    "AnkleL",
    "AnkleR",
)

TORSO_TOP = "torso-top-center"
TORSO_BOTTOM = "torso-bottom-center"
ANCHOR_NAMES = (TORSO_TOP, TORSO_BOTTOM)

POSES = ("front", "side")
PROVENANCES = ("manual", "llm", "mediapipe")

DEFAULT_CANVAS = 256
# Torso block sits on the middle 60% of the head-to-knee axis.
TORSO_SPAN = (0.2, 0.8)
DEFAULT_WIDTH_RATIO = 0.25


class Point2(NamedTuple):
    x: float
    y: float

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


def _require_finite(p: Point2, what: str) -> None:
    if not p.is_finite():
        raise InvalidDimsError(f"{what} must be finite, got {p!r}")


@dataclass(frozen=True)
class KeypointSet:
    """Named keypoints on an annotation canvas.

    `points` maps keypoint names to coordinates; a complete set carries
    all nine names in the canonical order.
    """

    points: dict
    canvas_w: int = DEFAULT_CANVAS
    canvas_h: int = DEFAULT_CANVAS

    def __post_init__(self):
        if self.canvas_w <= 0 or self.canvas_h <= 0:
            raise InvalidDimsError(
                f"canvas dims must be positive, got {self.canvas_w}x{self.canvas_h}"
            )
        for name in self.points:
            if name not in KEYPOINT_ORDER:
                raise MissingKeypointError(f"unknown keypoint name {name!r}")

    def is_complete(self) -> bool:
        return all(name in self.points for name in KEYPOINT_ORDER)

    def __getitem__(self, name: str) -> Point2:
        try:
            return self.points[name]
        except KeyError:
            raise MissingKeypointError(f"keypoint {name!r} not present") from None


@dataclass(frozen=True)
class TorsoBlock:
    """Oriented torso rectangle.

    Corner order is fixed relative to the body axis: top-left,
    top-right, bottom-right, bottom-left ("top" is the head end).
    """

    corners: tuple

    def __post_init__(self):
        if len(self.corners) != 4:
            raise InvalidDimsError("torso block needs exactly 4 corners")

    @property
    def top_center(self) -> Point2:
        a, b = self.corners[0], self.corners[1]
        return Point2((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)

    @property
    def bottom_center(self) -> Point2:
        c, d = self.corners[2], self.corners[3]
        return Point2((c.x + d.x) / 2.0, (c.y + d.y) / 2.0)


@dataclass(frozen=True)
class SkeletonTopology:
    """Limb edges over keypoint names and the two torso anchors."""

    edges: tuple

    def __post_init__(self):
        valid = set(KEYPOINT_ORDER) | set(ANCHOR_NAMES)
        seen = set()
        for a, b in self.edges:
            if a not in valid or b not in valid:
                raise MissingKeypointError(f"topology references unknown endpoint ({a}, {b})")
            key = frozenset((a, b))
            if key in seen:
                raise ParseError(f"duplicate topology edge ({a}, {b})")
            seen.add(key)


DEFAULT_TOPOLOGY = SkeletonTopology(edges=(
    ("Head", TORSO_TOP),
    (TORSO_TOP, "ElbowL"),
    (TORSO_TOP, "ElbowR"),
    ("ElbowL", "WristL"),
    ("ElbowR", "WristR"),
    (TORSO_BOTTOM, "KneeL"),
    (TORSO_BOTTOM, "KneeR"),
    ("KneeL", "AnkleL"),
    ("KneeR", "AnkleR"),
))


@dataclass(frozen=True)
class AnnotationRecord:
    """One person's keypoints, torso block and pose metadata."""

    image_id: str
    pose: str
    keypoints: KeypointSet
    torso_block: Optional[TorsoBlock] = None
    provenance: str = "manual"
    original_w: int = DEFAULT_CANVAS
    original_h: int = DEFAULT_CANVAS

    def __post_init__(self):
        if self.pose not in POSES:
            raise ParseError(f"pose must be one of {POSES}, got {self.pose!r}")
        if self.provenance not in PROVENANCES:
            raise ParseError(f"provenance must be one of {PROVENANCES}, got {self.provenance!r}")
        if self.original_w <= 0 or self.original_h <= 0:
            raise InvalidDimsError("original dims must be positive")


@dataclass(frozen=True)
class AnnotationSession:
    """Active annotation of one image; points bind to names in fixed order."""

    image_id: str
    canvas_w: int = DEFAULT_CANVAS
    canvas_h: int = DEFAULT_CANVAS
    original_w: Optional[int] = None
    original_h: Optional[int] = None
    pose: str = "front"
    points: tuple = ()
    k_min: int = len(KEYPOINT_ORDER)
    state: str = "active"

    @property
    def next_name(self) -> Optional[str]:
        if len(self.points) >= len(KEYPOINT_ORDER):
            return None
        return KEYPOINT_ORDER[len(self.points)]

    def placed(self) -> list:
        return [(KEYPOINT_ORDER[i], p) for i, p in enumerate(self.points)]


def session_add_point(session: AnnotationSession, p: Point2) -> AnnotationSession:
    """Append a point, binding it to the next unassigned keypoint name."""
    if session.state != "active":
        raise SessionClosedError(f"session {session.image_id!r} already committed")
    if len(session.points) >= len(KEYPOINT_ORDER):
        raise SetFullError(f"all {len(KEYPOINT_ORDER)} keypoints already placed")
    p = Point2(float(p[0]), float(p[1]))
    _require_finite(p, "point")
    if not (0 <= p.x < session.canvas_w and 0 <= p.y < session.canvas_h):
        raise OutOfBoundsError(
            f"point {p} outside canvas {session.canvas_w}x{session.canvas_h}"
        )
    return replace(session, points=session.points + (p,))


def session_undo(session: AnnotationSession) -> AnnotationSession:
    """Remove the most recently placed point."""
    if session.state != "active":
        raise SessionClosedError(f"session {session.image_id!r} already committed")
    if not session.points:
        raise EmptySessionError("no points to undo")
    return replace(session, points=session.points[:-1])


def session_commit(session: AnnotationSession, width_ratio: float = DEFAULT_WIDTH_RATIO):
    """Close the session and build the annotation record.

    Returns (committed_session, record). Rejects when fewer than k_min
    points are placed.
    """
    if session.state != "active":
        raise SessionClosedError(f"session {session.image_id!r} already committed")
    if len(session.points) < session.k_min:
        raise BelowMinimumError(
            f"{len(session.points)} points placed, need at least {session.k_min}"
        )
    kps = KeypointSet(
        points={KEYPOINT_ORDER[i]: p for i, p in enumerate(session.points)},
        canvas_w=session.canvas_w,
        canvas_h=session.canvas_h,
    )
    block = derive_torso_block(kps, width_ratio)
    record = AnnotationRecord(
        image_id=session.image_id,
        pose=session.pose,
        keypoints=kps,
        torso_block=block,
        provenance="manual",
        original_w=session.original_w or session.canvas_w,
        original_h=session.original_h or session.canvas_h,
    )
    return replace(session, state="committed"), record


def torso_axis(kps: KeypointSet):
    """Head point and knee midpoint; the body axis runs between them."""
    head = kps["Head"]
    kl, kr = kps["KneeL"], kps["KneeR"]
    mid = Point2((kl.x + kr.x) / 2.0, (kl.y + kr.y) / 2.0)
    return head, mid


def derive_torso_block(kps: KeypointSet, width_ratio: float = DEFAULT_WIDTH_RATIO) -> TorsoBlock:
    """Oriented rectangle on the middle span of the head-to-knee axis.

    Half-width is width_ratio times the axis length; corners follow the
    axis direction so the construction is rotation-equivariant.
    """
    head, mid = torso_axis(kps)
    length = head.dist(mid)
    if length == 0.0:
        raise DegenerateAxisError("head coincides with knee midpoint")
    ux, uy = (mid.x - head.x) / length, (mid.y - head.y) / length
    # Left-hand perpendicular of the axis direction.
    nx, ny = -uy, ux
    half_w = width_ratio * length
    t0, t1 = TORSO_SPAN
    top = Point2(head.x + ux * length * t0, head.y + uy * length * t0)
    bot = Point2(head.x + ux * length * t1, head.y + uy * length * t1)
    return TorsoBlock(corners=(
        Point2(top.x + nx * half_w, top.y + ny * half_w),
        Point2(top.x - nx * half_w, top.y - ny * half_w),
        Point2(bot.x - nx * half_w, bot.y - ny * half_w),
        Point2(bot.x + nx * half_w, bot.y + ny * half_w),
    ))


def torso_anchors(rec: AnnotationRecord) -> dict:
    """Positions of the two torso anchor names for a record.

    Uses the stored block when present; otherwise falls back to points
    on the head-to-knee axis (which collapse to the head when the axis
    is degenerate, keeping rasterization total).
    """
    if rec.torso_block is not None:
        return {
            TORSO_TOP: rec.torso_block.top_center,
            TORSO_BOTTOM: rec.torso_block.bottom_center,
        }
    head, mid = torso_axis(rec.keypoints)
    t0, t1 = TORSO_SPAN
    return {
        TORSO_TOP: Point2(head.x + (mid.x - head.x) * t0, head.y + (mid.y - head.y) * t0),
        TORSO_BOTTOM: Point2(head.x + (mid.x - head.x) * t1, head.y + (mid.y - head.y) * t1),
    }


def rescale_annotation(rec: AnnotationRecord, target_w: int, target_h: int) -> AnnotationRecord:
    """Scale all coordinates from the record's canvas to target dims."""
    if target_w <= 0 or target_h <= 0:
        raise InvalidDimsError(f"target dims must be positive, got {target_w}x{target_h}")
    sx = target_w / rec.keypoints.canvas_w
    sy = target_h / rec.keypoints.canvas_h
    kps = KeypointSet(
        points={n: Point2(p.x * sx, p.y * sy) for n, p in rec.keypoints.points.items()},
        canvas_w=target_w,
        canvas_h=target_h,
    )
    block = rec.torso_block
    if block is not None:
        block = TorsoBlock(corners=tuple(Point2(c.x * sx, c.y * sy) for c in block.corners))
    return replace(rec, keypoints=kps, torso_block=block)


# --- JSON annotation format --------------------------------------------------

def record_to_dict(rec: AnnotationRecord) -> dict:
    """Wire form of a record; key set and keypoint order are fixed."""
    if not rec.keypoints.is_complete():
        missing = [n for n in KEYPOINT_ORDER if n not in rec.keypoints.points]
        raise MissingKeypointError(f"record incomplete, missing {missing}")
    return {
        "image_id": rec.image_id,
        "pose": rec.pose,
        "canvas": {"w": rec.keypoints.canvas_w, "h": rec.keypoints.canvas_h},
        "original": {"w": rec.original_w, "h": rec.original_h},
        "provenance": rec.provenance,
        "keypoints": [
            {"name": n, "x": rec.keypoints[n].x, "y": rec.keypoints[n].y}
            for n in KEYPOINT_ORDER
        ],
        "torso_block": (
            None if rec.torso_block is None
            else [[c.x, c.y] for c in rec.torso_block.corners]
        ),
    }


def record_to_json(rec: AnnotationRecord) -> str:
    return json.dumps(record_to_dict(rec), indent=2)


def record_from_dict(data: dict) -> AnnotationRecord:
    try:
        kp_list = data["keypoints"]
        points = {e["name"]: Point2(float(e["x"]), float(e["y"])) for e in kp_list}
        kps = KeypointSet(
            points=points,
            canvas_w=int(data["canvas"]["w"]),
            canvas_h=int(data["canvas"]["h"]),
        )
        block = None
        if data.get("torso_block") is not None:
            block = TorsoBlock(corners=tuple(
                Point2(float(c[0]), float(c[1])) for c in data["torso_block"]
            ))
        return AnnotationRecord(
            image_id=str(data["image_id"]),
            pose=data["pose"],
            keypoints=kps,
            torso_block=block,
            provenance=data.get("provenance", "manual"),
            original_w=int(data["original"]["w"]),
            original_h=int(data["original"]["h"]),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed annotation record: {exc}") from exc


def record_from_json(text: str) -> AnnotationRecord:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid annotation JSON: {exc}") from exc
    return record_from_dict(data)
