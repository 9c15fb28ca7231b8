"""Dataset manifest: tuples of composite image, object mask and ground truth.

The manifest is a JSON file; paths are resolved relative to its parent
directory. When a tuple has no explicit ground-truth shadow mask, one is
derived from the composite/ground-truth difference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import DimMismatchError, MissingFileError, ParseError
from .imgio import load_mask, load_rgb

SPLITS = ("bos", "bos_free")

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class DatasetTuple:
    tuple_id: str
    composite_path: Path
    fg_object_mask_path: Path
    ground_truth_path: Path
    gt_shadow_mask_path: Optional[Path]
    split: str


@dataclass(frozen=True)
class Manifest:
    root: Path
    tuples: tuple
    annotations: dict

    def get(self, tuple_id: str) -> DatasetTuple:
        for t in self.tuples:
            if t.tuple_id == tuple_id:
                return t
        raise ParseError(f"tuple {tuple_id!r} not present in manifest")

    def annotation_path(self, image_id: str) -> Optional[Path]:
        return self.annotations.get(image_id)


def derive_shadow_mask(
    composite: np.ndarray,
    ground_truth: np.ndarray,
    fg_object_mask: np.ndarray,
    threshold: int = 10,
) -> np.ndarray:
    """Shadow region as the thresholded composite/ground-truth difference.

    Max-channel absolute difference above the threshold, outside the
    foreground object; only the largest 8-connected component survives,
    rejecting speckle from compression noise.
    """
    if composite.shape != ground_truth.shape:
        raise DimMismatchError(
            f"composite {composite.shape} vs ground truth {ground_truth.shape}"
        )
    if fg_object_mask.shape != composite.shape[:2]:
        raise DimMismatchError(
            f"object mask {fg_object_mask.shape} vs image {composite.shape[:2]}"
        )
    diff = np.abs(composite.astype(np.int16) - ground_truth.astype(np.int16)).max(axis=2)
    raw = (diff > threshold) & (fg_object_mask == 0)
    labels, count = ndimage.label(raw, structure=EIGHT_CONNECTED)
    if count == 0:
        return np.zeros(raw.shape, dtype=np.uint8)
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=range(1, count + 1))
    keep = int(np.argmax(sizes)) + 1
    return (labels == keep).astype(np.uint8)


def tuple_shadow_mask(t: DatasetTuple, threshold: int = 10) -> np.ndarray:
    """Ground-truth shadow mask for a tuple, loading or deriving it."""
    if t.gt_shadow_mask_path is not None:
        return load_mask(t.gt_shadow_mask_path)
    return derive_shadow_mask(
        load_rgb(t.composite_path),
        load_rgb(t.ground_truth_path),
        load_mask(t.fg_object_mask_path),
        threshold=threshold,
    )


def _resolve(root: Path, raw, field: str, tuple_id: str) -> Path:
    if not isinstance(raw, str) or not raw:
        raise ParseError(f"tuple {tuple_id!r}: field {field!r} must be a path string")
    path = root / raw
    if not path.is_file():
        raise MissingFileError(f"tuple {tuple_id!r}: {field} file missing: {path}")
    return path


def load_manifest(path) -> Manifest:
    """Parse and validate a manifest file; all referenced files must exist."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"manifest not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    root = path.parent

    raw_tuples = data.get("tuples")
    if not isinstance(raw_tuples, list):
        raise ParseError(f"{path}: 'tuples' must be a list")
    tuples = []
    seen = set()
    for i, entry in enumerate(raw_tuples):
        if not isinstance(entry, dict):
            raise ParseError(f"{path}: tuple #{i} is not an object")
        tuple_id = entry.get("tuple_id")
        if not isinstance(tuple_id, str) or not tuple_id:
            raise ParseError(f"{path}: tuple #{i} missing 'tuple_id'")
        if tuple_id in seen:
            raise ParseError(f"{path}: duplicate tuple_id {tuple_id!r}")
        seen.add(tuple_id)
        split = entry.get("split", "bos_free")
        if split not in SPLITS:
            raise ParseError(f"tuple {tuple_id!r}: split must be one of {SPLITS}")
        shadow_raw = entry.get("gt_shadow_mask")
        tuples.append(DatasetTuple(
            tuple_id=tuple_id,
            composite_path=_resolve(root, entry.get("composite"), "composite", tuple_id),
            fg_object_mask_path=_resolve(
                root, entry.get("fg_object_mask"), "fg_object_mask", tuple_id
            ),
            ground_truth_path=_resolve(
                root, entry.get("ground_truth"), "ground_truth", tuple_id
            ),
            gt_shadow_mask_path=(
                _resolve(root, shadow_raw, "gt_shadow_mask", tuple_id)
                if shadow_raw is not None else None
            ),
            split=split,
        ))

    annotations = {}
    raw_ann = data.get("annotations", {})
    if not isinstance(raw_ann, dict):
        raise ParseError(f"{path}: 'annotations' must be an object")
    for image_id, rel in raw_ann.items():
        ann_path = root / rel
        if not ann_path.is_file():
            raise MissingFileError(f"annotation for {image_id!r} missing: {ann_path}")
        annotations[image_id] = ann_path

    manifest = Manifest(root=root, tuples=tuple(tuples), annotations=annotations)
    _validate_dims(manifest)
    return manifest


def _validate_dims(manifest: Manifest) -> None:
    for t in manifest.tuples:
        comp = load_rgb(t.composite_path)
        gt = load_rgb(t.ground_truth_path)
        fg = load_mask(t.fg_object_mask_path)
        if comp.shape != gt.shape or fg.shape != comp.shape[:2]:
            raise DimMismatchError(
                f"tuple {t.tuple_id!r}: raster dims disagree "
                f"(composite {comp.shape}, ground truth {gt.shape}, mask {fg.shape})"
            )
        if t.gt_shadow_mask_path is not None:
            sm = load_mask(t.gt_shadow_mask_path)
            if sm.shape != comp.shape[:2]:
                raise DimMismatchError(
                    f"tuple {t.tuple_id!r}: shadow mask dims {sm.shape} "
                    f"differ from image {comp.shape[:2]}"
                )
