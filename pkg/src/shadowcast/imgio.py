"""PNG loading and saving for RGB images and masks (Pillow-backed).

Hard masks persist as 8-bit grayscale {0, 255}; soft masks quantize
[0, 1] linearly to 0..255. Loading thresholds at 128 so round-trips are
stable.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import MissingFileError

MASK_THRESHOLD = 128


def load_rgb(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"image not found: {path}")
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def load_mask(path) -> np.ndarray:
    """8-bit grayscale PNG to a binary mask (values >= 128 are foreground)."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"mask not found: {path}")
    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"), dtype=np.uint8)
    return (gray >= MASK_THRESHOLD).astype(np.uint8)


def save_rgb(image: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="RGB").save(Path(path), format="PNG")


def save_mask(mask: np.ndarray, path) -> None:
    data = (np.asarray(mask, dtype=np.uint8) * 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(Path(path), format="PNG")


def save_soft_mask(values: np.ndarray, path) -> None:
    data = np.floor(np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0) * 255.0 + 0.5)
    Image.fromarray(data.astype(np.uint8), mode="L").save(Path(path), format="PNG")


def encode_rgb_png(image: np.ndarray) -> bytes:
    """Deterministic in-memory PNG encoding of an RGB array."""
    buf = io.BytesIO()
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
