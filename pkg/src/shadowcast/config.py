"""Runtime configuration with a minimal key = value file format.

The file format is a TOML-compatible subset: one `key = value` pair per
line, `#` comments, quoted strings, integers, floats and booleans. The
recognized keys and their defaults are listed in DEFAULTS; unknown keys
are rejected so typos fail loudly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import ParseError
from .geometry import DEFAULT_CANVAS, DEFAULT_WIDTH_RATIO, DEFAULT_TOPOLOGY, SkeletonTopology
from .triangle import DEFAULT_LIGHT, LightEstimate

DEFAULTS = {
    "k_min": 9,
    "canvas_w": DEFAULT_CANVAS,
    "canvas_h": DEFAULT_CANVAS,
    "width_ratio": DEFAULT_WIDTH_RATIO,
    "alpha": 0.45,
    "sigma": 2.0,
    "thickness": 5,
    "default_theta": math.pi / 4,
    "default_azimuth_x": math.sqrt(0.5),
    "default_azimuth_y": math.sqrt(0.5),
    "dilation_radius": 7,
    "diff_threshold": 10,
    "ground_line": None,
    "bind": "127.0.0.1:8000",
}


@dataclass(frozen=True)
class Config:
    k_min: int = 9
    canvas_w: int = DEFAULT_CANVAS
    canvas_h: int = DEFAULT_CANVAS
    width_ratio: float = DEFAULT_WIDTH_RATIO
    alpha: float = 0.45
    sigma: float = 2.0
    thickness: int = 5
    default_theta: float = math.pi / 4
    default_azimuth_x: float = math.sqrt(0.5)
    default_azimuth_y: float = math.sqrt(0.5)
    dilation_radius: int = 7
    diff_threshold: int = 10
    ground_line: Optional[float] = None
    bind: str = "127.0.0.1:8000"
    topology: SkeletonTopology = field(default=DEFAULT_TOPOLOGY)

    def __post_init__(self):
        if self.k_min < 1 or self.k_min > 9:
            raise ParseError(f"k_min must lie in 1..9, got {self.k_min}")
        if self.canvas_w <= 0 or self.canvas_h <= 0:
            raise ParseError("canvas dims must be positive")
        if not 0 < self.width_ratio <= 2:
            raise ParseError(f"width_ratio out of range: {self.width_ratio}")
        if not 0 <= self.alpha <= 1:
            raise ParseError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.sigma < 0:
            raise ParseError(f"sigma must be >= 0, got {self.sigma}")
        if self.thickness < 1:
            raise ParseError(f"thickness must be >= 1, got {self.thickness}")
        if not 0 < self.default_theta < math.pi / 2:
            raise ParseError(f"default_theta must lie in (0, pi/2), got {self.default_theta}")
        if self.dilation_radius < 0 or self.diff_threshold < 0:
            raise ParseError("dilation_radius and diff_threshold must be >= 0")

    def default_light(self) -> LightEstimate:
        return LightEstimate.from_theta(
            self.default_theta, (self.default_azimuth_x, self.default_azimuth_y)
        )

    def bind_host_port(self) -> tuple:
        host, sep, port = self.bind.rpartition(":")
        if not sep or not port.isdigit():
            raise ParseError(f"bind must be HOST:PORT, got {self.bind!r}")
        return host, int(port)


def _parse_value(raw: str, lineno: int):
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    if raw == "none":
        return None
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"line {lineno}: cannot parse value {raw!r}") from None


def parse_config_text(text: str) -> Config:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in DEFAULTS:
            raise ParseError(f"line {lineno}: unknown config key {key!r}")
        values[key] = _parse_value(raw, lineno)
    return Config(**values)


def load_config(path=None) -> Config:
    if path is None:
        return Config()
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"))
