"""Command line interface.

Commands: skeleton, sta, light, shadow, eval, validate-k, serve.
Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import Config, load_config
from .errors import ParseError, ShadowToolError
from .geometry import DEFAULT_TOPOLOGY, Point2, record_from_json
from .imgio import load_mask, save_mask, save_rgb, save_soft_mask
from .manifest import load_manifest, tuple_shadow_mask
from .metrics import aggregate_reports, evaluate_tuple, reports_to_csv
from .pipeline import run_shadow_pipeline
from .raster import rasterize_skeleton
from .triangle import (
    LightEstimate,
    LimbCorrespondence,
    estimate_light_from_background,
    extract_shadow_triangle,
    validate_k_consistency,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_azimuth(raw: str):
    parts = raw.split(",")
    if len(parts) != 2:
        raise ParseError(f"azimuth must be X,Y got {raw!r}")
    return float(parts[0]), float(parts[1])


def build_parser() -> _Parser:
    parser = _Parser(prog="shadowcast", description=__doc__)
    parser.add_argument("--version", action="version", version=f"shadowcast {__version__}")
    parser.add_argument("--config", help="path to a key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("skeleton", help="rasterize an annotation to a skeleton mask")
    p.add_argument("annotation", help="annotation JSON file")
    p.add_argument("--out", required=True, help="output mask PNG")
    p.add_argument("--thickness", type=int, default=None)
    p.add_argument("--size", default=None, help="WxH output size (default: record canvas)")

    p = sub.add_parser("sta", help="extract shadow-triangle vertices from a mask")
    p.add_argument("mask", help="binary mask PNG")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")

    p = sub.add_parser("light", help="estimate the light from an object/shadow pair")
    p.add_argument("obj_shadow", help="mask PNG of object plus shadow")
    p.add_argument("obj", help="mask PNG of the object alone")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("shadow", help="synthesize the shadow for one dataset tuple")
    p.add_argument("tuple_id")
    p.add_argument("--annotation", required=True, help="annotation JSON file")
    p.add_argument("--manifest", required=True, help="dataset manifest JSON")
    p.add_argument("--out-dir", default=".", help="directory for rendered outputs")
    p.add_argument("--theta", type=float, default=None, help="elevation override (radians)")
    p.add_argument("--azimuth", default=None, help="azimuth override X,Y")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)

    p = sub.add_parser("eval", help="evaluate predicted images against ground truth")
    p.add_argument("pred_dir", help="directory with <tuple_id>.png predictions")
    p.add_argument("--manifest", required=True)
    p.add_argument("--csv", required=True, help="per-tuple metrics CSV output")

    p = sub.add_parser("validate-k", help="coefficient consistency for limb correspondences")
    p.add_argument("correspondences", help="JSON list of {limb_name, p1, p2, p3}")
    p.add_argument("--round", action="store_true", help="round to two decimals")

    p = sub.add_parser("serve", help="run the annotation and preview service")
    p.add_argument("--bind", default=None, help="HOST:PORT (default from config)")
    p.add_argument("--manifest", required=True)
    return parser


def _cmd_skeleton(args, cfg: Config) -> int:
    rec = record_from_json(Path(args.annotation).read_text(encoding="utf-8"))
    if args.size:
        try:
            w, h = (int(v) for v in args.size.lower().split("x"))
        except ValueError:
            raise ParseError(f"--size must be WxH, got {args.size!r}") from None
    else:
        w, h = rec.keypoints.canvas_w, rec.keypoints.canvas_h
    thickness = args.thickness if args.thickness is not None else cfg.thickness
    mask = rasterize_skeleton(rec, cfg.topology, thickness, w, h)
    save_mask(mask, args.out)
    print(f"wrote {args.out} ({int(mask.sum())} set pixels)")
    return EXIT_OK


def _cmd_sta(args, _cfg: Config) -> int:
    tri = extract_shadow_triangle(load_mask(args.mask))
    if args.json:
        print(tri.to_json())
    else:
        print(f"A = ({tri.a.x}, {tri.a.y})")
        print(f"B = ({tri.b.x}, {tri.b.y})")
        print(f"C = ({tri.c.x}, {tri.c.y})")
        print(f"degenerate = {tri.degenerate}")
    return EXIT_OK


def _cmd_light(args, _cfg: Config) -> int:
    light = estimate_light_from_background(load_mask(args.obj_shadow), load_mask(args.obj))
    if args.json:
        print(json.dumps(light.to_dict(), indent=2))
    else:
        print(f"k = {light.k:.6f}")
        print(f"theta = {light.theta:.6f} rad ({math.degrees(light.theta):.2f} deg)")
        print(f"azimuth = ({light.azimuth.x:.6f}, {light.azimuth.y:.6f})")
    return EXIT_OK


def _cmd_shadow(args, cfg: Config) -> int:
    from dataclasses import replace

    manifest = load_manifest(args.manifest)
    t = manifest.get(args.tuple_id)
    rec = record_from_json(Path(args.annotation).read_text(encoding="utf-8"))
    if args.alpha is not None:
        cfg = replace(cfg, alpha=args.alpha)
    if args.sigma is not None:
        cfg = replace(cfg, sigma=args.sigma)
    light = None
    if args.theta is not None:
        azimuth = (
            _parse_azimuth(args.azimuth)
            if args.azimuth is not None
            else (cfg.default_azimuth_x, cfg.default_azimuth_y)
        )
        light = LightEstimate.from_theta(args.theta, azimuth)
    result = run_shadow_pipeline(t, rec, cfg, light_override=light)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image_path = out_dir / f"{t.tuple_id}_shadowed.png"
    mask_path = out_dir / f"{t.tuple_id}_shadow_mask.png"
    soft_path = out_dir / f"{t.tuple_id}_shadow_soft.png"
    report_path = out_dir / f"{t.tuple_id}_report.json"
    save_rgb(result.output, image_path)
    save_mask(result.shadow_mask, mask_path)
    save_soft_mask(result.soft_shadow, soft_path)
    report = {
        "tuple_id": t.tuple_id,
        "light": result.light.to_dict(),
        "light_source": result.light_source,
        "k_report": result.k_report.to_dict(),
    }
    report_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {image_path}, {mask_path}, {soft_path}, {report_path}")
    return EXIT_OK


def _cmd_eval(args, cfg: Config) -> int:
    from .imgio import load_rgb
    from .manifest import derive_shadow_mask

    manifest = load_manifest(args.manifest)
    pred_dir = Path(args.pred_dir)
    reports = []
    for t in manifest.tuples:
        pred_path = pred_dir / f"{t.tuple_id}.png"
        if not pred_path.is_file():
            raise ShadowToolError(f"tuple {t.tuple_id!r}: prediction missing: {pred_path}")
        pred = load_rgb(pred_path)
        gt = load_rgb(t.ground_truth_path)
        comp = load_rgb(t.composite_path)
        fg = load_mask(t.fg_object_mask_path)
        gt_mask = tuple_shadow_mask(t, threshold=cfg.diff_threshold)
        pred_mask = derive_shadow_mask(comp, pred, fg, threshold=cfg.diff_threshold)
        reports.append(evaluate_tuple(pred, gt, gt_mask, pred_mask, tuple_id=t.tuple_id))

    Path(args.csv).write_text(reports_to_csv(reports), encoding="utf-8")
    by_split = {
        "all": reports,
        "bos": [r for r, t in zip(reports, manifest.tuples) if t.split == "bos"],
        "bos_free": [r for r, t in zip(reports, manifest.tuples) if t.split == "bos_free"],
    }
    summary = {name: aggregate_reports(rs) for name, rs in by_split.items() if rs}
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_validate_k(args, _cfg: Config) -> int:
    raw = json.loads(Path(args.correspondences).read_text(encoding="utf-8"))
    if isinstance(raw, dict):
        raw = raw.get("correspondences", [])
    try:
        corrs = [
            LimbCorrespondence(
                limb_name=e["limb_name"],
                p1=Point2(*map(float, e["p1"])),
                p2=Point2(*map(float, e["p2"])),
                p3=Point2(*map(float, e["p3"])),
            )
            for e in raw
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed correspondence entry: {exc}") from exc
    report = validate_k_consistency(corrs)
    if args.round:
        report = report.rounded(2)
    print(report.to_json())
    return EXIT_OK


def _cmd_serve(args, cfg: Config) -> int:
    from dataclasses import replace

    from .server import serve_annotation_api

    if args.bind:
        cfg = replace(cfg, bind=args.bind)
    manifest = load_manifest(args.manifest)
    serve_annotation_api(manifest, cfg)
    return EXIT_OK


_COMMANDS = {
    "skeleton": _cmd_skeleton,
    "sta": _cmd_sta,
    "light": _cmd_light,
    "shadow": _cmd_shadow,
    "eval": _cmd_eval,
    "validate-k": _cmd_validate_k,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except ShadowToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
