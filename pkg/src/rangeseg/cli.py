"""Command line front end.

Subcommands: ``segment`` one scan, ``evaluate`` a labelled dataset, ``bench``
throughput, ``synth`` synthetic fixtures.  All flags can also be supplied
via ``--config file.yaml``; explicit flags win.  Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import synthetic
from .connectivity import DistanceThreshold
from .evaluation import EvalConfig, format_table, report_as_dict
from .ground import GroundParams
from .io_formats import (DataFormatError, read_velodyne_bin, write_colored_ply,
                         write_instance_labels, write_velodyne_bin)
from .map_connections import parse_offsets, preset_pattern
from .pipeline import Pipeline, PipelineConfig, bench_run, evaluate_dataset
from .sensor import SensorConfigError, load_sensor_model
from .synthetic import make_scene, random_box_frames, scene_names, to_point_cloud

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_pipeline_flags(p):
    p.add_argument("--sensor", help="sensor config YAML (default: built-in 64-beam)")
    p.add_argument("--ground-theta-deg", type=float, default=10.0,
                   help="ground slope tolerance, degrees (default 10)")
    p.add_argument("--keep-above-z", type=float, default=None,
                   help="ground-frame height above which horizontal surfaces "
                        "are kept (default: 1 m below the sensor)")
    p.add_argument("--no-ground-removal", action="store_true",
                   help="skip the ground stage (e.g. pre-cleaned clouds)")
    p.add_argument("--distance-threshold-m", type=float, default=0.8,
                   help="max distance between connected returns (default 0.8)")
    p.add_argument("--min-cluster-points", type=int, default=100,
                   help="smallest surviving cluster (default 100)")
    p.add_argument("--mc-preset", choices=["none", "mc1", "mc6", "mc14"],
                   default="none", help="connection-map preset (default none)")
    p.add_argument("--mc-offsets",
                   help='explicit offsets like "0,2;2,0" (overrides preset)')
    p.add_argument("--config", help="YAML file supplying any of these flags")


def _load_model(args):
    if getattr(args, "sensor", None):
        return load_sensor_model(args.sensor)
    from importlib import resources
    ref = resources.files("rangeseg.data").joinpath("hdl64_uniform.yaml")
    return load_sensor_model(yaml.safe_load(ref.read_text()))


def _pipeline_config(args) -> PipelineConfig:
    if args.mc_offsets:
        pattern = parse_offsets(args.mc_offsets)
    else:
        pattern = preset_pattern(args.mc_preset)
    return PipelineConfig(
        ground=GroundParams(theta_deg=args.ground_theta_deg,
                            keep_above_z=args.keep_above_z),
        threshold=DistanceThreshold(d_max=args.distance_threshold_m),
        mc_pattern=pattern,
        min_cluster_points=args.min_cluster_points,
        ground_removal=not args.no_ground_removal,
    )


def _apply_config_file(parser, argv):
    """Pre-scan for --config and install its values as parser defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = yaml.safe_load(Path(known.config).read_text())
    except OSError as exc:
        raise DataFormatError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise DataFormatError(f"{known.config}: config must be a mapping")
    parser.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def _cmd_segment(args):
    model = _load_model(args)
    pipeline = Pipeline(model, _pipeline_config(args))
    points = read_velodyne_bin(args.input)
    out, rec = pipeline.segment_cloud(points)
    write_instance_labels(args.output, out.point_labels)
    print(f"{args.input}: {points.shape[0]} points -> "
          f"{out.label_image.cluster_count} clusters in {rec.total:.2f} ms")
    if args.ply:
        write_colored_ply(args.ply, points, out.point_labels)
        print(f"wrote {args.ply}")
    return 0


def _cmd_evaluate(args):
    model = _load_model(args)
    eval_cfg = EvalConfig(ground_mode="gt_ground_removed"
                          if args.ground_mode == "gt" else "algorithmic_ground")
    report, n_frames = evaluate_dataset(
        args.dataset, _parse_sequences(args.sequences), model,
        config=_pipeline_config(args), eval_cfg=eval_cfg,
        max_frames=args.max_frames)
    name = args.mc_preset if not args.mc_offsets else "custom"
    print(f"{n_frames} frames, {report.n_instances} instances "
          f"({args.ground_mode} ground)")
    print(format_table([(name, report)]))
    if args.report:
        Path(args.report).write_text(json.dumps(report_as_dict(report), indent=2))
        print(f"wrote {args.report}")
    return 0


def _cmd_bench(args):
    model = _load_model(args) if args.dataset else synthetic.bench_model()
    pipeline = Pipeline(model, _pipeline_config(args))
    if args.dataset:
        from .io_formats import frame_paths
        from .range_image import project
        frames = []
        for seq in _parse_sequences(args.sequences):
            for bin_path, _ in frame_paths(args.dataset, seq)[:args.frames]:
                frames.append(project(read_velodyne_bin(bin_path), model))
    else:
        frames = random_box_frames(model, args.frames, seed=args.seed)
    summary = bench_run(frames, pipeline, repetitions=args.repetitions,
                        inter_frame_pause_s=args.pace_ms / 1e3)
    stats = summary.stat()
    if not stats:
        print("no frames timed")
        return 0
    robust = summary.per_frame_stat()
    print(f"{stats['frames']} frames: {stats['hz_mean']:.1f} Hz mean "
          f"({stats['mean_ms']:.2f} ms; median {stats['median_ms']:.2f}, "
          f"p99 {stats['p99_ms']:.2f}, p99/median {stats['p99_over_median']:.2f})")
    print(f"per-frame best of {args.repetitions}: {robust['hz_mean']:.1f} Hz "
          f"mean, p99/median {robust['p99_over_median']:.2f}")
    per_stage = ", ".join(f"{s} {stats[s + '_ms']:.2f}" for s in
                          ("ground", "connectivity", "ccl", "mc", "filter"))
    print(f"stage means (ms): {per_stage}")
    if args.report:
        stats["per_frame_best"] = robust
        Path(args.report).write_text(json.dumps(stats, indent=2))
        print(f"wrote {args.report}")
    return 0


def _cmd_synth(args):
    model, ranges, golden = make_scene(args.scene)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    points, point_golden = to_point_cloud(ranges, model, golden)
    write_velodyne_bin(out / "cloud.bin", points)
    write_instance_labels(out / "golden.label", point_golden)
    model.save(out / "sensor.yaml")
    meta = {
        "scene": args.scene,
        "points": int(points.shape[0]),
        "instances": sorted(int(v) for v in np.unique(golden) if v != 0),
        "image_shape": [int(s) for s in ranges.shape],
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    if args.ply:
        write_colored_ply(out / "scene.ply", points, point_golden)
    print(f"wrote {args.scene} fixture to {out} ({points.shape[0]} points)")
    return 0


def _parse_sequences(text: str):
    """Accept "00-10", "3", or "00,04,10"."""
    seqs = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-")
            seqs.extend(range(int(a), int(b) + 1))
        elif part:
            seqs.append(int(part))
    return seqs


def build_parser() -> _Parser:
    parser = _Parser(prog="range-seg",
                     description="Range-image lidar instance segmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[], help="segment one scan file")
    p.add_argument("input", help="velodyne .bin scan")
    p.add_argument("-o", "--output", required=True, help="output .label path")
    p.add_argument("--ply", help="also write a colored .ply cloud")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("evaluate", help="score against ground-truth labels")
    p.add_argument("--dataset", required=True, help="dataset root (sequences/..)")
    p.add_argument("--sequences", default="00-10", help='e.g. "00-10" or "4,5"')
    p.add_argument("--ground-mode", choices=["gt", "algo"], default="gt")
    p.add_argument("--max-frames", type=int, default=None)
    p.add_argument("--report", help="write metrics JSON here")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("bench", help="measure per-frame throughput")
    p.add_argument("--dataset", help="time real scans instead of synthetic ones")
    p.add_argument("--sequences", default="0")
    p.add_argument("--frames", type=int, default=50, help="frame count")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--pace-ms", type=float, default=2.0,
                   help="pause between frames, ms (0 = saturated burst)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="write timing JSON here")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("synth", help="write a synthetic scene fixture")
    p.add_argument("scene", choices=list(scene_names()))
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--ply", action="store_true", help="also write scene.ply")
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (DataFormatError, OSError) as exc:
        print(f"range-seg: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (SensorConfigError, ValueError) as exc:
        print(f"range-seg: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
