"""Readers and writers for the KITTI odometry ecosystem.

Velodyne scans are headerless little-endian float32 quadruples (x, y, z,
intensity); per-point labels are little-endian 32-bit words whose low 16
bits carry the semantic class and high 16 bits the instance id.  Written
label files reuse the instance encoding so downstream tooling can open them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml


class DataFormatError(Exception):
    """Raised for malformed or truncated data files."""


@dataclass
class FrameRecord:
    """One scan plus optional ground-truth labels."""

    points: np.ndarray
    semantic: np.ndarray | None = None
    instance: np.ndarray | None = None
    frame_id: int = 0


def read_velodyne_bin(path) -> np.ndarray:
    """Read a scan file into an (N, 3) float32 xyz array (intensity dropped)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    if len(raw) % 16 != 0:
        raise DataFormatError(
            f"{path}: size {len(raw)} is not a multiple of 16 bytes; "
            f"trailing fragment starts at byte offset {len(raw) - len(raw) % 16}")
    if len(raw) == 0:
        warnings.warn(f"{path}: empty scan file", stacklevel=2)
        return np.empty((0, 3), dtype=np.float32)
    pts = np.frombuffer(raw, dtype="<f4").reshape(-1, 4)
    return np.ascontiguousarray(pts[:, :3])


def write_velodyne_bin(path, points, intensity=None):
    """Write an (N, 3) array in scan format; intensity defaults to zeros."""
    pts = np.asarray(points, dtype=np.float32)
    out = np.zeros((pts.shape[0], 4), dtype="<f4")
    out[:, :3] = pts
    if intensity is not None:
        out[:, 3] = intensity
    Path(path).write_bytes(out.tobytes())


def read_semantickitti_label(path, expected_count: int | None = None):
    """Read per-point labels; returns (semantic, instance) int32 arrays."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    if len(raw) % 4 != 0:
        raise DataFormatError(
            f"{path}: size {len(raw)} is not a multiple of 4 bytes; "
            f"trailing fragment starts at byte offset {len(raw) - len(raw) % 4}")
    words = np.frombuffer(raw, dtype="<u4")
    if expected_count is not None and words.size != expected_count:
        raise DataFormatError(
            f"{path}: {words.size} labels for {expected_count} points")
    semantic = (words & 0xFFFF).astype(np.int32)
    instance = (words >> 16).astype(np.int32)
    return semantic, instance


def write_instance_labels(path, labels):
    """Write per-point cluster labels in the instance (high 16 bit) encoding."""
    lab = np.asarray(labels)
    if lab.min(initial=0) < 0 or lab.max(initial=0) >= 1 << 16:
        raise ValueError("instance labels must fit in 16 bits")
    words = (lab.astype("<u4") << np.uint32(16))
    Path(path).write_bytes(words.tobytes())


def read_instance_labels(path, expected_count: int | None = None) -> np.ndarray:
    _, instance = read_semantickitti_label(path, expected_count)
    return instance


# ----------------------------------------------------------------------
# colored cloud export
# ----------------------------------------------------------------------

_BACKGROUND_RGB = (128, 128, 128)


def label_color(label: int):
    """Deterministic RGB for a cluster label; background is gray."""
    if label == 0:
        return _BACKGROUND_RGB
    # splitmix-style integer mix so colors are stable across runs/platforms
    mask = (1 << 64) - 1
    x = (int(label) * 0x9E3779B97F4A7C15) & mask
    x ^= x >> 31
    x = (x * 0xBF58476D1CE4E5B9) & mask
    x ^= x >> 27
    r, g, b = x & 0xFF, (x >> 8) & 0xFF, (x >> 16) & 0xFF
    # keep colors away from the background gray and from near-black
    return (64 + r * 3 // 4, 64 + g * 3 // 4, 64 + b * 3 // 4)


def write_colored_ply(path, points, labels):
    """Write a binary little-endian PLY with one color per cluster."""
    pts = np.asarray(points, dtype=np.float32)
    lab = np.asarray(labels)
    if pts.shape[0] != lab.shape[0]:
        raise ValueError(f"{pts.shape[0]} points but {lab.shape[0]} labels")
    unique = np.unique(lab)
    palette = {int(l): label_color(int(l)) for l in unique}
    colors = np.zeros((pts.shape[0], 3), dtype=np.uint8)
    for l, rgb in palette.items():
        colors[lab == l] = rgb
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {pts.shape[0]}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "end_header\n"
    )
    rec = np.zeros(pts.shape[0], dtype=[("xyz", "<f4", 3), ("rgb", "u1", 3)])
    rec["xyz"] = pts
    rec["rgb"] = colors
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(rec.tobytes())


# ----------------------------------------------------------------------
# dataset layout helpers
# ----------------------------------------------------------------------

def ground_class_ids(config_path=None):
    """Semantic class ids treated as ground in ground-truth mode.

    The ids live in a data file so other label taxonomies can be swapped in
    without code changes.
    """
    if config_path is None:
        ref = resources.files("rangeseg.data").joinpath("semantickitti.yaml")
        cfg = yaml.safe_load(ref.read_text())
    else:
        cfg = yaml.safe_load(Path(config_path).read_text())
    return frozenset(int(v) for v in cfg["ground_class_ids"])


def sequence_dir(dataset_dir, sequence) -> Path:
    return Path(dataset_dir) / "sequences" / f"{int(sequence):02d}"


def frame_paths(dataset_dir, sequence):
    """Sorted (scan, label) path pairs of one sequence; labels may be None."""
    seq = sequence_dir(dataset_dir, sequence)
    velo = seq / "velodyne"
    if not velo.is_dir():
        raise DataFormatError(f"no velodyne directory under {seq}")
    pairs = []
    for bin_path in sorted(velo.glob("*.bin")):
        label_path = seq / "labels" / (bin_path.stem + ".label")
        pairs.append((bin_path, label_path if label_path.exists() else None))
    return pairs


def load_frame(bin_path, label_path=None, frame_id: int = 0) -> FrameRecord:
    points = read_velodyne_bin(bin_path)
    semantic = instance = None
    if label_path is not None:
        semantic, instance = read_semantickitti_label(label_path, points.shape[0])
    return FrameRecord(points=points, semantic=semantic, instance=instance,
                       frame_id=frame_id)
