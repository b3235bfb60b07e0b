"""Synthetic scene fixtures rendered by ray casting.

Scenes are built from an optional ground plane and axis-aligned boxes, cast
against a sensor model beam by beam.  Every scene comes with golden per-cell
instance labels (0 for ground/background), which makes the fixtures usable
as segmentation oracles and benchmark corpora.

The stock scenes are designed for `fixture_model()`, whose channels all
point below the horizon so that an infinite ground plane returns on every
row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sensor import SensorModel, uniform_model

_SCENE_NAMES = ("plane", "wall", "elevated", "boxes", "occluder")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in the ground frame with an instance id."""

    lo: tuple
    hi: tuple
    instance: int


def fixture_model(width: int | None = None) -> SensorModel:
    """64 downward channels, 0.4 deg apart, 0.09 deg azimuth step."""
    return uniform_model(64, top_deg=-2.0, step_deg=0.4,
                         azimuth_step_deg=0.09, mount_height_m=1.73,
                         width=width)


def bench_model() -> SensorModel:
    """64 x 2000 variant of the fixture geometry for throughput runs."""
    return uniform_model(64, top_deg=-2.0, step_deg=0.4,
                         azimuth_step_deg=0.18, mount_height_m=1.73)


def beam_directions(model: SensorModel) -> np.ndarray:
    """Unit beam direction per cell, (H, W, 3); azimuths at column centers."""
    phi = (np.arange(model.width) + 0.5) * model.azimuth_step
    cos_d = model.cos_channel[:, None]
    sin_d = model.sin_channel[:, None]
    dirs = np.empty((model.height, model.width, 3))
    dirs[:, :, 0] = cos_d * np.cos(phi)[None, :]
    dirs[:, :, 1] = cos_d * np.sin(phi)[None, :]
    dirs[:, :, 2] = np.broadcast_to(sin_d, (model.height, model.width))
    return dirs


def render(model: SensorModel, boxes=(), ground_z: float | None = None,
           ground_instance: int = 0):
    """Cast every beam against the scene.

    Returns ``(ranges, golden)``: float32 ranges with 0 for misses, and
    int32 instance ids of the nearest hit surface.
    """
    dirs = beam_directions(model)
    origin = np.array([0.0, 0.0, model.mount_height])
    t_best = np.full(dirs.shape[:2], np.inf)
    golden = np.zeros(dirs.shape[:2], dtype=np.int32)

    if ground_z is not None:
        dz = dirs[:, :, 2]
        with np.errstate(divide="ignore"):
            t = np.where(dz < 0, (ground_z - origin[2]) / dz, np.inf)
        hit = t < t_best
        t_best[hit] = t[hit]
        golden[hit] = ground_instance

    safe = lambda d: np.where(d == 0.0, 1e-300, d)
    for box in boxes:
        t_near = np.full(dirs.shape[:2], -np.inf)
        t_far = np.full(dirs.shape[:2], np.inf)
        for axis in range(3):
            inv = 1.0 / safe(dirs[:, :, axis])
            t1 = (box.lo[axis] - origin[axis]) * inv
            t2 = (box.hi[axis] - origin[axis]) * inv
            np.maximum(t_near, np.minimum(t1, t2), out=t_near)
            np.minimum(t_far, np.maximum(t1, t2), out=t_far)
        t = np.where((t_near <= t_far) & (t_near > 1e-9), t_near, np.inf)
        hit = t < t_best
        t_best[hit] = t[hit]
        golden[hit] = box.instance

    ranges = np.where(np.isfinite(t_best), t_best, 0.0).astype(np.float32)
    golden[ranges == 0] = 0
    return ranges, golden


def to_point_cloud(ranges: np.ndarray, model: SensorModel,
                   golden: np.ndarray | None = None):
    """Turn a rendered frame into a sensor-frame cloud.

    Returns ``(points, point_golden)``; ``point_golden`` is None when no
    golden image is given.  Points are emitted in scan order of the valid
    cells, so re-projection reproduces the frame exactly.
    """
    dirs = beam_directions(model)
    r, c = np.nonzero(ranges > 0)
    points = dirs[r, c] * ranges[r, c, None].astype(np.float64)
    if golden is None:
        return points, None
    return points, golden[r, c].copy()


# ----------------------------------------------------------------------
# stock scenes
# ----------------------------------------------------------------------

def flat_plane_scene(model: SensorModel):
    return render(model, ground_z=0.0)


def vertical_wall_scene(model: SensorModel, distance: float = 10.0):
    wall = Box(lo=(distance, -8.0, 0.0), hi=(distance + 0.4, 8.0, 4.0),
               instance=1)
    return render(model, boxes=[wall])


def elevated_plane_scene(model: SensorModel, z: float = 0.5):
    return render(model, ground_z=z)


def two_box_scene(model: SensorModel, occlusion_gap: bool = False):
    """Two floating boxes over an infinite ground plane.

    Box 1 faces the sensor straight ahead and straddles the azimuth seam;
    box 2 sits off to the side.  With ``occlusion_gap`` one interior scan row
    of box 2 is dropped (no return), splitting it into two fragments that a
    (2, 0) connection map can bridge.
    """
    box_a = Box(lo=(8.0, -1.1, 0.7), hi=(9.8, 1.1, 3.0), instance=1)
    box_b = Box(lo=(8.83, 4.8, 0.5), hi=(10.23, 6.2, 3.0), instance=2)
    ranges, golden = render(model, boxes=[box_a, box_b], ground_z=0.0)
    if occlusion_gap:
        rows = np.unique(np.nonzero(golden == 2)[0])
        gap_row = int(rows[len(rows) // 2])
        cells = golden[gap_row] == 2
        ranges[gap_row, cells] = 0.0
        golden[gap_row, cells] = 0
    return ranges, golden


def make_scene(name: str, model: SensorModel | None = None):
    """Render a named stock scene; returns ``(model, ranges, golden)``."""
    if model is None:
        model = fixture_model()
    if name == "plane":
        ranges, golden = flat_plane_scene(model)
    elif name == "wall":
        ranges, golden = vertical_wall_scene(model)
    elif name == "elevated":
        ranges, golden = elevated_plane_scene(model)
    elif name == "boxes":
        ranges, golden = two_box_scene(model, occlusion_gap=False)
    elif name == "occluder":
        ranges, golden = two_box_scene(model, occlusion_gap=True)
    else:
        raise ValueError(f"unknown scene {name!r}; choose from {_SCENE_NAMES}")
    return model, ranges, golden


def scene_names():
    return _SCENE_NAMES


def random_box_frames(model: SensorModel, n_frames: int, seed: int = 0,
                      boxes_per_frame: int = 8):
    """Benchmark corpus: frames of randomly placed boxes over ground."""
    rng = np.random.default_rng(seed)
    frames = []
    for _ in range(n_frames):
        boxes = []
        for i in range(boxes_per_frame):
            az = rng.uniform(0, 2 * np.pi)
            dist = rng.uniform(6.0, 40.0)
            cx, cy = dist * np.cos(az), dist * np.sin(az)
            sx, sy = rng.uniform(0.8, 3.0, size=2)
            z0 = rng.uniform(0.4, 0.8)
            z1 = z0 + rng.uniform(1.0, 2.5)
            boxes.append(Box(lo=(cx - sx, cy - sy, z0),
                             hi=(cx + sx, cy + sy, z1), instance=i + 1))
        ranges, _ = render(model, boxes=boxes, ground_z=0.0)
        frames.append(ranges)
    return frames
