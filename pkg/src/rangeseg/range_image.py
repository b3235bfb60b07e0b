"""Spherical projection between point clouds and dense range images.

A range image is an (H, W) float32 grid of distances in meters with 0 marking
cells without a return.  When an image is built by projecting a cloud, the
per-cell index of the winning source point is kept so instance labels can be
carried back to the points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sensor import SensorModel


@dataclass
class RangeImage:
    """Dense range grid plus back-projection bookkeeping.

    ``point_index`` is None for natively image-shaped data; otherwise it
    holds the source-point index that filled each cell (-1 where empty).
    """

    ranges: np.ndarray
    point_index: np.ndarray | None = None
    n_points: int = 0
    n_dropped: int = 0
    n_overwritten: int = 0

    @property
    def shape(self):
        return self.ranges.shape

    @property
    def n_projected(self) -> int:
        """Number of points that won a cell."""
        if self.point_index is None:
            return int(np.count_nonzero(self.ranges))
        return int(np.count_nonzero(self.point_index >= 0))

    def valid_mask(self) -> np.ndarray:
        return self.ranges > 0


def from_ranges(ranges) -> RangeImage:
    """Wrap a natively image-shaped scan (no point provenance)."""
    ranges = np.ascontiguousarray(ranges, dtype=np.float32)
    if ranges.ndim != 2:
        raise ValueError(f"range image must be 2-D, got shape {ranges.shape}")
    if not np.isfinite(ranges).all() or (ranges < 0).any():
        raise ValueError("ranges must be finite and >= 0")
    return RangeImage(ranges=ranges)


def project(points, model: SensorModel) -> RangeImage:
    """Project a cloud of sensor-frame (x, y, z) points onto the range grid.

    Row is the nearest channel by elevation, column is
    ``floor(azimuth / azimuth_step) mod W`` with azimuth measured from the
    forward axis.  When several points fall into one cell the smallest range
    wins.  Points outside the vertical field of view (beyond half a channel
    gap past the extreme channels) are dropped and counted.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] < 3 or pts.shape[0] == 0:
        raise ValueError("expected a nonempty (N, 3) point array")
    pts = pts[:, :3]

    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    rng = np.sqrt(x * x + y * y + z * z)
    ok = rng > 0
    elev = np.zeros_like(rng)
    np.arcsin(np.clip(np.divide(z, rng, where=ok, out=np.zeros_like(rng)),
                      -1.0, 1.0), out=elev)

    # Nearest channel; channel_angles may run top-down in either direction.
    angles = model.channel_angles
    descending = angles[0] > angles[-1]
    asc = angles[::-1] if descending else angles
    pos = np.searchsorted(asc, elev)
    lo = np.clip(pos - 1, 0, asc.size - 1)
    hi = np.clip(pos, 0, asc.size - 1)
    nearest = np.where(np.abs(elev - asc[lo]) <= np.abs(asc[hi] - elev), lo, hi)

    # Vertical FOV gate: half the edge channel gap beyond the extremes.
    gap_lo = (asc[1] - asc[0]) / 2.0
    gap_hi = (asc[-1] - asc[-2]) / 2.0
    in_fov = ok & (elev >= asc[0] - gap_lo) & (elev <= asc[-1] + gap_hi)

    rows = (asc.size - 1 - nearest) if descending else nearest
    az = np.arctan2(y, x)
    az[az < 0] += 2.0 * np.pi
    cols = np.floor_divide(az, model.azimuth_step).astype(np.int64) % model.width

    n = pts.shape[0]
    keep = np.flatnonzero(in_fov)
    # Assign in decreasing range order so the nearest return lands last.
    order = keep[np.argsort(-rng[keep], kind="stable")]

    ranges = np.zeros((model.height, model.width), dtype=np.float32)
    point_index = np.full((model.height, model.width), -1, dtype=np.int64)
    ranges[rows[order], cols[order]] = rng[order].astype(np.float32)
    point_index[rows[order], cols[order]] = order

    n_in_fov = keep.size
    n_filled = int(np.count_nonzero(point_index >= 0))
    return RangeImage(
        ranges=ranges,
        point_index=point_index,
        n_points=n,
        n_dropped=n - n_in_fov,
        n_overwritten=n_in_fov - n_filled,
    )


def height_image(ri: RangeImage, model: SensorModel) -> np.ndarray:
    """Per-cell z above the wheel-contact plane; NaN where there is no return.

    z is reconstructed from the cell's range and its channel angle, then
    shifted from the sensor origin down to the ground frame by the mount
    height.
    """
    z = ri.ranges * model.sin_channel[:, None].astype(np.float32)
    z += np.float32(model.mount_height)
    return np.where(ri.ranges > 0, z, np.float32(np.nan)).astype(np.float32)


def labels_to_points(labels: np.ndarray, ri: RangeImage) -> np.ndarray:
    """Carry per-cell instance labels back to the source points.

    Points that were dropped at projection or lost a cell collision get the
    background label 0.
    """
    if ri.point_index is None:
        raise ValueError("range image has no point provenance to project back to")
    out = np.zeros(ri.n_points, dtype=np.int32)
    r, c = np.nonzero(ri.point_index >= 0)
    out[ri.point_index[r, c]] = labels[r, c]
    return out
