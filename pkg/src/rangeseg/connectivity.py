"""Distance-threshold connectivity between neighbouring returns.

The Euclidean distance between two returns follows from their two ranges and
the known angle between the beams, so it never requires reconstructing
Cartesian points.  All comparisons happen in squared space against the
squared threshold; no square root is taken anywhere on the per-frame path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ground import GroundMask
from .range_image import RangeImage
from .sensor import SensorModel


@dataclass
class DistanceThreshold:
    """Maximum inter-return distance for two returns to stay connected."""

    d_max: float = 0.8
    d_max_sq: float = field(init=False)

    def __post_init__(self):
        if not (self.d_max > 0):
            raise ValueError(f"d_max must be > 0, got {self.d_max}")
        self.d_max_sq = self.d_max * self.d_max


@dataclass
class ConnectivityImages:
    """Binary neighbour-connection masks.

    ``horizontal[r, c]`` links cells (r, c) and (r, (c+1) mod W); the last
    column is the seam between the final azimuth step and column 0.
    ``vertical[r, c]`` links cells (r, c) and (r+1, c).
    """

    horizontal: np.ndarray
    vertical: np.ndarray


def pair_distance_sq(d1, d2, two_cos_a):
    """Squared Euclidean distance between two returns.

    ``two_cos_a`` is the precomputed ``2 cos`` of the angle between the two
    beams.  Small negative results from rounding are clamped to zero.
    Scalars and arrays broadcast alike.
    """
    out = d1 * d1 + d2 * d2 - two_cos_a * (d1 * d2)
    return np.maximum(out, 0.0, out=out) if isinstance(out, np.ndarray) else max(out, 0.0)


def max_connectable_range(d_max: float, alpha: float) -> float:
    """Largest range at which two equidistant returns `alpha` radians apart
    still fall within `d_max` of each other (chord geometry)."""
    return d_max / (2.0 * math.sin(alpha / 2.0))


def build_connectivity(ri: RangeImage, gm: GroundMask, model: SensorModel,
                       thr: DistanceThreshold | None = None) -> ConnectivityImages:
    """Threshold every direct horizontal and vertical neighbour pair.

    Ground-masked and no-return cells never connect.  Horizontal
    connectivity wraps across the azimuth seam because a rotating scanner is
    physically continuous there.
    """
    if thr is None:
        thr = DistanceThreshold()
    ranges = ri.ranges
    dtype = ranges.dtype
    valid = (ranges > 0) & ~gm.mask
    d_max_sq = np.asarray(thr.d_max_sq, dtype=dtype)

    H, W = ranges.shape
    if W > 1:
        right = np.roll(ranges, -1, axis=1)
        two_cos_h = model.pair_constant(0, 1).astype(dtype)
        dist_h = pair_distance_sq(ranges, right, two_cos_h)
        horizontal = (dist_h <= d_max_sq) & valid & np.roll(valid, -1, axis=1)
    else:
        horizontal = np.zeros((H, W), dtype=bool)

    two_cos_v = model.pair_constant(1, 0).astype(dtype)
    dist_v = pair_distance_sq(ranges[:-1], ranges[1:], two_cos_v)
    vertical = (dist_v <= d_max_sq) & valid[:-1] & valid[1:]

    return ConnectivityImages(horizontal=horizontal, vertical=vertical)
