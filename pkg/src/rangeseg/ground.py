"""Ground-plane removal on the range image.

Each cell is compared with the cell above it: the two returns span a small
surface patch, and the patch is ground when its slope relative to the
horizontal stays within a tolerance angle and the patch sits low enough.
The slope test runs entirely on tangents against per-row precomputed bounds,
so the per-cell work is one division, one subtraction, two multiplications
and two comparisons; no inverse trig appears on the hot path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .range_image import RangeImage
from .sensor import SensorModel

# Denominators this close to zero mean the spanned surface runs parallel to
# the reference beam; report a vertical tangent instead of dividing.
_DEN_EPS = 1e-12


@dataclass
class GroundParams:
    """Tuning for the ground test.

    theta_deg: slope tolerance around horizontal, degrees.
    keep_above_z: ground-frame height above which horizontal surfaces (car
        roofs, hoods) are retained.  None means one meter below the sensor,
        i.e. ``mount_height - 1.0``.
    """

    theta_deg: float = 10.0
    keep_above_z: float | None = None

    def __post_init__(self):
        if not (0.0 < self.theta_deg < 90.0):
            raise ValueError(f"theta_deg must be in (0, 90), got {self.theta_deg}")
        if self.keep_above_z is not None and not math.isfinite(self.keep_above_z):
            raise ValueError("keep_above_z must be finite")

    def resolve_keep_above(self, model: SensorModel) -> float:
        if self.keep_above_z is not None:
            return float(self.keep_above_z)
        return model.mount_height - 1.0


@dataclass
class GroundMask:
    """Boolean (H, W) mask; True marks ground or invalid (no-return) cells."""

    mask: np.ndarray


def surface_tangent(d1, d2, sin_a, cos_a):
    """Tangent of the spanned surface in the frame of the upper beam.

    ``d1`` is the range above, ``d2`` the selected cell's range, and
    ``sin_a``/``cos_a`` belong to the angle between the two beams.  Scalars
    and arrays broadcast alike.  A denominator within +-1e-12 of zero yields
    a signed infinity (the surface runs parallel to the upper beam).
    """
    d1 = np.asarray(d1)
    num = d2 * sin_a
    den = d1 - d2 * cos_a
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(np.abs(den) < _DEN_EPS,
                     np.copysign(np.inf, den) * np.sign(num),
                     num / den)
    return t if t.ndim else t[()]


def ground_bounds(model: SensorModel, theta_deg: float):
    """Per-pair tangent window that brackets horizontal surfaces.

    The tangent from `surface_tangent` is measured in the upper beam's frame;
    rotating the +-theta_deg window around horizontal into that frame gives,
    for each vertical pair, a [low, high] interval that depends only on the
    upper channel's elevation.  Returns two (H-1,) float arrays.
    """
    theta = math.radians(theta_deg)
    delta_u = model.channel_angles[:-1]
    descending = model.channel_angles[0] > model.channel_angles[-1]
    center = -delta_u if descending else delta_u
    if np.any(np.abs(center) + theta >= math.pi / 2 - 1e-6):
        raise ValueError(
            "slope tolerance plus channel elevation reaches 90 degrees; "
            "the tangent comparison is undefined there")
    return np.tan(center - theta), np.tan(center + theta)


def extract_ground(ri: RangeImage, height: np.ndarray, model: SensorModel,
                   params: GroundParams | None = None) -> GroundMask:
    """Mark ground and invalid cells of a frame.

    A cell is ground when it has a return, the patch spanned with the cell
    above is within the slope tolerance, and its ground-frame height does not
    exceed ``keep_above_z``.  Cells without a return are always masked.  The
    top row, which has no row above, reuses the decision of the pair below
    it.  Cells whose upper neighbour has no return are kept.
    """
    if params is None:
        params = GroundParams()
    ranges = ri.ranges
    if ranges.shape != (model.height, model.width):
        raise ValueError(f"range image {ranges.shape} does not match model "
                         f"{(model.height, model.width)}")
    valid = ranges > 0
    dtype = ranges.dtype

    sin_a = model.sin_vertical.astype(dtype)[:, None]
    cos_a = model.cos_vertical.astype(dtype)[:, None]
    d1 = ranges[:-1]
    d2 = ranges[1:]
    num = d2 * sin_a
    den = d1 - d2 * cos_a
    lo, hi = ground_bounds(model, params.theta_deg)
    lo = lo.astype(dtype)[:, None]
    hi = hi.astype(dtype)[:, None]

    # Compare num/den against [lo, hi] without dividing: multiply through by
    # den, flipping the interval where den < 0.  Zero denominators fail both.
    pos = den > 0
    ok_pos = (num >= lo * den) & (num <= hi * den)
    ok_neg = (num <= lo * den) & (num >= hi * den)
    pair_ok = np.where(pos, ok_pos, ok_neg) & (den != 0)
    pair_ok &= valid[:-1] & valid[1:]

    slope_ok = np.empty_like(valid)
    slope_ok[1:] = pair_ok
    slope_ok[0] = pair_ok[0]

    keep_above = np.asarray(params.resolve_keep_above(model), dtype=dtype)
    with np.errstate(invalid="ignore"):
        low_enough = height <= keep_above

    mask = ~valid | (slope_ok & low_enough)
    return GroundMask(mask=mask)
