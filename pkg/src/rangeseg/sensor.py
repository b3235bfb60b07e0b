"""Scanner geometry model.

Holds the per-channel elevation angles, the azimuth step, and every
trigonometric constant the processing stages consume, so that the per-frame
hot path never calls a trig function.  Geometry is immutable after
construction; the pair-constant table is an append-only cache that
pipelines prime up front, so sharing a model across concurrent pipelines
is safe.

Angle conventions: degrees in config files, radians in memory.  Row 0 of the
range image is the top channel; `channel_angles` must be strictly monotonic
top to bottom.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import yaml

TWO_PI = 2.0 * math.pi

# Slack on the full-revolution check, radians.
_REVOLUTION_EPS = 1e-6


class SensorConfigError(ValueError):
    """Raised for inconsistent or incomplete sensor descriptions."""


def canonical_offset(offset):
    """Normalize a (dy, dx) cell offset so dy > 0, or dy == 0 and dx > 0.

    The pair set generated by (dy, dx) over a wrapped image is identical to
    the one generated by (-dy, -dx), so one representative is enough.
    """
    dy, dx = int(offset[0]), int(offset[1])
    if dy == 0 and dx == 0:
        raise ValueError("offset (0, 0) would pair a cell with itself")
    if dy < 0 or (dy == 0 and dx < 0):
        dy, dx = -dy, -dx
    return dy, dx


class SensorModel:
    """Immutable description of a rotating multi-beam scanner.

    Parameters
    ----------
    channel_angles_deg : sequence of float
        Per-row elevation angles in degrees, top row first, strictly
        monotonic.  At least two channels are required; a single channel
        defines no vertical pair.
    azimuth_step_deg : float
        Horizontal angular resolution in degrees, uniform across columns.
    mount_height_m : float
        Height of the sensor origin above the wheel-contact plane.
    width : int, optional
        Number of azimuth columns.  Defaults to a full revolution,
        ``round(360 / azimuth_step_deg)``.
    """

    def __init__(self, channel_angles_deg, azimuth_step_deg, mount_height_m,
                 width=None):
        angles_deg = np.asarray(channel_angles_deg, dtype=np.float64)
        if angles_deg.ndim != 1 or angles_deg.size < 2:
            raise SensorConfigError(
                f"need at least 2 channel angles, got {angles_deg.size}")
        diffs = np.diff(angles_deg)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise SensorConfigError("channel angles must be strictly monotonic")
        if not np.isfinite(angles_deg).all():
            raise SensorConfigError("channel angles must be finite")
        step_deg = float(azimuth_step_deg)
        if not (step_deg > 0):
            raise SensorConfigError(f"azimuth step must be > 0, got {step_deg}")

        self.channel_angles_deg = angles_deg
        self.channel_angles = np.deg2rad(angles_deg)
        self.azimuth_step_deg = step_deg
        self.azimuth_step = math.radians(step_deg)
        self.mount_height = float(mount_height_m)
        if not math.isfinite(self.mount_height):
            raise SensorConfigError("mount height must be finite")

        if width is None:
            width = round(TWO_PI / self.azimuth_step)
        self.width = int(width)
        if self.width < 1:
            raise SensorConfigError(f"width must be >= 1, got {width}")
        if self.width * self.azimuth_step > TWO_PI + _REVOLUTION_EPS:
            raise SensorConfigError(
                f"width {self.width} x step {step_deg} deg exceeds a revolution")

        self.height = int(angles_deg.size)
        self.vertical_alpha = np.abs(np.diff(self.channel_angles))
        self.sin_channel = np.sin(self.channel_angles)
        self.cos_channel = np.cos(self.channel_angles)
        # Per vertical pair (r, r+1): sin/cos of the inter-beam angle.
        self.sin_vertical = np.sin(self.vertical_alpha)
        self.cos_vertical = np.cos(self.vertical_alpha)

        self.cos_tables = {}
        direct = [(1, 0)] if self.width == 1 else [(0, 1), (1, 0)]
        self.precompute_pair_constants(direct)

    # ------------------------------------------------------------------
    # pair constants
    # ------------------------------------------------------------------

    def combined_angle(self, dy, dx):
        """Angle between the beams of cells (r, c) and (r+dy, c+dx), radians.

        For pure-horizontal offsets this is the azimuth step multiple
        ``|dx| * azimuth_step``; otherwise it is the exact angle between the
        two beam unit vectors, which depends on the row but not the column.
        Returns an array of shape (H - dy,) for dy > 0, or a 0-d array.
        """
        dy, dx = canonical_offset((dy, dx))
        self._check_offset_bounds(dy, dx)
        if dy == 0:
            return np.asarray(abs(dx) * self.azimuth_step, dtype=np.float64)
        cos_az = math.cos(abs(dx) * self.azimuth_step)
        cos_gamma = (self.sin_channel[:-dy] * self.sin_channel[dy:]
                     + self.cos_channel[:-dy] * self.cos_channel[dy:] * cos_az)
        return np.arccos(np.clip(cos_gamma, -1.0, 1.0))

    def pair_constant(self, dy, dx):
        """Precomputed ``2 cos(combined angle)`` for a cell offset.

        Shape (1, 1) for horizontal offsets, (H - dy, 1) otherwise, ready to
        broadcast against row-sliced range images.
        """
        key = canonical_offset((dy, dx))
        table = self.cos_tables.get(key)
        if table is None:
            table = (2.0 * np.cos(self.combined_angle(*key))).reshape(-1, 1)
            self.cos_tables[key] = table
        return table

    def precompute_pair_constants(self, offsets):
        """Populate the constant table for every offset; returns the model."""
        if not offsets:
            raise ValueError("offsets must be nonempty")
        for offset in offsets:
            self.pair_constant(*offset)
        return self

    def _check_offset_bounds(self, dy, dx):
        if abs(dy) >= self.height or abs(dx) >= self.width:
            raise ValueError(
                f"offset ({dy}, {dx}) exceeds image bounds "
                f"{self.height}x{self.width}")

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------

    def to_dict(self):
        return {
            "channels": self.height,
            "vertical_angles": [float(a) for a in self.channel_angles_deg],
            "azimuth_step_deg": self.azimuth_step_deg,
            "mount_height_m": self.mount_height,
            "width": self.width,
        }

    def save(self, path):
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False))

    def __repr__(self):
        return (f"SensorModel({self.height}x{self.width}, "
                f"step={self.azimuth_step_deg:.4g} deg, "
                f"mount={self.mount_height:.3g} m)")


def uniform_model(channels, top_deg, step_deg, azimuth_step_deg,
                  mount_height_m, width=None):
    """Build a model with evenly spaced channels starting at `top_deg`.

    `step_deg` is the (positive) spacing between consecutive channels going
    downward.
    """
    if channels < 2:
        raise SensorConfigError("need at least 2 channels")
    if step_deg <= 0:
        raise SensorConfigError("channel spacing must be > 0")
    angles = top_deg - step_deg * np.arange(channels, dtype=np.float64)
    return SensorModel(angles, azimuth_step_deg, mount_height_m, width=width)


def load_sensor_model(source):
    """Load a SensorModel from a YAML file, YAML text, or a mapping.

    Recognized keys: ``channels``, ``vertical_angles`` (list, degrees) or
    ``vertical_fov`` (pair [top, bottom], degrees), ``azimuth_step_deg``,
    ``mount_height_m``, optional ``width``.
    """
    if isinstance(source, dict):
        cfg = source
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        cfg = yaml.safe_load(text)
    if not isinstance(cfg, dict):
        raise SensorConfigError("sensor config must be a mapping")

    try:
        channels = int(cfg["channels"])
        azimuth_step_deg = float(cfg["azimuth_step_deg"])
        mount = float(cfg["mount_height_m"])
    except KeyError as exc:
        raise SensorConfigError(f"missing sensor config key: {exc}") from exc

    width = cfg.get("width")
    if "vertical_angles" in cfg:
        angles = np.asarray(cfg["vertical_angles"], dtype=np.float64)
        if angles.size != channels:
            raise SensorConfigError(
                f"channels={channels} but {angles.size} vertical_angles given")
        return SensorModel(angles, azimuth_step_deg, mount, width=width)
    if "vertical_fov" in cfg:
        top, bottom = (float(v) for v in cfg["vertical_fov"])
        angles = np.linspace(top, bottom, channels)
        return SensorModel(angles, azimuth_step_deg, mount, width=width)
    raise SensorConfigError("config needs vertical_angles or vertical_fov")


def default_model():
    """64-channel model with uniform 0.4 deg spacing from +2 deg down.

    The uniform 0.4 deg vertical spacing matches the resolution implied by
    the 0.8 m threshold reaching 114.59 m on vertical surfaces; real 64-beam
    units have non-uniform spacing, which `load_sensor_model` supports via
    explicit angle tables.
    """
    return uniform_model(64, top_deg=2.0, step_deg=0.4, azimuth_step_deg=0.09,
                         mount_height_m=1.73)
