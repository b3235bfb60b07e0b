import math

import numpy as np
import pytest
import yaml

from rangeseg.sensor import (SensorConfigError, SensorModel, canonical_offset,
                             default_model, load_sensor_model, uniform_model)


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

def test_span_config_matches_hand_arithmetic():
    model = load_sensor_model({
        "channels": 64, "vertical_fov": [2.0, -24.8],
        "azimuth_step_deg": 0.09, "mount_height_m": 1.73,
    })
    assert model.width == 4000
    # 26.8 deg spread over 63 gaps
    expected = math.radians((2.0 + 24.8) / 63)
    assert np.allclose(model.vertical_alpha, expected)
    assert model.vertical_alpha.mean() == pytest.approx(math.radians(0.4254), abs=1e-6)


def test_single_channel_rejected():
    with pytest.raises(SensorConfigError):
        SensorModel([2.0], 0.09, 1.73)


def test_non_monotonic_angles_rejected():
    with pytest.raises(SensorConfigError):
        SensorModel([2.0, -1.0, -0.5], 0.09, 1.73)


def test_zero_azimuth_step_rejected():
    with pytest.raises(SensorConfigError):
        SensorModel([2.0, 1.0], 0.0, 1.73)


def test_channel_count_mismatch_rejected():
    with pytest.raises(SensorConfigError):
        load_sensor_model({"channels": 4, "vertical_angles": [2.0, 1.0, 0.0],
                           "azimuth_step_deg": 0.09, "mount_height_m": 1.73})


def test_width_beyond_revolution_rejected():
    with pytest.raises(SensorConfigError):
        SensorModel([2.0, 1.0], 1.0, 1.73, width=361)


def test_partial_revolution_allowed():
    model = SensorModel([2.0, 1.0], 1.0, 1.73, width=180)
    assert model.width == 180


# ---------------------------------------------------------------------------
# pair constants
# ---------------------------------------------------------------------------

def test_horizontal_step_constant_is_direct_cosine():
    model = default_model()
    expected = 2.0 * math.cos(math.radians(0.09))
    assert model.pair_constant(0, 1).item() == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(1.9999975326, abs=1e-9)


def test_step_multiple_constant():
    model = default_model()
    model.precompute_pair_constants([(0, 2)])
    expected = 2.0 * math.cos(math.radians(0.18))
    assert model.pair_constant(0, 2).item() == pytest.approx(expected, abs=1e-15)


def test_vertical_pair_constant_uniform_spacing():
    model = default_model()
    expected = 2.0 * math.cos(math.radians(0.4))
    got = model.pair_constant(1, 0)
    assert got.shape == (63, 1)
    assert np.allclose(got, expected, atol=1e-15)


def test_self_pair_rejected():
    with pytest.raises(ValueError):
        default_model().pair_constant(0, 0)


def test_offset_beyond_bounds_rejected():
    model = default_model()
    with pytest.raises(ValueError):
        model.pair_constant(64, 0)
    with pytest.raises(ValueError):
        model.pair_constant(0, 4000)


def test_diagonal_constant_matches_unit_vector_dot_product():
    model = uniform_model(8, top_deg=2.0, step_deg=3.0, azimuth_step_deg=1.0,
                          mount_height_m=1.0, width=360)
    dy, dx = 2, 3
    got = model.pair_constant(dy, dx).ravel()
    for r in range(8 - dy):
        da, db = model.channel_angles[r], model.channel_angles[r + dy]
        va = np.array([math.cos(da), 0.0, math.sin(da)])
        az = dx * model.azimuth_step
        vb = np.array([math.cos(db) * math.cos(az),
                       math.cos(db) * math.sin(az), math.sin(db)])
        assert got[r] == pytest.approx(2.0 * float(va @ vb), abs=1e-12)


def test_stored_constants_match_fresh_computation(rng):
    model = default_model()
    offsets = [(0, 1), (1, 0), (2, 2), (0, 5), (7, -3), (14, 14)]
    model.precompute_pair_constants(offsets)
    for off in offsets:
        fresh = 2.0 * np.cos(model.combined_angle(*off))
        stored = model.pair_constant(*off).ravel()
        assert np.all(np.abs(stored - np.atleast_1d(fresh)) < 1e-12)


def test_canonical_offset():
    assert canonical_offset((0, -3)) == (0, 3)
    assert canonical_offset((-2, 5)) == (2, -5)
    assert canonical_offset((1, -4)) == (1, -4)
    with pytest.raises(ValueError):
        canonical_offset((0, 0))


def test_negative_dx_shares_constant_with_positive():
    model = default_model()
    a = model.pair_constant(2, 3)
    b = model.pair_constant(2, -3)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_save_load_round_trip_bit_exact(tmp_path):
    model = load_sensor_model({
        "channels": 64, "vertical_fov": [2.0, -24.8],
        "azimuth_step_deg": 0.09, "mount_height_m": 1.73,
    })
    model.precompute_pair_constants([(2, 2), (0, 3)])
    path = tmp_path / "sensor.yaml"
    model.save(path)
    again = load_sensor_model(path)
    again.precompute_pair_constants([(2, 2), (0, 3)])
    assert np.array_equal(model.channel_angles, again.channel_angles)
    assert np.array_equal(model.vertical_alpha, again.vertical_alpha)
    assert model.azimuth_step == again.azimuth_step
    assert model.width == again.width
    for key in model.cos_tables:
        assert np.array_equal(model.cos_tables[key], again.cos_tables[key])


def test_load_from_yaml_text():
    text = yaml.safe_dump({"channels": 4, "vertical_angles": [1.0, 0.0, -1.0, -2.0],
                           "azimuth_step_deg": 1.0, "mount_height_m": 1.2})
    model = load_sensor_model(text)
    assert model.height == 4
    assert model.width == 360


def test_default_model_geometry():
    model = default_model()
    assert model.height == 64
    assert model.width == 4000
    assert model.channel_angles_deg[0] == pytest.approx(2.0)
    assert np.allclose(np.diff(model.channel_angles_deg), -0.4)
