import numpy as np
import pytest

from rangeseg.evaluation import (DEFAULT_IOU_BINS, EvalConfig, InstanceMatch,
                                 format_table, instance_iou, match_instances,
                                 precision_at, report_as_dict, summarize)


# ---------------------------------------------------------------------------
# IoU
# ---------------------------------------------------------------------------

def test_identical_sets():
    assert instance_iou([1, 2, 3], [1, 2, 3]) == 1.0


def test_disjoint_sets():
    assert instance_iou([1, 2], [3, 4]) == 0.0


def test_partial_overlap_counts():
    a = np.arange(100)
    b = np.arange(20, 120)  # overlap 80, union 120
    assert instance_iou(a, b) == pytest.approx(80 / 120)


def test_empty_gt_rejected():
    with pytest.raises(ValueError):
        instance_iou([], [1])


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------

def _labels(n, assignments):
    out = np.zeros(n, dtype=np.int64)
    for (lo, hi), v in assignments:
        out[lo:hi] = v
    return out


def test_perfect_cover_scores_one():
    gt = _labels(200, [((0, 150), 1)])
    pred = _labels(200, [((0, 150), 3)])
    matches = match_instances(gt, pred)
    assert len(matches) == 1
    assert matches[0].matched_cluster == 3
    assert matches[0].iou == 1.0


def test_undersegmentation_marks_second_instance_not_found():
    # one cluster covers two touching instances; only the higher IoU scores
    gt = _labels(300, [((0, 150), 1), ((150, 300), 2)])
    pred = _labels(300, [((0, 280), 9)])
    matches = match_instances(gt, pred)
    by_id = {m.gt_id: m for m in matches}
    assert by_id[1].matched_cluster == 9
    # |A| = 150 fully inside the 280-point cluster: 150 / (150 + 280 - 150)
    assert by_id[1].iou == pytest.approx(150 / 280)
    assert by_id[2].matched_cluster is None
    assert by_id[2].iou == 0.0


def test_small_gt_instances_are_skipped():
    gt = _labels(300, [((0, 99), 1), ((100, 250), 2)])
    pred = _labels(300, [((0, 99), 1), ((100, 250), 2)])
    matches = match_instances(gt, pred)
    assert [m.gt_id for m in matches] == [2]


def test_unmatched_instance_scores_zero():
    gt = _labels(200, [((0, 150), 1)])
    pred = np.zeros(200, dtype=np.int64)
    matches = match_instances(gt, pred)
    assert matches[0].matched_cluster is None
    assert matches[0].iou == 0.0


def test_equal_iou_tie_goes_to_lower_gt_id():
    # two same-size instances, one cluster covering the same share of each
    gt = _labels(400, [((0, 150), 2), ((200, 350), 1)])
    pred = np.zeros(400, dtype=np.int64)
    pred[50:150] = 5   # 100 of instance 2
    pred[200:300] = 5  # 100 of instance 1
    matches = match_instances(gt, pred)
    by_id = {m.gt_id: m for m in matches}
    assert by_id[1].matched_cluster == 5
    assert by_id[2].matched_cluster is None


def test_most_overlap_wins_before_iou():
    # cluster 1 overlaps more points; cluster 2 would have higher IoU
    gt = _labels(1000, [((0, 500), 1)])
    pred = np.zeros(1000, dtype=np.int64)
    pred[0:300] = 1
    pred[300:900] = 11  # also big outside the instance
    pred[400:500] = 2   # 100 points, tight fit
    matches = match_instances(gt, pred)
    assert matches[0].matched_cluster == 1


def test_mismatched_lengths_rejected():
    with pytest.raises(ValueError):
        match_instances(np.zeros(3), np.zeros(4))


# ---------------------------------------------------------------------------
# precision
# ---------------------------------------------------------------------------

def _matches(ious):
    return [InstanceMatch(gt_id=i + 1, matched_cluster=i + 1, iou=v)
            for i, v in enumerate(ious)]


def test_precision_thresholds():
    m = _matches([0.9, 0.6, 0.3])
    assert precision_at(m, 0.5) == pytest.approx(2 / 3)
    assert precision_at(m, 0.75) == pytest.approx(1 / 3)
    assert precision_at(m, 0.95) == 0.0


def test_precision_mean_over_bins():
    rep = summarize(_matches([0.9, 0.6, 0.3]))
    # bins 0.50..0.60 see two matches, 0.65..0.90 one, 0.95 none
    assert rep.precision_mean == pytest.approx((3 * (2 / 3) + 6 * (1 / 3)) / 10)
    assert rep.precision_mean == pytest.approx(0.4)
    assert rep.iou_mean == pytest.approx(0.6)


def test_perfect_matches_have_unit_precision_everywhere():
    rep = summarize(_matches([1.0, 1.0]))
    assert all(v == 1.0 for v in rep.precision_at.values())
    assert rep.precision_mean == 1.0


def test_precision_non_increasing_in_threshold(rng):
    for _ in range(20):
        m = _matches(rng.uniform(0, 1, size=30).tolist())
        rep = summarize(m)
        vals = [rep.precision_at[b] for b in DEFAULT_IOU_BINS]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_empty_match_set_reports_absent():
    with pytest.warns(UserWarning):
        rep = summarize([])
    assert rep.iou_mean is None
    assert rep.precision_mean is None
    assert rep.n_instances == 0


def test_precision_argument_validation():
    with pytest.raises(ValueError):
        precision_at(_matches([0.5]), 0.0)
    with pytest.raises(ValueError):
        precision_at([], 0.5)


# ---------------------------------------------------------------------------
# the disjoint-clusters guarantee
# ---------------------------------------------------------------------------

def test_only_one_cluster_can_exceed_half_iou_on_fuzzed_inputs(rng):
    # the guard inside match_instances must never fire for disjoint clusters
    for _ in range(300):
        n = int(rng.integers(50, 400))
        gt = rng.integers(0, 4, size=n)
        gt[gt > 0] += 0
        pred = rng.integers(0, 6, size=n)
        match_instances(gt, pred, EvalConfig(min_gt_points=1))


def test_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(iou_bins=(0.5, 0.5))
    with pytest.raises(ValueError):
        EvalConfig(iou_bins=(0.0, 0.5))
    with pytest.raises(ValueError):
        EvalConfig(ground_mode="nope")


def test_report_serialization():
    rep = summarize(_matches([0.9, 0.6]))
    d = report_as_dict(rep)
    assert d["n_instances"] == 2
    assert "0.50" in d["precision_at"]
    table = format_table([("none", rep)])
    assert "none" in table and "IoU_u" in table
