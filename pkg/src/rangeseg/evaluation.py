"""Instance-level scoring of predicted clusters against ground truth.

Every ground-truth instance with enough points is matched to the predicted
cluster that overlaps it most; when one cluster is the best match of several
instances, only the instance with the higher IoU keeps it and the others
count as not found.  Sequence scores pool the per-instance IoU values of
every frame, and precision is reported per overlap bin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_IOU_BINS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))


@dataclass
class EvalConfig:
    min_gt_points: int = 100
    iou_bins: tuple = DEFAULT_IOU_BINS
    ground_mode: str = "gt_ground_removed"  # or "algorithmic_ground"

    def __post_init__(self):
        bins = tuple(float(b) for b in self.iou_bins)
        if any(not (0.0 < b <= 1.0) for b in bins):
            raise ValueError("iou bins must lie in (0, 1]")
        if any(b2 <= b1 for b1, b2 in zip(bins, bins[1:])):
            raise ValueError("iou bins must be strictly increasing")
        self.iou_bins = bins
        if self.ground_mode not in ("gt_ground_removed", "algorithmic_ground"):
            raise ValueError(f"unknown ground mode {self.ground_mode!r}")


@dataclass
class InstanceMatch:
    gt_id: int
    matched_cluster: int | None
    iou: float


@dataclass
class EvalReport:
    iou_mean: float | None
    precision_mean: float | None
    precision_at: dict
    per_instance: list = field(default_factory=list)

    @property
    def n_instances(self) -> int:
        return len(self.per_instance)


def instance_iou(gt_points, cluster_points) -> float:
    """Jaccard index of two point-index sets."""
    a = set(np.asarray(gt_points).ravel().tolist())
    b = set(np.asarray(cluster_points).ravel().tolist())
    if not a:
        raise ValueError("ground-truth set must be nonempty")
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def match_instances(gt_instance_ids, pred_labels, cfg: EvalConfig | None = None):
    """Match every sufficiently large ground-truth instance to a cluster.

    ``gt_instance_ids`` and ``pred_labels`` are per-point arrays where 0
    means no instance / background.  Returns a list of InstanceMatch sorted
    by ground-truth id.
    """
    if cfg is None:
        cfg = EvalConfig()
    gt = np.asarray(gt_instance_ids).ravel()
    pred = np.asarray(pred_labels).ravel()
    if gt.shape != pred.shape:
        raise ValueError(f"{gt.size} gt labels vs {pred.size} predictions")

    gt_ids, gt_sizes = np.unique(gt[gt > 0], return_counts=True)
    scored = gt_ids[gt_sizes >= cfg.min_gt_points]
    if scored.size == 0:
        return []
    gt_size = dict(zip(gt_ids.tolist(), gt_sizes.tolist()))

    pred_ids, pred_sizes = np.unique(pred[pred > 0], return_counts=True)
    pred_size = dict(zip(pred_ids.tolist(), pred_sizes.tolist()))

    # Contingency counts over points where both sides are labelled.
    both = (gt > 0) & (pred > 0)
    by_gt = {}
    if both.any():
        mod = int(pred.max()) + 1
        packed = gt[both].astype(np.int64) * mod + pred[both].astype(np.int64)
        pairs, counts = np.unique(packed, return_counts=True)
        for p, n in zip(pairs.tolist(), counts.tolist()):
            by_gt.setdefault(p // mod, []).append((p % mod, n))

    best = {}
    for g in scored.tolist():
        overlaps = by_gt.get(g, [])
        if not overlaps:
            best[g] = (None, 0.0)
            continue
        ious = {c: n / (gt_size[g] + pred_size[c] - n) for c, n in overlaps}
        # an instance admits at most one cluster above 0.5 IoU
        if sum(1 for v in ious.values() if v > 0.5) > 1:
            raise RuntimeError(
                f"instance {g} overlaps two clusters with IoU > 0.5; "
                "predicted clusters are not disjoint")
        # most overlap first, IoU then lower cluster id break ties
        c_best = max(overlaps, key=lambda cn: (cn[1], ious[cn[0]], -cn[0]))[0]
        best[g] = (c_best, ious[c_best])

    # Duplicate resolution: a cluster goes to the instance with higher IoU;
    # equal IoU goes to the lower instance id.  Losers are not re-matched.
    by_cluster = {}
    for g, (c, iou) in best.items():
        if c is None:
            continue
        by_cluster.setdefault(c, []).append((g, iou))
    matches = []
    for g in sorted(best):
        c, iou = best[g]
        if c is not None:
            winner = max(by_cluster[c], key=lambda gi: (gi[1], -gi[0]))[0]
            if winner != g:
                c, iou = None, 0.0
        matches.append(InstanceMatch(gt_id=int(g), matched_cluster=c, iou=iou))
    return matches


def precision_at(matches, x: float) -> float:
    """Fraction of scored instances matched with IoU >= x."""
    if not (0.0 < x <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {x}")
    if not matches:
        raise ValueError("no scored instances")
    return sum(1 for m in matches if m.iou >= x) / len(matches)


def summarize(matches, cfg: EvalConfig | None = None) -> EvalReport:
    """Pool per-instance matches into the report metrics.

    With no scored instances the metric fields are None (absent) rather than
    zero, so empty frames cannot dilute sequence aggregates.
    """
    if cfg is None:
        cfg = EvalConfig()
    matches = list(matches)
    if not matches:
        import warnings
        warnings.warn("no ground-truth instances were scored", stacklevel=2)
        return EvalReport(iou_mean=None, precision_mean=None,
                          precision_at={}, per_instance=[])
    p_at = {b: precision_at(matches, b) for b in cfg.iou_bins}
    return EvalReport(
        iou_mean=float(np.mean([m.iou for m in matches])),
        precision_mean=float(np.mean(list(p_at.values()))),
        precision_at=p_at,
        per_instance=matches,
    )


def report_as_dict(report: EvalReport) -> dict:
    return {
        "n_instances": report.n_instances,
        "iou_mean": report.iou_mean,
        "precision_mean": report.precision_mean,
        "precision_at": {f"{k:.2f}": v for k, v in report.precision_at.items()},
    }


def format_table(rows, headers=("Method", "IoU_u", "P_u", "P_0.5", "P_0.75",
                                "P_0.95")) -> str:
    """Fixed-width metric table; rows are (name, report) pairs."""
    def fmt(v):
        return "   n/a" if v is None else f"{100.0 * v:6.2f}"

    lines = ["  ".join(f"{h:>8}" for h in headers)]
    for name, rep in rows:
        cells = [f"{name:>8}", fmt(rep.iou_mean), fmt(rep.precision_mean)]
        for b in (0.5, 0.75, 0.95):
            cells.append(fmt(rep.precision_at.get(b)))
        lines.append("  ".join(f"{c:>8}" for c in cells))
    return "\n".join(lines)
