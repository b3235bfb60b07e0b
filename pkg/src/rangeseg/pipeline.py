"""Frame pipeline: projection, ground removal, clustering, merging, timing.

A Pipeline instance owns preallocated scratch buffers sized for one sensor
geometry, so per-frame allocation stays near zero.  One instance is
single-threaded and must not be shared mid-frame; separate instances can
process disjoint frames concurrently.
"""

from __future__ import annotations

import gc
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import evaluation
from .ccl import LabelImage, build_lattice, filter_small, label_components
from .connectivity import DistanceThreshold, build_connectivity
from .ground import GroundMask, GroundParams, extract_ground
from .io_formats import FrameRecord, ground_class_ids
from .map_connections import MCPattern, apply_map_connections
from .range_image import RangeImage, from_ranges, height_image, labels_to_points, project
from .sensor import SensorModel

STAGES = ("project", "ground", "connectivity", "ccl", "mc", "filter")


@dataclass
class PipelineConfig:
    """Everything that tunes a segmentation run."""

    ground: GroundParams = field(default_factory=GroundParams)
    threshold: DistanceThreshold = field(default_factory=DistanceThreshold)
    mc_pattern: MCPattern = field(default_factory=lambda: MCPattern(()))
    min_cluster_points: int = 100
    ground_removal: bool = True


@dataclass
class TimingRecord:
    """Per-stage wall time of one frame, milliseconds.

    The ``project`` slot covers point-to-image projection and label
    back-projection; it is zero for natively image-shaped input.
    """

    project: float = 0.0
    ground: float = 0.0
    connectivity: float = 0.0
    ccl: float = 0.0
    mc: float = 0.0
    filter: float = 0.0
    total: float = 0.0

    def stage_sum(self) -> float:
        return (self.project + self.ground + self.connectivity + self.ccl
                + self.mc + self.filter)


@dataclass
class SegOutput:
    """Per-point instance labels plus the label image they came from."""

    point_labels: np.ndarray | None
    label_image: LabelImage


class Pipeline:
    def __init__(self, model: SensorModel, config: PipelineConfig | None = None):
        self.model = model
        self.config = config or PipelineConfig()
        H, W = model.height, model.width
        self._lattice_buf = np.zeros((2 * H - 1, 2 * W), dtype=bool)
        self._labels_buf = np.zeros((H, W), dtype=np.int32)
        self._stack_buf = np.empty(H * W, dtype=np.int64)
        # prime constants used by the configured offsets
        model.precompute_pair_constants([(1, 0)] if W == 1 else [(0, 1), (1, 0)])
        if len(self.config.mc_pattern):
            model.precompute_pair_constants(self.config.mc_pattern.offsets)

    # ------------------------------------------------------------------

    def segment_range_image(self, ri: RangeImage):
        """Cluster a frame that is already image shaped.

        Returns ``(LabelImage, TimingRecord)``.  Output is deterministic:
        identical inputs produce identical labellings.
        """
        cfg = self.config
        model = self.model
        rec = TimingRecord()
        t0 = time.perf_counter()

        t = time.perf_counter()
        if cfg.ground_removal:
            heights = height_image(ri, model)
            gm = extract_ground(ri, heights, model, cfg.ground)
        else:
            gm = GroundMask(mask=~ri.valid_mask())
        rec.ground = (time.perf_counter() - t) * 1e3

        t = time.perf_counter()
        conn = build_connectivity(ri, gm, model, cfg.threshold)
        rec.connectivity = (time.perf_counter() - t) * 1e3

        t = time.perf_counter()
        presence = ri.valid_mask() & ~gm.mask
        lattice = build_lattice(presence, conn, out=self._lattice_buf)
        li = label_components(lattice, out=self._labels_buf,
                              stack=self._stack_buf)
        rec.ccl = (time.perf_counter() - t) * 1e3

        t = time.perf_counter()
        if len(cfg.mc_pattern):
            li = apply_map_connections(ri, gm, li, model, cfg.threshold,
                                       cfg.mc_pattern)
        rec.mc = (time.perf_counter() - t) * 1e3

        t = time.perf_counter()
        li = filter_small(li, cfg.min_cluster_points)
        rec.filter = (time.perf_counter() - t) * 1e3

        # never hand out the reusable scratch buffer itself
        if li.labels is self._labels_buf:
            li = LabelImage(labels=li.labels.copy(),
                            cluster_sizes=li.cluster_sizes)

        rec.total = (time.perf_counter() - t0) * 1e3
        return li, rec

    def segment_cloud(self, points):
        """Project a cloud, cluster it, and carry labels back to the points."""
        rec = TimingRecord()
        t0 = time.perf_counter()
        points = np.asarray(points)
        if points.size == 0:
            empty = LabelImage(
                labels=np.zeros((self.model.height, self.model.width), np.int32),
                cluster_sizes=np.array([self.model.height * self.model.width]))
            return SegOutput(point_labels=np.zeros(0, np.int32),
                             label_image=empty), rec

        t = time.perf_counter()
        ri = project(points, self.model)
        rec.project = (time.perf_counter() - t) * 1e3

        li, inner = self.segment_range_image(ri)
        rec.ground, rec.connectivity = inner.ground, inner.connectivity
        rec.ccl, rec.mc, rec.filter = inner.ccl, inner.mc, inner.filter

        t = time.perf_counter()
        point_labels = labels_to_points(li.labels, ri)
        rec.project += (time.perf_counter() - t) * 1e3

        rec.total = (time.perf_counter() - t0) * 1e3
        return SegOutput(point_labels=point_labels, label_image=li), rec

    def segment_frame(self, frame: FrameRecord):
        return self.segment_cloud(frame.points)


def segment_frame(frame: FrameRecord, model: SensorModel,
                  config: PipelineConfig | None = None):
    """One-shot convenience wrapper around a throwaway Pipeline."""
    return Pipeline(model, config).segment_frame(frame)


def segment_in_parallel(range_images, model: SensorModel,
                        config: PipelineConfig | None = None,
                        max_workers: int = 2):
    """Label disjoint frames concurrently, one Pipeline per worker thread.

    The labelling kernel and the large array operations release the GIL, so
    threads overlap usefully.  Output order matches input order and equals
    the single-threaded result frame for frame.  Benchmarks deliberately do
    not use this path; headline figures are single core.
    """
    import concurrent.futures
    import threading

    if config is None:
        config = PipelineConfig()
    local = threading.local()

    def work(ri):
        if not hasattr(local, "pipeline"):
            local.pipeline = Pipeline(model, config)
        li, _ = local.pipeline.segment_range_image(ri)
        return LabelImage(labels=li.labels.copy(),
                          cluster_sizes=li.cluster_sizes.copy())

    frames = [f if isinstance(f, RangeImage) else from_ranges(f)
              for f in range_images]
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(work, frames))


# ----------------------------------------------------------------------
# benchmarking
# ----------------------------------------------------------------------

@dataclass
class BenchSummary:
    records: list
    warmup: int
    n_distinct: int = 0

    @property
    def n_frames(self) -> int:
        return len(self.records)

    @staticmethod
    def _aggregate(totals):
        totals_sorted = sorted(totals)
        p99 = totals_sorted[min(len(totals) - 1, int(0.99 * len(totals)))]
        med = statistics.median(totals)
        mean = statistics.fmean(totals)
        return {
            "frames": len(totals),
            "mean_ms": mean,
            "median_ms": med,
            "p99_ms": p99,
            "min_ms": totals_sorted[0],
            "max_ms": totals_sorted[-1],
            "p99_over_median": p99 / med if med > 0 else float("inf"),
            "hz_mean": 1e3 / mean if mean > 0 else float("inf"),
            "hz_min": 1e3 / totals_sorted[-1] if totals_sorted[-1] > 0 else float("inf"),
            "hz_max": 1e3 / totals_sorted[0] if totals_sorted[0] > 0 else float("inf"),
        }

    def stat(self):
        """Aggregate timing stats over every recorded pass, in ms and Hz."""
        if not self.records:
            return {}
        out = self._aggregate([r.total for r in self.records])
        for stage in STAGES:
            out[f"{stage}_ms"] = statistics.fmean(getattr(r, stage)
                                                  for r in self.records)
        return out

    def per_frame_stat(self):
        """Stats over each distinct frame's best (minimum) time.

        Repeated passes over the same frame differ only by host scheduling
        noise; taking the per-frame minimum strips that additive noise and
        leaves the scene-to-scene variation the stability figures are
        about.  Falls back to raw stats when frames were not repeated.
        """
        if not self.records:
            return {}
        n = self.n_distinct or len(self.records)
        best = {}
        for i, r in enumerate(self.records):
            k = i % n
            best[k] = min(best.get(k, float("inf")), r.total)
        return self._aggregate(list(best.values()))


def _pin_to_one_core():
    """Restrict the process to a single logical core; returns an undo call."""
    import os
    if not hasattr(os, "sched_setaffinity"):
        return lambda: None
    try:
        previous = os.sched_getaffinity(0)
        os.sched_setaffinity(0, {min(previous)})
        return lambda: os.sched_setaffinity(0, previous)
    except OSError:
        return lambda: None


def bench_run(frames, pipeline: Pipeline, repetitions: int = 1,
              warmup: int = 3, inter_frame_pause_s: float = 0.002,
              pin_core: bool = True) -> BenchSummary:
    """Time the clustering stages over pre-loaded range images.

    Runs single-threaded, pinned to one logical core where the platform
    allows.  File I/O and frame generation stay outside the timed region;
    `warmup` initial passes (JIT compilation, cache warming) are discarded
    and the garbage collector stays off while timing.  A short pause
    separates frames, mirroring how a live scanner delivers them; without
    it a saturated burst can trip host CPU-quota throttling, whose stalls
    would be misread as frame-time fluctuation.  Each recorded time is
    still the uninterrupted wall time of one frame.  With ``repetitions=0``
    an empty summary is returned.
    """
    frames = [f if isinstance(f, RangeImage) else from_ranges(f) for f in frames]
    records = []
    if repetitions <= 0 or not frames:
        return BenchSummary(records=[], warmup=0, n_distinct=0)

    for ri in frames[:max(1, min(warmup, len(frames)))]:
        pipeline.segment_range_image(ri)

    unpin = _pin_to_one_core() if pin_core else (lambda: None)
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repetitions):
            for ri in frames:
                _, rec = pipeline.segment_range_image(ri)
                records.append(rec)
                if inter_frame_pause_s > 0:
                    time.sleep(inter_frame_pause_s)
    finally:
        if gc_was_enabled:
            gc.enable()
        unpin()
    return BenchSummary(records=records, warmup=warmup, n_distinct=len(frames))


# ----------------------------------------------------------------------
# dataset evaluation driver
# ----------------------------------------------------------------------

def evaluate_dataset(dataset_dir, sequences, model: SensorModel,
                     config: PipelineConfig | None = None,
                     eval_cfg: evaluation.EvalConfig | None = None,
                     max_frames: int | None = None,
                     progress=None):
    """Score a labelled dataset; pools per-instance IoU over all sequences.

    In ``gt_ground_removed`` mode the points of the ground classes are
    removed before projection and the algorithmic ground stage is bypassed;
    in ``algorithmic_ground`` mode the full cloud goes through the regular
    pipeline.
    """
    from .io_formats import frame_paths, load_frame

    eval_cfg = eval_cfg or evaluation.EvalConfig()
    config = config or PipelineConfig()
    gt_mode = eval_cfg.ground_mode == "gt_ground_removed"
    if gt_mode:
        config = PipelineConfig(ground=config.ground, threshold=config.threshold,
                                mc_pattern=config.mc_pattern,
                                min_cluster_points=config.min_cluster_points,
                                ground_removal=False)
        ground_ids = ground_class_ids()
    pipeline = Pipeline(model, config)

    matches = []
    n_frames = 0
    for seq in sequences:
        for idx, (bin_path, label_path) in enumerate(frame_paths(dataset_dir, seq)):
            if label_path is None:
                continue
            if max_frames is not None and n_frames >= max_frames:
                break
            frame = load_frame(bin_path, label_path, frame_id=idx)
            pts = frame.points
            keep = None
            if gt_mode:
                keep = ~np.isin(frame.semantic, list(ground_ids))
                pts = pts[keep]
            if pts.shape[0] == 0:
                continue
            out, _ = pipeline.segment_cloud(pts)
            pred = out.point_labels
            if keep is not None:
                full = np.zeros(frame.points.shape[0], dtype=np.int32)
                full[keep] = pred
                pred = full
            # instance ids are only unique within a class; key on both
            gt_ids = np.where(
                frame.instance > 0,
                (frame.instance.astype(np.int64) << 16) | frame.semantic, 0)
            matches.extend(evaluation.match_instances(gt_ids, pred, eval_cfg))
            n_frames += 1
            if progress is not None:
                progress(seq, idx)
    report = evaluation.summarize(matches, eval_cfg)
    return report, n_frames
