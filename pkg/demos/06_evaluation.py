"""Instance-level scoring: IoU matching and binned precision.

Each ground-truth instance with at least 100 points is matched to the
cluster that overlaps it most; a cluster claimed by two instances only
counts for the better-matched one.  Scores pool per instance, and the
precision ladder reports how many instances clear each overlap bin.
"""

import numpy as np

from rangeseg import synthetic
from rangeseg.evaluation import (EvalConfig, format_table, match_instances,
                                 summarize)
from rangeseg.map_connections import preset_pattern
from rangeseg.pipeline import Pipeline, PipelineConfig
from rangeseg.range_image import from_ranges

model = synthetic.fixture_model()
ranges, golden = synthetic.two_box_scene(model, occlusion_gap=True)
ri = from_ranges(ranges)

rows = []
for name in ("none", "mc1"):
    pipe = Pipeline(model, PipelineConfig(mc_pattern=preset_pattern(name)))
    li, _ = pipe.segment_range_image(ri)
    matches = match_instances(golden.ravel(), li.labels.ravel(), EvalConfig())
    report = summarize(matches)
    rows.append((name, report))
    detail = ", ".join(f"gt {m.gt_id} -> iou {m.iou:.3f}" for m in matches)
    print(f"{name}: {detail}")

print()
print(format_table(rows))
print()
print("the split box caps its best IoU near 0.5 without connection maps; "
      "one map restores a perfect match")

# under-segmentation accounting: merge both instances into one blob
blob = np.where(golden > 0, 1, 0)
matches = match_instances(golden.ravel(), blob.ravel())
print("\nunder-segmentation example (both boxes in one cluster):")
for m in matches:
    flag = "matched" if m.matched_cluster else "not found"
    print(f"  gt {m.gt_id}: iou {m.iou:.3f} ({flag})")
