"""Real-time lidar instance segmentation on the range image.

The pipeline clusters returns directly in the sensor's native 2-D grid:
ground cells are removed with a tangent-space slope test, neighbouring
returns are linked when their Euclidean distance (recovered from the two
ranges and the inter-beam angle) stays under a threshold, connected
components are labelled on an interleaved binary lattice, and longer-range
connection maps merge clusters that occlusion or dropped returns split.
"""

from .ccl import LabelImage, LatticeImage, build_lattice, filter_small, label_components
from .connectivity import (ConnectivityImages, DistanceThreshold,
                           build_connectivity, max_connectable_range,
                           pair_distance_sq)
from .evaluation import (EvalConfig, EvalReport, InstanceMatch, instance_iou,
                         match_instances, precision_at, summarize)
from .ground import GroundMask, GroundParams, extract_ground, surface_tangent
from .io_formats import (DataFormatError, FrameRecord, read_semantickitti_label,
                         read_velodyne_bin, write_colored_ply,
                         write_instance_labels, write_velodyne_bin)
from .map_connections import (ClusterUnion, MCPattern, apply_map_connections,
                              parse_offsets, preset_pattern)
from .pipeline import (BenchSummary, Pipeline, PipelineConfig, SegOutput,
                       TimingRecord, bench_run, evaluate_dataset,
                       segment_frame, segment_in_parallel)
from .range_image import (RangeImage, from_ranges, height_image,
                          labels_to_points, project)
from .sensor import (SensorConfigError, SensorModel, default_model,
                     load_sensor_model, uniform_model)

__version__ = "0.1.0"
