"""Cluster merging through longer-range connection maps.

Dropped returns and occluding foreground objects split single objects into
several directly-connected clusters.  A connection map retests the distance
threshold between cell pairs at a fixed (dy, dx) offset and unions the
cluster identities of every pair that passes, coarsening the partition
without ever resurrecting ground or no-return cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ccl import LabelImage
from .connectivity import DistanceThreshold, pair_distance_sq
from .ground import GroundMask
from .range_image import RangeImage
from .sensor import SensorModel, canonical_offset


@dataclass(frozen=True)
class MCPattern:
    """A set of (dy, dx) cell offsets to retest, canonicalized and deduped."""

    offsets: tuple

    def __post_init__(self):
        seen = []
        for off in self.offsets:
            off = canonical_offset(off)
            if off not in seen:
                seen.append(off)
        object.__setattr__(self, "offsets", tuple(seen))

    def __len__(self):
        return len(self.offsets)


# mc1 skips one cell on each axis; mc6 widens the reach with the fewest
# extra maps; mc14 walks the main diagonal.  All presets are data and can be
# overridden per run.
PRESETS = {
    "none": (),
    "mc1": ((0, 2), (2, 0)),
    "mc6": ((0, 2), (2, 0), (0, 3), (3, 0), (2, 2), (3, 3)),
    "mc14": tuple((k, k) for k in range(2, 16)),
}


def preset_pattern(name: str) -> MCPattern:
    """Look up a named offset preset."""
    try:
        return MCPattern(PRESETS[name])
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def parse_offsets(text: str) -> MCPattern:
    """Parse an offset list like ``"0,2;2,0;3,3"`` (CLI override format)."""
    offsets = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        dy, dx = part.split(",")
        offsets.append((int(dy), int(dx)))
    return MCPattern(tuple(offsets))


class ClusterUnion:
    """Union-find over cluster labels with path compression and union by size.

    The final partition is independent of the order in which pairs are
    merged.
    """

    def __init__(self, n_labels: int):
        self.parent = np.arange(n_labels + 1, dtype=np.int64)
        self.size = np.ones(n_labels + 1, dtype=np.int64)
        self.merged_count = 0

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.merged_count += 1
        return True

    def roots(self) -> np.ndarray:
        """Root label for every label id, as a lookup table."""
        out = np.empty_like(self.parent)
        for i in range(len(self.parent)):
            out[i] = self.find(i)
        return out


def _renumber_roots(labels: np.ndarray, root_lut: np.ndarray,
                    sizes: np.ndarray) -> LabelImage:
    # Input labels are dense in first-encounter order, so the first encounter
    # of a merged cluster is the smallest member label; ranking roots by that
    # minimum keeps the output in first-encounter order too.
    n = len(root_lut) - 1
    min_member = np.full(n + 1, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(min_member, root_lut[1:], np.arange(1, n + 1))
    root_ids = np.flatnonzero(min_member < np.iinfo(np.int64).max)
    order = np.argsort(min_member[root_ids], kind="stable")
    rank = np.zeros(n + 1, dtype=labels.dtype)
    rank[root_ids[order]] = np.arange(1, len(root_ids) + 1, dtype=labels.dtype)
    final_lut = rank[root_lut]
    new_labels = final_lut[labels]
    new_sizes = np.zeros(len(root_ids) + 1, dtype=sizes.dtype)
    np.add.at(new_sizes, final_lut[: len(sizes)], sizes)
    return LabelImage(labels=new_labels, cluster_sizes=new_sizes)


def apply_map_connections(ri: RangeImage, gm: GroundMask, li: LabelImage,
                          model: SensorModel, thr: DistanceThreshold,
                          pattern: MCPattern) -> LabelImage:
    """Union clusters joined by any offset pair within the distance threshold.

    For every offset (dy, dx) and every cell pair ((r, c), (r+dy, (c+dx) mod
    W)) where both cells carry labels and the pair distance passes, the two
    clusters merge.  Output labels are densely renumbered; background cells
    are untouched.  With an empty pattern the input is returned unchanged.
    """
    if len(pattern) == 0:
        return li
    labels = li.labels
    ranges = ri.ranges
    dtype = ranges.dtype
    H, W = ranges.shape
    d_max_sq = np.asarray(thr.d_max_sq, dtype=dtype)

    union = ClusterUnion(li.cluster_count)
    for dy, dx in pattern.offsets:
        if dy >= H or abs(dx) >= W:
            raise ValueError(f"offset ({dy}, {dx}) exceeds frame {H}x{W}")
        two_cos = model.pair_constant(dy, dx).astype(dtype)
        if dy > 0:
            lab_a, lab_b = labels[:-dy], labels[dy:]
            rng_a, rng_b = ranges[:-dy], ranges[dy:]
        else:
            lab_a, lab_b = labels, labels
            rng_a, rng_b = ranges, ranges
        if dx != 0:
            lab_b = np.roll(lab_b, -dx, axis=1)
            rng_b = np.roll(rng_b, -dx, axis=1)
        cand = (lab_a > 0) & (lab_b > 0) & (lab_a != lab_b)
        if not cand.any():
            continue
        dist = pair_distance_sq(rng_a[cand], rng_b[cand], np.broadcast_to(
            two_cos, rng_a.shape)[cand])
        hit = dist <= d_max_sq
        if not hit.any():
            continue
        pairs = (lab_a[cand][hit].astype(np.int64) << 32) | lab_b[cand][hit]
        for packed in np.unique(pairs):
            union.union(int(packed >> 32), int(packed & 0xFFFFFFFF))

    if union.merged_count == 0:
        return li
    return _renumber_roots(labels, union.roots(), li.cluster_sizes)
