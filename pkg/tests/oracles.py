"""Independent reference implementations used only by the tests.

Everything here is deliberately brute force and shares no code with the
library paths it checks.
"""

import math
from collections import deque

import numpy as np


def cartesian_pair_distance_sq(d1, d2, alpha):
    """Squared distance via explicit 2-D point reconstruction."""
    ax, az = d1, 0.0
    bx = d2 * np.cos(alpha)
    bz = d2 * np.sin(alpha)
    return (ax - bx) ** 2 + (az - bz) ** 2


def beam_points_2d(d, delta):
    """Point hit by a beam of elevation `delta` at range `d`, (x, z)."""
    return d * math.cos(delta), d * math.sin(delta)


def slope_is_ground(d1, d2, delta_upper, delta_lower, theta_deg):
    """Arctangent ground decision for one vertical pair.

    Reconstructs both points, measures the angle of their connecting segment
    against the horizontal, and compares in angle space.
    """
    xa, za = beam_points_2d(d1, delta_upper)
    xb, zb = beam_points_2d(d2, delta_lower)
    ang = math.degrees(math.atan2(za - zb, xa - xb))
    if ang > 90.0:
        ang -= 180.0
    elif ang <= -90.0:
        ang += 180.0
    return abs(ang) <= theta_deg


def bfs_partition(valid, horizontal, vertical, extra_pairs=()):
    """Flood-fill labelling over the neighbour adjacency, wrap included.

    ``extra_pairs`` is an iterable of ((r1, c1), (r2, c2)) cell pairs added
    to the adjacency (for testing connection-map merges).  Returns an (H, W)
    int array with dense labels in first-encounter scan order.
    """
    H, W = valid.shape
    adj = {}

    def add_edge(a, b):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    for r in range(H):
        for c in range(W):
            if horizontal[r, c]:
                add_edge((r, c), (r, (c + 1) % W))
            if r < H - 1 and vertical[r, c]:
                add_edge((r, c), (r + 1, c))
    for a, b in extra_pairs:
        add_edge(tuple(a), tuple(b))

    labels = np.zeros((H, W), dtype=np.int64)
    next_label = 0
    for r in range(H):
        for c in range(W):
            if not valid[r, c] or labels[r, c] != 0:
                continue
            next_label += 1
            queue = deque([(r, c)])
            labels[r, c] = next_label
            while queue:
                cell = queue.popleft()
                for nb in adj.get(cell, ()):
                    if valid[nb] and labels[nb] == 0:
                        labels[nb] = next_label
                        queue.append(nb)
    return labels


def normalize_partition(labels):
    """Relabel to dense ids in scan order so partitions compare up to naming."""
    labels = np.asarray(labels)
    out = np.zeros_like(labels, dtype=np.int64)
    mapping = {}
    flat = labels.ravel()
    out_flat = out.ravel()
    for i, v in enumerate(flat):
        if v == 0:
            continue
        if v not in mapping:
            mapping[v] = len(mapping) + 1
        out_flat[i] = mapping[v]
    return out


def same_partition(a, b):
    return np.array_equal(normalize_partition(a), normalize_partition(b))


def is_coarsening(fine, coarse):
    """True when every cluster of `fine` maps wholly into one of `coarse`."""
    fine = np.asarray(fine).ravel()
    coarse = np.asarray(coarse).ravel()
    seen = {}
    for f, c in zip(fine.tolist(), coarse.tolist()):
        if f == 0:
            if c != 0:
                return False
            continue
        if c == 0:
            return False
        if f in seen and seen[f] != c:
            return False
        seen[f] = c
    return True


def radius_clusters(points, radius):
    """Brute-force single-linkage clustering of 3-D points (test fixture).

    O(n^2); returns per-point labels 1..K, first-encounter order.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    labels = np.zeros(n, dtype=np.int64)
    r2 = radius * radius
    next_label = 0
    for i in range(n):
        if labels[i]:
            continue
        next_label += 1
        queue = deque([i])
        labels[i] = next_label
        while queue:
            j = queue.popleft()
            d2 = np.sum((pts - pts[j]) ** 2, axis=1)
            for k in np.flatnonzero((d2 <= r2) & (labels == 0)):
                labels[k] = next_label
                queue.append(int(k))
    return labels


def random_frame(rng, H, W, p_valid=0.7, p_conn=0.6):
    """Random presence/connection masks obeying the endpoint invariant."""
    valid = rng.random((H, W)) < p_valid
    horizontal = (rng.random((H, W)) < p_conn) & valid \
        & np.roll(valid, -1, axis=1)
    if W == 1:
        horizontal[:] = False
    vertical = (rng.random((max(H - 1, 0), W)) < p_conn) & valid[:-1] & valid[1:]
    return valid, horizontal, vertical


def random_mc_case(rng, max_offsets=4):
    """Random small frame, sensor model, and offset pattern for merge tests."""
    from rangeseg.map_connections import MCPattern
    from rangeseg.sensor import uniform_model

    H = int(rng.integers(3, 17))
    W = int(rng.integers(3, 17))
    model = uniform_model(H, top_deg=-2.0, step_deg=1.0,
                          azimuth_step_deg=360.0 / W, mount_height_m=1.7,
                          width=W)
    ranges = rng.uniform(0.5, 12.0, size=(H, W)).astype(np.float32)
    ranges[rng.random((H, W)) < 0.3] = 0.0
    dy_max = min(H - 1, 3)
    dx_max = min(W - 1, 3)
    offsets = []
    for _ in range(int(rng.integers(1, max_offsets + 1))):
        dy = int(rng.integers(0, dy_max + 1))
        dx = int(rng.integers(-dx_max, dx_max + 1))
        if dy == 0 and dx == 0:
            dx = 1
        offsets.append((dy, dx))
    return model, ranges, MCPattern(tuple(offsets))


def extended_partition_oracle(model, ranges, pattern, thr):
    """Flood fill over direct adjacency plus all passing offset pairs."""
    from rangeseg.connectivity import build_connectivity, pair_distance_sq
    from rangeseg.ground import GroundMask
    from rangeseg.range_image import from_ranges

    valid = ranges > 0
    conn = build_connectivity(from_ranges(ranges), GroundMask(mask=~valid),
                              model, thr)
    H, W = ranges.shape
    extra = []
    for dy, dx in pattern.offsets:
        two_cos = model.pair_constant(dy, dx)
        for r in range(H - dy):
            row_cos = float(two_cos[min(r, two_cos.shape[0] - 1), 0])
            for c in range(W):
                r2, c2 = r + dy, (c + dx) % W
                if not (valid[r, c] and valid[r2, c2]):
                    continue
                d_sq = pair_distance_sq(float(ranges[r, c]),
                                        float(ranges[r2, c2]), row_cos)
                if d_sq <= thr.d_max_sq:
                    extra.append(((r, c), (r2, c2)))
    return bfs_partition(valid, conn.horizontal, conn.vertical, extra)
