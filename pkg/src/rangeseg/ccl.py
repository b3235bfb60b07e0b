"""Connected-component labelling on the interleaved lattice.

Measurement presence and the two connection images interleave into a single
binary lattice: even/even cells hold returns, odd columns on even rows hold
horizontal connections, even columns on odd rows hold vertical connections.
Labelling that lattice with 4-connectivity and reading the labels back off
the even/even cells realises the clustering.  The labeller is a
non-recursive flood fill with an explicit worklist, compiled with numba, and
treats row ends as circular so the azimuth seam never splits an object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .connectivity import ConnectivityImages


@dataclass
class LatticeImage:
    """(2H-1, 2W) binary grid combining presence and connections.

    Column 2W-1 carries the wrap connection between column W-1 and column 0
    of the range image; odd/odd cells are always false.
    """

    grid: np.ndarray

    @property
    def image_shape(self):
        h2, w2 = self.grid.shape
        return (h2 + 1) // 2, w2 // 2

    @property
    def presence(self):
        return self.grid[0::2, 0::2]

    @property
    def horizontal(self):
        return self.grid[0::2, 1::2]

    @property
    def vertical(self):
        return self.grid[1::2, 0::2]


@dataclass
class LabelImage:
    """Instance labels per range-image cell; 0 is background.

    ``cluster_sizes[k]`` is the cell count of cluster k (index 0 counts the
    background).  Labels are dense, 1..cluster_count, in first-encounter
    scan order, so identical frames always label identically.
    """

    labels: np.ndarray
    cluster_sizes: np.ndarray

    @property
    def cluster_count(self) -> int:
        return len(self.cluster_sizes) - 1


def build_lattice(presence: np.ndarray, conn: ConnectivityImages,
                  out: np.ndarray | None = None) -> LatticeImage:
    """Interleave presence and connection bits into the labelling lattice."""
    H, W = presence.shape
    if conn.horizontal.shape != (H, W) or conn.vertical.shape != (H - 1, W):
        raise ValueError("connectivity images do not match the presence grid")
    if out is None:
        out = np.zeros((2 * H - 1, 2 * W), dtype=bool)
    else:
        out[1::2, 1::2] = False
    out[0::2, 0::2] = presence
    out[0::2, 1::2] = conn.horizontal
    out[1::2, 0::2] = conn.vertical
    return LatticeImage(grid=out)


@njit(cache=True, nogil=True)
def _flood_fill(grid, labels, stack):
    """Label 4-connected lattice components, one component at a time.

    Writes dense labels (first-encounter scan order) into the (H, W)
    ``labels`` array and returns the component count.  ``stack`` must hold
    H*W int64 slots.  Row ends are circular via the wrap connector column.
    """
    h2, w2 = grid.shape
    H = (h2 + 1) // 2
    W = w2 // 2
    next_label = 0
    for r0 in range(H):
        for c0 in range(W):
            if not grid[2 * r0, 2 * c0] or labels[r0, c0] != 0:
                continue
            next_label += 1
            labels[r0, c0] = next_label
            stack[0] = r0 * W + c0
            top = 1
            while top > 0:
                top -= 1
                idx = stack[top]
                r = idx // W
                c = idx - r * W
                if grid[2 * r, 2 * c + 1]:  # connection to (r, c+1 mod W)
                    c2 = c + 1 if c + 1 < W else 0
                    if labels[r, c2] == 0:
                        labels[r, c2] = next_label
                        stack[top] = r * W + c2
                        top += 1
                left = 2 * c - 1 if c > 0 else 2 * W - 1
                if grid[2 * r, left]:  # connection to (r, c-1 mod W)
                    c2 = c - 1 if c > 0 else W - 1
                    if labels[r, c2] == 0:
                        labels[r, c2] = next_label
                        stack[top] = r * W + c2
                        top += 1
                if r > 0 and grid[2 * r - 1, 2 * c]:
                    if labels[r - 1, c] == 0:
                        labels[r - 1, c] = next_label
                        stack[top] = (r - 1) * W + c
                        top += 1
                if r < H - 1 and grid[2 * r + 1, 2 * c]:
                    if labels[r + 1, c] == 0:
                        labels[r + 1, c] = next_label
                        stack[top] = (r + 1) * W + c
                        top += 1
    return next_label


def label_components(lattice: LatticeImage,
                     out: np.ndarray | None = None,
                     stack: np.ndarray | None = None) -> LabelImage:
    """Label every island of interconnected returns.

    Two cells share a label exactly when a 4-connected path of true lattice
    cells joins them, including paths through the azimuth seam.
    """
    H, W = lattice.image_shape
    if out is None:
        out = np.zeros((H, W), dtype=np.int32)
    else:
        out[:] = 0
    if stack is None:
        stack = np.empty(H * W, dtype=np.int64)
    n = _flood_fill(lattice.grid, out, stack)
    sizes = np.bincount(out.ravel(), minlength=n + 1)
    return LabelImage(labels=out, cluster_sizes=sizes)


def filter_small(li: LabelImage, min_points: int = 100) -> LabelImage:
    """Drop clusters below `min_points` cells and renumber densely.

    Surviving clusters keep their relative order, so first-encounter
    numbering is preserved.
    """
    if min_points <= 1:
        return li
    keep = li.cluster_sizes >= min_points
    keep[0] = False
    lut = np.zeros(len(li.cluster_sizes), dtype=li.labels.dtype)
    lut[keep] = np.arange(1, int(keep.sum()) + 1, dtype=li.labels.dtype)
    labels = lut[li.labels]
    sizes = np.zeros(int(keep.sum()) + 1, dtype=li.cluster_sizes.dtype)
    sizes[1:] = li.cluster_sizes[keep]
    sizes[0] = li.labels.size - sizes[1:].sum()
    return LabelImage(labels=labels, cluster_sizes=sizes)
