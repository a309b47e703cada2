"""STR-packed R-tree over node points and edge segments.

The tree is bulk-loaded once (sort by center x, tile into vertical slabs,
sort slabs by center y, pack runs of M; recurse on the resulting bboxes) and
never mutated. Storage is columnar: item rows plus one array-bundle per tree
level, with every node covering a contiguous run of item rows. That layout
lets window queries run level by level on whole index arrays, and lets a
node whose bbox is fully inside the window contribute its item range without
descending further.

Exact geometry: item bbox tests are plain float comparisons; partially
covered edge candidates get a segment-vs-window test using orientation signs
with an error-bound filter and a rational-arithmetic fallback, so boundary
touches are never misclassified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation, InvalidParameterError
from .geometry import Point, Rect, Segment, _ORIENT_EPS, segment_intersects_rect

__all__ = ["SpatialItem", "RTree", "bulk_load", "window_query", "NODE_KIND", "EDGE_KIND"]

NODE_KIND = 0
EDGE_KIND = 1


@dataclass(frozen=True, slots=True)
class SpatialItem:
    kind: int  # NODE_KIND or EDGE_KIND
    item_id: int
    geometry: Point | Segment
    bbox: Rect


@dataclass
class _Level:
    bbox: np.ndarray         # (K, 4) x0, y0, x1, y1
    child_start: np.ndarray  # (K,) into the level below, or items for level 0
    child_count: np.ndarray
    item_start: np.ndarray   # (K,) contiguous item range covered by the subtree
    item_count: np.ndarray

    @property
    def size(self) -> int:
        return self.bbox.shape[0]


def _flatten_ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Concatenation of arange(s, s+c) for each range, without a python loop."""
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    out = np.ones(total, dtype=np.int64)
    boundaries = np.cumsum(counts)[:-1]
    out[0] = starts[0]
    if boundaries.size:
        out[boundaries] = starts[1:] - (starts[:-1] + counts[:-1] - 1)
    return np.cumsum(out)


def _str_order(cx: np.ndarray, cy: np.ndarray, tie1: np.ndarray, tie2: np.ndarray,
               fanout: int) -> np.ndarray:
    """STR tiling permutation: x-sort, vertical slabs, y-sort per slab."""
    n = cx.size
    slabs = math.ceil(math.sqrt(n / fanout))
    slab_size = math.ceil(n / slabs)
    order_x = np.lexsort((tie2, tie1, cx))
    perm = np.empty(n, dtype=np.int64)
    for lo in range(0, n, slab_size):
        sl = order_x[lo:lo + slab_size]
        order_y = np.lexsort((tie2[sl], tie1[sl], cy[sl]))
        perm[lo:lo + sl.size] = sl[order_y]
    return perm


def _group_bboxes(bboxes: np.ndarray, starts: np.ndarray) -> np.ndarray:
    out = np.empty((starts.size, 4), dtype=np.float64)
    out[:, 0] = np.minimum.reduceat(bboxes[:, 0], starts)
    out[:, 1] = np.minimum.reduceat(bboxes[:, 1], starts)
    out[:, 2] = np.maximum.reduceat(bboxes[:, 2], starts)
    out[:, 3] = np.maximum.reduceat(bboxes[:, 3], starts)
    return out


class RTree:
    """Immutable after construction; safe for any number of readers."""

    def __init__(self, fanout: int, kinds: np.ndarray, refs: np.ndarray,
                 geom: np.ndarray, bboxes: np.ndarray, levels: list[_Level]):
        self.fanout = fanout
        self.kinds = kinds    # (N,) uint8
        self.refs = refs      # (N,) int64: NodeId or edge id
        self.geom = geom      # (N, 4) ax, ay, bx, by; points have a == b
        self.bboxes = bboxes  # (N, 4)
        self.levels = levels  # levels[0] leaves ... levels[-1] root level

    @property
    def count(self) -> int:
        return self.kinds.shape[0]

    @property
    def height(self) -> int:
        return len(self.levels)

    @property
    def root_bbox(self) -> Rect | None:
        if not self.levels:
            return None
        b = self.levels[-1].bbox[0]
        return Rect(float(b[0]), float(b[1]), float(b[2]), float(b[3]))

    def item_at(self, row: int) -> SpatialItem:
        kind = int(self.kinds[row])
        ax, ay, bx, by = (float(v) for v in self.geom[row])
        if kind == NODE_KIND:
            geometry: Point | Segment = Point(ax, ay)
        else:
            geometry = Segment(Point(ax, ay), Point(bx, by))
        b = self.bboxes[row]
        return SpatialItem(kind=kind, item_id=int(self.refs[row]), geometry=geometry,
                           bbox=Rect(float(b[0]), float(b[1]), float(b[2]), float(b[3])))

    def query_indices(self, x0: float, y0: float, x1: float, y1: float) -> np.ndarray:
        """Item rows whose geometry intersects the closed window, ascending."""
        if self.count == 0:
            return np.empty(0, dtype=np.int64)
        taken_ranges: list[tuple[np.ndarray, np.ndarray]] = []
        cand = np.arange(self.levels[-1].size, dtype=np.int64)
        for li in range(len(self.levels) - 1, -1, -1):
            lv = self.levels[li]
            b = lv.bbox[cand]
            hit = (b[:, 0] <= x1) & (b[:, 2] >= x0) & (b[:, 1] <= y1) & (b[:, 3] >= y0)
            cand = cand[hit]
            b = b[hit]
            inside = (b[:, 0] >= x0) & (b[:, 2] <= x1) & (b[:, 1] >= y0) & (b[:, 3] <= y1)
            if inside.any():
                taken_ranges.append((lv.item_start[cand[inside]],
                                     lv.item_count[cand[inside]]))
                cand = cand[~inside]
            cand = _flatten_ranges(lv.child_start[cand], lv.child_count[cand])
        exact = self._exact_filter(cand, x0, y0, x1, y1)
        parts = [_flatten_ranges(s, c) for s, c in taken_ranges]
        parts.append(exact)
        rows = np.concatenate(parts)
        rows.sort()
        return rows

    def _exact_filter(self, rows: np.ndarray, x0: float, y0: float,
                      x1: float, y1: float) -> np.ndarray:
        """Exact geometry tests for item rows reached through partial leaves."""
        if rows.size == 0:
            return rows
        b = self.bboxes[rows]
        overlap = (b[:, 0] <= x1) & (b[:, 2] >= x0) & (b[:, 1] <= y1) & (b[:, 3] >= y0)
        rows = rows[overlap]
        b = b[overlap]
        if rows.size == 0:
            return rows
        # Nodes have degenerate bboxes: overlap already is the exact point test.
        # Edge bboxes fully inside the window contain their whole segment.
        inside = (b[:, 0] >= x0) & (b[:, 2] <= x1) & (b[:, 1] >= y0) & (b[:, 3] <= y1)
        pending = rows[(self.kinds[rows] == EDGE_KIND) & ~inside]
        if pending.size == 0:
            return rows
        keep = self._segments_hit_window(pending, x0, y0, x1, y1)
        drop = pending[~keep]
        if drop.size == 0:
            return rows
        mask = np.ones(rows.size, dtype=bool)
        mask[np.searchsorted(rows, drop)] = False
        return rows[mask]

    def _segments_hit_window(self, rows: np.ndarray, x0: float, y0: float,
                             x1: float, y1: float) -> np.ndarray:
        """Closed segment-vs-window test, vectorized.

        Bbox overlap is already established, so by separating axes the segment
        misses the window iff all four corners lie strictly on one side of its
        supporting line. Orientation signs below the float error bound fall
        back to the exact scalar predicate.
        """
        g = self.geom[rows]
        ax, ay = g[:, 0], g[:, 1]
        dx = g[:, 2] - ax
        dy = g[:, 3] - ay
        pos = np.zeros(rows.size, dtype=bool)
        neg = np.zeros(rows.size, dtype=bool)
        uncertain = np.zeros(rows.size, dtype=bool)
        for cx, cy in ((x0, y0), (x1, y0), (x1, y1), (x0, y1)):
            t1 = dx * (cy - ay)
            t2 = dy * (cx - ax)
            det = t1 - t2
            err = _ORIENT_EPS * (np.abs(t1) + np.abs(t2))
            pos |= det > err
            neg |= det < -err
            uncertain |= np.abs(det) <= err
        separated = (pos & ~neg & ~uncertain) | (neg & ~pos & ~uncertain)
        keep = ~separated
        unsure = uncertain & ~(pos & neg)  # pos & neg already proves a crossing
        if unsure.any():
            window = Rect(x0, y0, x1, y1)
            for i in np.nonzero(unsure)[0]:
                seg = Segment(Point(float(g[i, 0]), float(g[i, 1])),
                              Point(float(g[i, 2]), float(g[i, 3])))
                keep[i] = segment_intersects_rect(seg, window)
        return keep

    def query(self, window: Rect) -> set[SpatialItem]:
        rows = self.query_indices(window.x_min, window.y_min, window.x_max, window.y_max)
        return {self.item_at(int(r)) for r in rows}


def _build_levels(bboxes: np.ndarray, kinds: np.ndarray, refs: np.ndarray,
                  geom: np.ndarray, fanout: int) -> tuple[np.ndarray, ...]:
    """Packs items and builds all levels; returns permuted arrays + levels."""
    n = bboxes.shape[0]
    cx = (bboxes[:, 0] + bboxes[:, 2]) * 0.5
    cy = (bboxes[:, 1] + bboxes[:, 3]) * 0.5
    perm = _str_order(cx, cy, refs, kinds.astype(np.int64), fanout)
    kinds = kinds[perm]
    refs = refs[perm]
    geom = geom[perm]
    bboxes = bboxes[perm]

    starts = np.arange(0, n, fanout, dtype=np.int64)
    counts = np.minimum(fanout, n - starts)
    levels = [_Level(bbox=_group_bboxes(bboxes, starts),
                     child_start=starts, child_count=counts,
                     item_start=starts.copy(), item_count=counts.copy())]

    while levels[-1].size > 1:
        cur = levels[-1]
        ccx = (cur.bbox[:, 0] + cur.bbox[:, 2]) * 0.5
        ccy = (cur.bbox[:, 1] + cur.bbox[:, 3]) * 0.5
        idx = np.arange(cur.size, dtype=np.int64)
        perm = _str_order(ccx, ccy, idx, idx, fanout)

        # Re-sorting this level breaks the contiguity of descendant ranges,
        # so cascade the reorder down: each level below is block-permuted to
        # follow its parents, ending with the item rows themselves.
        p = perm
        for li in range(len(levels) - 1, -1, -1):
            lv = levels[li]
            lv.bbox = lv.bbox[p]
            cnts = lv.child_count[p]
            old_starts = lv.child_start[p]
            p = _flatten_ranges(old_starts, cnts)
            lv.child_count = cnts
            lv.child_start = np.concatenate(
                ([0], np.cumsum(cnts[:-1]))).astype(np.int64)
        kinds = kinds[p]
        refs = refs[p]
        geom = geom[p]
        bboxes = bboxes[p]
        # item ranges, bottom-up
        levels[0].item_start = levels[0].child_start
        levels[0].item_count = levels[0].child_count
        for li in range(1, len(levels)):
            below = levels[li - 1]
            levels[li].item_start = below.item_start[levels[li].child_start]
            levels[li].item_count = np.add.reduceat(below.item_count,
                                                    levels[li].child_start)

        k = cur.size
        starts = np.arange(0, k, fanout, dtype=np.int64)
        counts = np.minimum(fanout, k - starts)
        levels.append(_Level(bbox=_group_bboxes(cur.bbox, starts),
                             child_start=starts, child_count=counts,
                             item_start=cur.item_start[starts],
                             item_count=np.add.reduceat(cur.item_count, starts)))
    return kinds, refs, geom, bboxes, levels


def from_arrays(kinds: np.ndarray, refs: np.ndarray, geom: np.ndarray,
                fanout: int = 16) -> RTree:
    """Bulk-load from columnar arrays; geom rows are (ax, ay, bx, by)."""
    if fanout < 2:
        raise InvalidParameterError("fanout must be >= 2", param="fanout")
    n = kinds.shape[0]
    kinds = np.ascontiguousarray(kinds, dtype=np.uint8)
    refs = np.ascontiguousarray(refs, dtype=np.int64)
    geom = np.ascontiguousarray(geom, dtype=np.float64)
    if n == 0:
        empty = np.empty((0, 4), dtype=np.float64)
        return RTree(fanout, kinds, refs, geom, empty, [])
    if not np.all(np.isfinite(geom)):
        raise ContractViolation("non-finite geometry in spatial items")
    bboxes = np.empty((n, 4), dtype=np.float64)
    bboxes[:, 0] = np.minimum(geom[:, 0], geom[:, 2])
    bboxes[:, 1] = np.minimum(geom[:, 1], geom[:, 3])
    bboxes[:, 2] = np.maximum(geom[:, 0], geom[:, 2])
    bboxes[:, 3] = np.maximum(geom[:, 1], geom[:, 3])
    kinds, refs, geom, bboxes, levels = _build_levels(bboxes, kinds, refs, geom, fanout)
    return RTree(fanout, kinds, refs, geom, bboxes, levels)


def bulk_load(items: Sequence[SpatialItem], fanout: int = 16) -> RTree:
    kinds = np.fromiter((it.kind for it in items), dtype=np.uint8, count=len(items))
    refs = np.fromiter((it.item_id for it in items), dtype=np.int64, count=len(items))
    geom = np.empty((len(items), 4), dtype=np.float64)
    for i, it in enumerate(items):
        if it.kind == NODE_KIND:
            if not isinstance(it.geometry, Point):
                raise InvalidParameterError(f"item {it.item_id}: node without a Point")
            geom[i] = (it.geometry.x, it.geometry.y, it.geometry.x, it.geometry.y)
        elif it.kind == EDGE_KIND:
            if not isinstance(it.geometry, Segment):
                raise InvalidParameterError(f"item {it.item_id}: edge without a Segment")
            s = it.geometry
            geom[i] = (s.a.x, s.a.y, s.b.x, s.b.y)
        else:
            raise InvalidParameterError(f"item {it.item_id}: unknown kind {it.kind}")
    return from_arrays(kinds, refs, geom, fanout)


def window_query(tree: RTree, window: Rect) -> set[SpatialItem]:
    """All items whose geometry intersects the closed window."""
    return tree.query(window)
