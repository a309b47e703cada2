"""User-facing query operations: window views, the supernode abstraction,
and keyword search.

The abstraction collapses each partition to a supernode at its members'
centroid and each crossing-edge bundle to one weighted superedge. Window
views run against the R-tree of the requested level, truncate deterministically
by ascending item id, and then complete edge endpoints so a client never
receives an edge without both endpoint records.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import InvalidParameterError
from .geometry import Point, Rect, Segment
from .rtree import EDGE_KIND, NODE_KIND, RTree, SpatialItem, bulk_load

if TYPE_CHECKING:
    from .model import Graph
    from .partition import PartitionAssignment
    from .placement import GlobalLayout
    from .store import ServableStore

__all__ = [
    "SuperNode",
    "SuperEdge",
    "ViewResult",
    "SearchHit",
    "abstraction_arrays",
    "build_abstraction",
    "QueryEngine",
    "DEFAULT_MAX_ITEMS",
]

DEFAULT_MAX_ITEMS = 5000


@dataclass(frozen=True, slots=True)
class SuperNode:
    partition_id: int
    centroid: Point
    member_count: int


@dataclass(frozen=True, slots=True)
class SuperEdge:
    part_a: int  # part_a < part_b
    part_b: int
    weight: int


@dataclass(frozen=True, slots=True)
class SearchHit:
    node_id: int
    label: str
    x: float
    y: float
    partition_id: int


@dataclass
class ViewResult:
    """Level 0: ids are NodeIds / edge ids. Level 1: ids are partition ids /
    superedge indices. node_in_window flags geometric containment; endpoint
    completion can pull in records lying outside the window."""
    level: int
    window: Rect
    truncated: bool
    node_ids: np.ndarray
    node_in_window: np.ndarray
    edge_ids: np.ndarray


def abstraction_arrays(
    node_part: np.ndarray, node_xy: np.ndarray,
    edge_src: np.ndarray, edge_dst: np.ndarray, k: int,
) -> tuple[np.ndarray, ...]:
    """Supernode and superedge columns from node partitions and positions.

    Centroids are summed over members in ascending node id order with numpy's
    reduction, so recomputing them from the same inputs is bit-stable.
    Returns (sn_pids, sn_cx, sn_cy, sn_counts, se_a, se_b, se_weight).
    """
    counts = np.bincount(node_part, minlength=k)
    order = np.argsort(node_part, kind="stable")
    bounds = np.cumsum(counts)[:-1]
    sn_pids = np.nonzero(counts)[0].astype(np.int64)
    sn_counts = counts[sn_pids].astype(np.int64)
    sn_cx = np.empty(sn_pids.size, dtype=np.float64)
    sn_cy = np.empty(sn_pids.size, dtype=np.float64)
    groups = np.split(order, bounds)
    for i, pid in enumerate(sn_pids):
        members = groups[pid]
        sn_cx[i] = node_xy[members, 0].sum() / members.size
        sn_cy[i] = node_xy[members, 1].sum() / members.size

    if edge_src.size:
        pa = node_part[edge_src].astype(np.int64)
        pb = node_part[edge_dst].astype(np.int64)
        cross = pa != pb
        lo = np.minimum(pa[cross], pb[cross])
        hi = np.maximum(pa[cross], pb[cross])
        packed, weight = np.unique(lo * k + hi, return_counts=True)
        se_a = packed // k
        se_b = packed % k
        se_weight = weight.astype(np.int64)
    else:
        se_a = np.empty(0, dtype=np.int64)
        se_b = np.empty(0, dtype=np.int64)
        se_weight = np.empty(0, dtype=np.int64)
    return sn_pids, sn_cx, sn_cy, sn_counts, se_a, se_b, se_weight


def abstraction_tree(sn_pids, sn_cx, sn_cy, se_a, se_b, fanout: int = 16) -> RTree:
    """Bulk-loads supernode points and superedge segments into one R-tree."""
    from .rtree import from_arrays

    n_sn = sn_pids.size
    n_se = se_a.size
    kinds = np.concatenate([
        np.full(n_sn, NODE_KIND, dtype=np.uint8),
        np.full(n_se, EDGE_KIND, dtype=np.uint8),
    ])
    refs = np.concatenate([sn_pids, np.arange(n_se, dtype=np.int64)])
    geom = np.empty((n_sn + n_se, 4), dtype=np.float64)
    geom[:n_sn, 0] = sn_cx
    geom[:n_sn, 1] = sn_cy
    geom[:n_sn, 2] = sn_cx
    geom[:n_sn, 3] = sn_cy
    if n_se:
        pos = np.searchsorted(sn_pids, se_a)
        geom[n_sn:, 0] = sn_cx[pos]
        geom[n_sn:, 1] = sn_cy[pos]
        pos = np.searchsorted(sn_pids, se_b)
        geom[n_sn:, 2] = sn_cx[pos]
        geom[n_sn:, 3] = sn_cy[pos]
    return from_arrays(kinds, refs, geom, fanout)


def build_abstraction(
    graph: "Graph", pa: "PartitionAssignment", gl: "GlobalLayout",
) -> tuple[list[SuperNode], list[SuperEdge], RTree]:
    m = graph.n_edges
    edge_src = np.fromiter((e.src for e in graph.edges), dtype=np.int64, count=m)
    edge_dst = np.fromiter((e.dst for e in graph.edges), dtype=np.int64, count=m)
    sn_pids, sn_cx, sn_cy, sn_counts, se_a, se_b, se_weight = abstraction_arrays(
        pa.part_of, gl.global_xy, edge_src, edge_dst, pa.k
    )
    supernodes = [
        SuperNode(int(p), Point(float(x), float(y)), int(c))
        for p, x, y, c in zip(sn_pids, sn_cx, sn_cy, sn_counts)
    ]
    superedges = [
        SuperEdge(int(a), int(b), int(w)) for a, b, w in zip(se_a, se_b, se_weight)
    ]
    tree = abstraction_tree(sn_pids, sn_cx, sn_cy, se_a, se_b)
    return supernodes, superedges, tree


class QueryEngine:
    """Read-only query operations over a servable store."""

    def __init__(self, store: "ServableStore"):
        self.store = store
        self._labels_cf = [lab.casefold() for lab in store.node_labels()]

    def view(self, window: Rect, level: int, max_items: int = DEFAULT_MAX_ITEMS) -> ViewResult:
        if level not in (0, 1):
            raise InvalidParameterError(f"unknown level {level}", param="level")
        if max_items < 1:
            raise InvalidParameterError("max_items must be >= 1", param="max_items")
        st = self.store
        tree = st.tree0 if level == 0 else st.tree1
        rows = tree.query_indices(window.x_min, window.y_min, window.x_max, window.y_max)
        # Truncation orders by ascending item id; a node sorts before the
        # edge sharing its numeric id, so pack (id, kind) into one key.
        key = tree.refs[rows] * 2 + tree.kinds[rows]
        truncated = key.size > max_items
        if truncated:
            key = np.partition(key, max_items - 1)[:max_items]
        key.sort()
        node_ids = key[(key & 1) == 0] >> 1
        edge_ids = key[(key & 1) == 1] >> 1

        # endpoint completion happens after truncation so the spatial hits
        # already cut to max_items never reference a missing record
        if level == 0:
            ea, eb = st.edge_src[edge_ids], st.edge_dst[edge_ids]
            xs, ys = st.node_xy[:, 0], st.node_xy[:, 1]
        else:
            ea, eb = st.se_a[edge_ids], st.se_b[edge_ids]
            xs, ys = None, None  # supernode coordinates resolved below
        endpoints = np.unique(np.concatenate([ea, eb]))
        missing = endpoints[np.isin(endpoints, node_ids, assume_unique=True, invert=True)]
        if missing.size:
            node_ids = np.union1d(node_ids, missing)

        if level == 0:
            nx, ny = xs[node_ids], ys[node_ids]
        else:
            pos = np.searchsorted(st.sn_pids, node_ids)
            nx, ny = st.sn_cx[pos], st.sn_cy[pos]
        in_window = (
            (nx >= window.x_min) & (nx <= window.x_max)
            & (ny >= window.y_min) & (ny <= window.y_max)
        )
        return ViewResult(level=level, window=window, truncated=bool(truncated),
                          node_ids=node_ids, node_in_window=in_window,
                          edge_ids=edge_ids)

    def keyword_search(self, term: str, limit: int = 50) -> list[SearchHit]:
        term = term.strip()
        if not term:
            raise InvalidParameterError("search term is empty", param="term")
        if limit < 1:
            raise InvalidParameterError("limit must be >= 1", param="limit")
        needle = term.casefold()
        st = self.store
        labels = st.label_table
        matches: list[tuple[int, int, int]] = []
        for nid, label_cf in enumerate(self._labels_cf):
            pos = label_cf.find(needle)
            if pos >= 0:
                matches.append((pos, len(labels[nid]), nid))
        top = heapq.nsmallest(limit, matches)
        return [
            SearchHit(node_id=nid, label=labels[nid],
                      x=float(st.node_xy[nid, 0]), y=float(st.node_xy[nid, 1]),
                      partition_id=int(st.node_part[nid]))
            for _, _, nid in top
        ]
