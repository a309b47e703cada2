"""Bulk-loaded R-tree vs exhaustive enumeration on many datasets."""
from __future__ import annotations

import numpy as np
import pytest

from graphatlas.errors import ContractViolation, InvalidParameterError
from graphatlas.geometry import Point, Rect, Segment
from graphatlas.rtree import (EDGE_KIND, NODE_KIND, RTree, SpatialItem, bulk_load,
                              from_arrays, window_query)
from oracles import check_rtree_invariants, scan_window


def random_items(n_points: int, n_segments: int, seed: int, span: float = 1000.0):
    """Raw columnar item arrays with a mix of spreads and degeneracies."""
    rng = np.random.default_rng(seed)
    n = n_points + n_segments
    kinds = np.concatenate([np.zeros(n_points, np.uint8), np.ones(n_segments, np.uint8)])
    refs = np.concatenate([np.arange(n_points), np.arange(n_segments)]).astype(np.int64)
    geom = np.empty((n, 4))
    pts = rng.uniform(-span, span, (n_points, 2))
    if n_points:  # clump some points to stress duplicate centers
        pts[: n_points // 10] = pts[0]
    geom[:n_points, 0] = geom[:n_points, 2] = pts[:, 0]
    geom[:n_points, 1] = geom[:n_points, 3] = pts[:, 1]
    a = rng.uniform(-span, span, (n_segments, 2))
    b = a + rng.normal(0, span / 8, (n_segments, 2))
    b[: n_segments // 10, 0] = a[: n_segments // 10, 0]  # vertical segments
    b[n_segments // 10: n_segments // 5, 1] = a[n_segments // 10: n_segments // 5, 1]
    geom[n_points:, 0:2] = a
    geom[n_points:, 2:4] = b
    return kinds, refs, geom


def query_set(tree: RTree, window: Rect) -> set[tuple[int, int]]:
    rows = tree.query_indices(window.x_min, window.y_min, window.x_max, window.y_max)
    return {(int(tree.kinds[r]), int(tree.refs[r])) for r in rows}


# -- trivial cases ----------------------------------------------------------------

def test_empty_tree():
    tree = bulk_load([])
    assert tree.count == 0
    assert tree.height == 0
    assert tree.root_bbox is None
    assert window_query(tree, Rect(-1e9, -1e9, 1e9, 1e9)) == set()


def test_single_item_tree():
    item = SpatialItem(NODE_KIND, 7, Point(3, 4), Rect(3, 4, 3, 4))
    tree = bulk_load([item])
    assert tree.count == 1
    assert tree.height == 1
    assert window_query(tree, Rect(0, 0, 10, 10)) == {item}
    assert window_query(tree, Rect(5, 5, 10, 10)) == set()


def test_whole_plane_returns_everything_disjoint_returns_nothing():
    kinds, refs, geom = random_items(80, 40, seed=1)
    tree = from_arrays(kinds, refs, geom)
    everything = query_set(tree, Rect(-1e7, -1e7, 1e7, 1e7))
    assert len(everything) == 120
    rb = tree.root_bbox
    far = Rect(rb.x_max + 10, rb.y_max + 10, rb.x_max + 20, rb.y_max + 20)
    assert query_set(tree, far) == set()


# -- structure -----------------------------------------------------------------------

def test_thousand_items_structure_and_full_retrieval():
    kinds, refs, geom = random_items(600, 400, seed=2)
    tree = from_arrays(kinds, refs, geom, fanout=16)
    assert tree.count == 1000
    check_rtree_invariants(tree)
    # every inserted item reachable exactly once by a whole-plane query
    rows = tree.query_indices(-1e9, -1e9, 1e9, 1e9)
    assert np.array_equal(rows, np.arange(1000))
    assert query_set(tree, Rect(-1e9, -1e9, 1e9, 1e9)) == \
        {(int(k), int(r)) for k, r in zip(kinds, refs)}


def test_structure_at_many_sizes_and_fanouts():
    for n_pts, n_segs, fanout in ((1, 0, 2), (5, 3, 4), (17, 0, 16),
                                  (64, 64, 8), (33, 98, 16), (256, 0, 3)):
        kinds, refs, geom = random_items(n_pts, n_segs, seed=n_pts + n_segs + fanout)
        tree = from_arrays(kinds, refs, geom, fanout=fanout)
        check_rtree_invariants(tree)
        assert tree.count == n_pts + n_segs


def test_all_items_identical_position():
    # complete degeneracy: every center equal, sorting falls back to ids
    n = 100
    geom = np.tile([5.0, 5.0, 5.0, 5.0], (n, 1))
    tree = from_arrays(np.zeros(n, np.uint8), np.arange(n, dtype=np.int64), geom)
    check_rtree_invariants(tree)
    assert query_set(tree, Rect(5, 5, 5, 5)) == {(0, i) for i in range(n)}
    assert query_set(tree, Rect(5.1, 5, 6, 6)) == set()


# -- oracle equivalence ----------------------------------------------------------------

def window_samples(rng, span):
    cx, cy = rng.uniform(-span, span, 2)
    w, h = rng.uniform(0, span / 2, 2)
    return Rect(cx - w, cy - h, cx + w, cy + h)


def test_query_matches_linear_scan_on_five_datasets():
    datasets = [
        random_items(300, 200, seed=10),
        random_items(500, 0, seed=11),          # points only
        random_items(0, 400, seed=12),          # segments only
        random_items(150, 150, seed=13, span=3),  # dense: everything overlaps
        random_items(1000, 500, seed=14),
    ]
    rng = np.random.default_rng(99)
    for di, (kinds, refs, geom) in enumerate(datasets):
        tree = from_arrays(kinds, refs, geom)
        span = max(1.0, float(np.abs(geom).max()))
        for _ in range(200):
            win = window_samples(rng, span)
            assert query_set(tree, win) == scan_window(kinds, refs, geom, win), \
                (di, win)


def test_boundary_point_is_included():
    items = [SpatialItem(NODE_KIND, 0, Point(1, 1), Rect(1, 1, 1, 1)),
             SpatialItem(NODE_KIND, 1, Point(2, 2), Rect(2, 2, 2, 2))]
    tree = bulk_load(items)
    # node exactly on the window edge / corner
    assert query_set(tree, Rect(1, 0, 2, 0.5)) == set()
    assert query_set(tree, Rect(0, 0, 1, 1)) == {(0, 0)}
    assert query_set(tree, Rect(1, 1, 2, 2)) == {(0, 0), (0, 1)}


def test_segment_through_window_without_vertex_inside():
    seg = SpatialItem(EDGE_KIND, 0,
                      Segment(Point(-10, 0), Point(10, 0)), Rect(-10, 0, 10, 0))
    diag = SpatialItem(EDGE_KIND, 1,
                       Segment(Point(3, 0), Point(0, 3)), Rect(0, 0, 3, 3))
    tree = bulk_load([seg, diag])
    assert query_set(tree, Rect(-1, -1, 1, 1)) == {(1, 0)}  # diag misses [0,1]^2 area
    assert query_set(tree, Rect(1, 1, 2, 2)) == {(1, 1)}    # on x+y=3? no: touches at (1,2)-(2,1) line inside
    assert query_set(tree, Rect(-0.5, -0.5, 0.5, 0.5)) == {(1, 0)}


def test_exact_filter_on_near_miss_diagonal():
    # bbox overlaps the window but the segment passes just outside the corner
    diag = SpatialItem(EDGE_KIND, 5, Segment(Point(3, 0), Point(0, 3)), Rect(0, 0, 3, 3))
    tree = bulk_load([diag])
    assert query_set(tree, Rect(0, 0, 1, 1)) == set()
    assert query_set(tree, Rect(0, 0, 1.5, 1.5)) == {(1, 5)}
    # touching exactly at one point counts (closed semantics)
    assert query_set(tree, Rect(0.5, 0.5, 1.5, 1.5)) == {(1, 5)}


def test_item_at_round_trips_spatial_items():
    items = [SpatialItem(NODE_KIND, 3, Point(1, 2), Rect(1, 2, 1, 2)),
             SpatialItem(EDGE_KIND, 9, Segment(Point(0, 0), Point(4, 4)),
                         Rect(0, 0, 4, 4))]
    tree = bulk_load(items)
    got = {tree.item_at(i) for i in range(tree.count)}
    assert got == set(items)


# -- validation --------------------------------------------------------------------------

def test_fanout_and_geometry_validation():
    with pytest.raises(InvalidParameterError):
        from_arrays(np.zeros(1, np.uint8), np.zeros(1, np.int64),
                    np.zeros((1, 4)), fanout=1)
    bad = np.array([[0.0, 0.0, np.nan, 1.0]])
    with pytest.raises(ContractViolation):
        from_arrays(np.ones(1, np.uint8), np.zeros(1, np.int64), bad)
    with pytest.raises(InvalidParameterError):
        bulk_load([SpatialItem(NODE_KIND, 0, Segment(Point(0, 0), Point(1, 1)),
                               Rect(0, 0, 1, 1))])
    with pytest.raises(InvalidParameterError):
        bulk_load([SpatialItem(2, 0, Point(0, 0), Rect(0, 0, 0, 0))])
