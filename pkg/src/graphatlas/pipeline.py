"""End-to-end preprocessing: ingest output -> partition -> per-partition
layout -> global placement -> abstraction -> spatial indexes -> servable
store. Each stage is timed for the build report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .geometry import Rect
from .layout import LaidOutPartition, LayoutParams, layout_partition
from .model import Graph
from .partition import PartitionAssignment, PartitionerParams, partition
from .placement import CrossingEdge, GlobalLayout, PlacerParams, place_partitions
from .query import abstraction_arrays, abstraction_tree
from .rtree import EDGE_KIND, NODE_KIND, from_arrays
from .store import FORMAT_VERSION, ServableStore, StoreManifest

__all__ = ["PipelineParams", "PipelineReport", "build_store", "default_k"]


@dataclass(frozen=True, slots=True)
class PipelineParams:
    k: int | None = None  # None: one partition per ~2000 nodes
    balance_eps: float = 0.05
    max_fm_passes: int = 10
    edge_length: float = 60.0
    iterations: int = 300
    initial_temperature: float | None = None
    margin: float = 30.0
    gap: float = 50.0
    grid_step: float | None = None
    candidate_ring_limit: int = 3
    fanout: int = 16
    seed: int = 0


@dataclass
class PipelineReport:
    n_nodes: int
    n_edges: int
    k: int
    cut_size: int
    total_crossing_length: float
    bbox: Rect
    timings: dict[str, float] = field(default_factory=dict)

    def format(self) -> str:
        b = self.bbox
        lines = [
            f"nodes                  {self.n_nodes}",
            f"edges                  {self.n_edges}",
            f"partitions             {self.k}",
            f"cut size               {self.cut_size}",
            f"total crossing length  {self.total_crossing_length:.1f}",
            f"global bbox            [{b.x_min:.1f}, {b.y_min:.1f}] .. "
            f"[{b.x_max:.1f}, {b.y_max:.1f}]",
        ]
        for stage, seconds in self.timings.items():
            lines.append(f"{stage + ' time':<22} {seconds:.2f}s")
        return "\n".join(lines)


def default_k(n_nodes: int) -> int:
    return max(1, -(-n_nodes // 2000))


def _partition_seed(base: int, pid: int) -> int:
    # one independent, reproducible stream per partition
    return int(np.random.SeedSequence([base, pid]).generate_state(1, np.uint64)[0])


def build_store(graph: Graph, params: PipelineParams = PipelineParams()) -> tuple[ServableStore, PipelineReport]:
    if graph.n_nodes == 0:
        raise InvalidParameterError("graph is empty")
    k = params.k if params.k is not None else default_k(graph.n_nodes)
    timings: dict[str, float] = {}

    t = time.perf_counter()
    pa = partition(graph, PartitionerParams(
        k=k, balance_eps=params.balance_eps,
        max_fm_passes=params.max_fm_passes, seed=params.seed,
    ))
    timings["partition"] = time.perf_counter() - t

    t = time.perf_counter()
    part = pa.part_of
    m = graph.n_edges
    edge_src = np.fromiter((e.src for e in graph.edges), dtype=np.int64, count=m)
    edge_dst = np.fromiter((e.dst for e in graph.edges), dtype=np.int64, count=m)
    cross_mask = part[edge_src] != part[edge_dst] if m else np.zeros(0, dtype=bool)

    order = np.argsort(part, kind="stable")
    bounds = np.cumsum(np.bincount(part, minlength=k))[:-1]
    member_groups = np.split(order, bounds)

    intra_ids = np.nonzero(~cross_mask)[0]
    intra_by_part: dict[int, list[int]] = {}
    if intra_ids.size:
        intra_part = part[edge_src[intra_ids]]
        for eid, p in zip(intra_ids.tolist(), intra_part.tolist()):
            intra_by_part.setdefault(p, []).append(eid)

    layouts: list[LaidOutPartition] = []
    for pid in range(k):
        members = member_groups[pid]
        if members.size == 0:
            continue
        lp = LayoutParams(
            ideal_edge_length=params.edge_length,
            iterations=params.iterations,
            initial_temperature=params.initial_temperature,
            margin=params.margin,
            seed=_partition_seed(params.seed, pid),
        )
        layouts.append(layout_partition(
            graph, members.tolist(), intra_by_part.get(pid, []), lp, partition_id=pid,
        ))
    timings["layout"] = time.perf_counter() - t

    t = time.perf_counter()
    crossing = [
        CrossingEdge(edge_id=int(eid),
                     src=int(edge_src[eid]), dst=int(edge_dst[eid]),
                     src_part=int(part[edge_src[eid]]),
                     dst_part=int(part[edge_dst[eid]]))
        for eid in np.nonzero(cross_mask)[0]
    ]
    gl = place_partitions(layouts, crossing, PlacerParams(
        gap=params.gap, grid_step=params.grid_step,
        candidate_ring_limit=params.candidate_ring_limit,
    ))
    timings["placement"] = time.perf_counter() - t

    t = time.perf_counter()
    sn_pids, sn_cx, sn_cy, sn_counts, se_a, se_b, se_weight = abstraction_arrays(
        part, gl.global_xy, edge_src, edge_dst, k)
    tree1 = abstraction_tree(sn_pids, sn_cx, sn_cy, se_a, se_b, params.fanout)

    kinds = np.concatenate([
        np.full(graph.n_nodes, NODE_KIND, dtype=np.uint8),
        np.full(m, EDGE_KIND, dtype=np.uint8),
    ])
    refs = np.concatenate([
        np.arange(graph.n_nodes, dtype=np.int64),
        np.arange(m, dtype=np.int64),
    ])
    geom = np.empty((graph.n_nodes + m, 4), dtype=np.float64)
    geom[:graph.n_nodes, 0] = gl.global_xy[:, 0]
    geom[:graph.n_nodes, 1] = gl.global_xy[:, 1]
    geom[:graph.n_nodes, 2] = gl.global_xy[:, 0]
    geom[:graph.n_nodes, 3] = gl.global_xy[:, 1]
    if m:
        geom[graph.n_nodes:, 0] = gl.global_xy[edge_src, 0]
        geom[graph.n_nodes:, 1] = gl.global_xy[edge_src, 1]
        geom[graph.n_nodes:, 2] = gl.global_xy[edge_dst, 0]
        geom[graph.n_nodes:, 3] = gl.global_xy[edge_dst, 1]
    tree0 = from_arrays(kinds, refs, geom, params.fanout)
    timings["indexing"] = time.perf_counter() - t

    t = time.perf_counter()
    # label table: node labels in id order, then distinct edge labels
    label_table = [nd.label for nd in graph.nodes]
    label_idx: dict[str, int] = {}
    edge_label_idx = np.full(m, -1, dtype=np.int64)
    for e in graph.edges:
        if e.label is None:
            continue
        idx = label_idx.get(e.label)
        if idx is None:
            idx = len(label_table)
            label_idx[e.label] = idx
            label_table.append(e.label)
        edge_label_idx[e.id] = idx

    bbox = _global_bbox(gl, params.gap)
    manifest = StoreManifest(
        format_version=FORMAT_VERSION,
        counts={
            "nodes": graph.n_nodes,
            "edges": m,
            "partitions": k,
            "crossing_edges": pa.cut_size,
        },
        bbox=bbox,
        params={
            "k": k,
            "balance_eps": params.balance_eps,
            "max_fm_passes": params.max_fm_passes,
            "edge_length": params.edge_length,
            "iterations": params.iterations,
            "initial_temperature": params.initial_temperature,
            "margin": params.margin,
            "gap": params.gap,
            "grid_step": params.grid_step,
            "candidate_ring_limit": params.candidate_ring_limit,
            "fanout": params.fanout,
            "seed": params.seed,
        },
    )
    servable = ServableStore(
        manifest=manifest,
        node_xy=gl.global_xy,
        node_part=part.astype(np.int32),
        edge_src=edge_src, edge_dst=edge_dst, edge_label_idx=edge_label_idx,
        label_table=label_table,
        tree0=tree0, tree1=tree1,
        sn_pids=sn_pids, sn_cx=sn_cx, sn_cy=sn_cy, sn_counts=sn_counts,
        se_a=se_a, se_b=se_b, se_weight=se_weight,
    )
    timings["assembly"] = time.perf_counter() - t

    report = PipelineReport(
        n_nodes=graph.n_nodes, n_edges=m, k=k,
        cut_size=pa.cut_size,
        total_crossing_length=gl.total_crossing_length,
        bbox=bbox, timings=timings,
    )
    return servable, report


def _global_bbox(gl: GlobalLayout, gap: float) -> Rect:
    union: Rect | None = None
    for rect in gl.placed_bboxes.values():
        union = rect if union is None else union.union(rect)
    assert union is not None
    return union.expanded(gap)
