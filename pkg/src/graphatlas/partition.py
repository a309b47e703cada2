"""Balanced k-way partitioning: BFS region growing plus boundary refinement.

The initial assignment grows one region at a time to its quota: each region
starts from an unassigned seed far away from everything assigned so far and
expands breadth-first through unassigned nodes only. Components are consumed
largest-first; a region spills into the next component only when its current
one runs out. Refinement then runs Fiduccia-Mattheyses style passes over
boundary nodes, applying only moves that strictly reduce the cut while
keeping every partition within the balance cap.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .model import Graph

__all__ = [
    "PartitionerParams",
    "PartitionAssignment",
    "partition",
    "initial_assignment",
    "fm_refine",
    "crossing_edges",
    "cut_size",
]


@dataclass(frozen=True, slots=True)
class PartitionerParams:
    k: int
    balance_eps: float = 0.05
    max_fm_passes: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidParameterError("k must be >= 1", param="k")
        if self.balance_eps < 0:
            raise InvalidParameterError("balance_eps must be >= 0", param="balance_eps")
        if self.max_fm_passes < 0:
            raise InvalidParameterError("max_fm_passes must be >= 0", param="max_fm_passes")


@dataclass(frozen=True)
class PartitionAssignment:
    part_of: np.ndarray  # int32, one partition id per node
    k: int
    balance_eps: float
    cut_size: int


def _edge_arrays(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    m = graph.n_edges
    src = np.fromiter((e.src for e in graph.edges), dtype=np.int64, count=m)
    dst = np.fromiter((e.dst for e in graph.edges), dtype=np.int64, count=m)
    return src, dst


def cut_size(graph: Graph, part_of: np.ndarray) -> int:
    if graph.n_edges == 0:
        return 0
    src, dst = _edge_arrays(graph)
    return int(np.count_nonzero(part_of[src] != part_of[dst]))


def _neighbor_lists(graph: Graph) -> list[list[int]]:
    nbrs: list[list[int]] = [[] for _ in range(graph.n_nodes)]
    for e in graph.edges:
        nbrs[e.src].append(e.dst)
        nbrs[e.dst].append(e.src)
    return nbrs


def _components(n: int, nbrs: list[list[int]]) -> list[list[int]]:
    seen = bytearray(n)
    comps: list[list[int]] = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = 1
        comp = [start]
        queue = deque((start,))
        while queue:
            v = queue.popleft()
            for u in nbrs[v]:
                if not seen[u]:
                    seen[u] = 1
                    comp.append(u)
                    queue.append(u)
        comps.append(comp)
    return comps


def _csr(n: int, graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Adjacency in CSR form (both directions) for vectorized BFS sweeps."""
    src, dst = _edge_arrays(graph) if graph.n_edges else (
        np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    heads = np.concatenate([src, dst])
    order = np.argsort(heads, kind="stable")
    idx = np.concatenate([dst, src])[order]
    counts = np.bincount(heads, minlength=n)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, idx


def _frontier_neighbors(ptr: np.ndarray, idx: np.ndarray,
                        frontier: np.ndarray) -> np.ndarray:
    counts = ptr[frontier + 1] - ptr[frontier]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.arange(total, dtype=np.int64) \
        - np.repeat(np.cumsum(counts) - counts, counts)
    return idx[np.repeat(ptr[frontier], counts) + offsets]


def _farthest_unassigned(ptr: np.ndarray, idx: np.ndarray, in_comp: np.ndarray,
                         assigned: np.ndarray) -> int:
    """Unassigned node of the component at maximum BFS depth from the
    already-assigned set (smallest id on depth ties). Level-synchronous BFS
    through unassigned nodes only; every unassigned pocket touches the
    assigned set because the component is connected."""
    visited = assigned | ~in_comp
    frontier = np.flatnonzero(in_comp & assigned)
    best = -1
    while frontier.size:
        nbr = _frontier_neighbors(ptr, idx, frontier)
        nbr = nbr[~visited[nbr]]
        if nbr.size == 0:
            break
        frontier = np.unique(nbr)
        visited[frontier] = True
        best = int(frontier[0])
    return best


def _grow_region(seed_node: int, p: int, quota_left: int, part: np.ndarray,
                 nbrs: list[list[int]]) -> int:
    """BFS from seed_node across unassigned nodes, assigning them to p until
    quota_left is reached or the reachable pocket is exhausted."""
    part[seed_node] = p
    taken = 1
    queue = deque((seed_node,))
    while queue and taken < quota_left:
        v = queue.popleft()
        for u in nbrs[v]:
            if part[u] < 0:
                part[u] = p
                taken += 1
                queue.append(u)
                if taken == quota_left:
                    break
    return taken


def _peripheral_seed(comp: list[int], nbrs: list[list[int]], rng: random.Random) -> int:
    """A node far from a random probe: BFS from the probe, take the last
    level's smallest id. Starting growth at the component's periphery keeps
    the sweep from splitting the middle of small structures."""
    probe = comp[rng.randrange(len(comp))]
    dist = {probe: 0}
    queue = deque((probe,))
    far_dist = 0
    far_node = probe
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if dv > far_dist or (dv == far_dist and v < far_node):
            far_dist, far_node = dv, v
        for u in nbrs[v]:
            if u not in dist:
                dist[u] = dv + 1
                queue.append(u)
    return far_node


def initial_assignment(graph: Graph, params: PartitionerParams) -> np.ndarray:
    """Seeded BFS region growing, one region at a time.

    Each region starts at a seed far from everything assigned so far (the
    periphery of a fresh component, or the deepest unassigned node measured
    from the assigned set) and grows breadth-first through unassigned nodes
    until it hits its quota. Components are consumed largest-first; a region
    spans two components only when its current one runs out of nodes."""
    n = graph.n_nodes
    k = params.k
    nbrs = _neighbor_lists(graph)
    comps = _components(n, nbrs)
    comps.sort(key=lambda c: (-len(c), min(c)))
    base, rem = divmod(n, k)
    quotas = [base + (p < rem) for p in range(k)]

    rng = random.Random(params.seed)
    part = np.full(n, -1, dtype=np.int32)
    ptr, idx = _csr(n, graph)
    comp_of = np.empty(n, dtype=np.int32)
    for ci, comp in enumerate(comps):
        comp_of[np.asarray(comp, dtype=np.int64)] = ci
    left_in_comp = [len(c) for c in comps]
    ci = 0
    for p in range(k):
        need = quotas[p]
        while need:
            while left_in_comp[ci] == 0:
                ci += 1
            comp = comps[ci]
            if left_in_comp[ci] == len(comp):
                seed_node = _peripheral_seed(comp, nbrs, rng)
            else:
                seed_node = _farthest_unassigned(ptr, idx, comp_of == ci,
                                                 part >= 0)
            got = _grow_region(seed_node, p, need, part, nbrs)
            need -= got
            left_in_comp[ci] -= got
    return part


def _balance_cap(n: int, k: int, eps: float) -> int:
    ceil_nk = -(-n // k)
    return int(math.floor((1.0 + eps) * ceil_nk + 1e-9))


def fm_refine(graph: Graph, part: np.ndarray, params: PartitionerParams) -> int:
    """In-place boundary refinement passes. Returns total cut reduction.

    Lazy-heap variant: entries are (-gain, node, target, version); a node's
    version is bumped whenever a neighbor moves, invalidating stale entries.
    Only strictly positive gains are applied; a node moves at most once per
    pass. Equal-gain moves pop in ascending node id order.
    """
    n = graph.n_nodes
    k = params.k
    if k == 1 or graph.n_edges == 0:
        return 0
    cap = _balance_cap(n, k, params.balance_eps)
    nbrs = _neighbor_lists(graph)
    src, dst = _edge_arrays(graph)
    sizes = np.bincount(part, minlength=k).tolist()
    total_gain = 0

    def best_move(v: int) -> tuple[int, int] | None:
        p = int(part[v])
        tally: dict[int, int] = {}
        for u in nbrs[v]:
            q = int(part[u])
            tally[q] = tally.get(q, 0) + 1
        internal = tally.get(p, 0)
        best_g = 0
        best_q = -1
        for q, cnt in tally.items():
            if q == p or sizes[q] + 1 > cap:
                continue
            g = cnt - internal
            if g > best_g or (g == best_g and best_g > 0 and q < best_q):
                best_g, best_q = g, q
        if best_q < 0:
            return None
        return best_g, best_q

    for _ in range(params.max_fm_passes):
        cross = part[src] != part[dst]
        boundary = np.unique(np.concatenate([src[cross], dst[cross]]))
        if boundary.size == 0:
            break
        locked = bytearray(n)
        ver = [0] * n
        heap: list[tuple[int, int, int, int]] = []
        for v in boundary.tolist():
            mv = best_move(v)
            if mv is not None:
                heap.append((-mv[0], v, mv[1], 0))
        heapq.heapify(heap)
        pass_gain = 0
        while heap:
            neg_g, v, tgt, pver = heapq.heappop(heap)
            if locked[v] or pver != ver[v]:
                continue
            if sizes[tgt] + 1 > cap:
                continue  # filled up since push; a neighbor event may requeue v
            p = int(part[v])
            part[v] = tgt
            sizes[p] -= 1
            sizes[tgt] += 1
            locked[v] = 1
            pass_gain += -neg_g
            for u in nbrs[v]:
                if locked[u]:
                    continue
                ver[u] += 1
                mv = best_move(u)
                if mv is not None:
                    heapq.heappush(heap, (-mv[0], u, mv[1], ver[u]))
        total_gain += pass_gain
        if pass_gain == 0:
            break
    return total_gain


def partition(graph: Graph, params: PartitionerParams) -> PartitionAssignment:
    n = graph.n_nodes
    if n == 0:
        raise InvalidParameterError("graph is empty")
    if params.k > n:
        raise InvalidParameterError(f"k={params.k} exceeds node count {n}", param="k")
    part = initial_assignment(graph, params)
    before = cut_size(graph, part)
    if params.max_fm_passes > 0:
        gain = fm_refine(graph, part, params)
    else:
        gain = 0
    after = cut_size(graph, part)
    assert after == before - gain, "refinement bookkeeping out of sync"
    part.setflags(write=False)
    return PartitionAssignment(part_of=part, k=params.k,
                               balance_eps=params.balance_eps, cut_size=after)


def crossing_edges(graph: Graph, pa: PartitionAssignment) -> set[int]:
    """Edge ids whose endpoints lie in different partitions."""
    if pa.part_of.shape[0] != graph.n_nodes:
        raise InvalidParameterError("assignment does not cover the graph")
    if graph.n_edges == 0:
        return set()
    src, dst = _edge_arrays(graph)
    mask = pa.part_of[src] != pa.part_of[dst]
    return set(np.nonzero(mask)[0].tolist())
