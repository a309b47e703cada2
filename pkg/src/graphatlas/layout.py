"""Force-directed layout of a single partition on its local plane.

Fruchterman-Reingold with all-pairs repulsion L^2/d, attraction d^2/L along
intra-partition edges, and linear cooling to zero. The O(n^2) inner loop is
compiled with numba; partitions are capped around two thousand nodes, so a
full pass stays cheap. Crossing edges exert no forces here at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from numba import njit

from .errors import ContractViolation, InvalidParameterError
from .geometry import Point, Rect
from .model import Graph

__all__ = ["LayoutParams", "LaidOutPartition", "layout_partition", "local_bbox"]


@dataclass(frozen=True, slots=True)
class LayoutParams:
    ideal_edge_length: float = 60.0
    iterations: int = 300
    initial_temperature: float | None = None  # None: 0.1 * sqrt(layout area)
    seed: int = 0
    margin: float = 30.0

    def __post_init__(self) -> None:
        if self.ideal_edge_length <= 0:
            raise InvalidParameterError("ideal_edge_length must be > 0",
                                        param="ideal_edge_length")
        if self.iterations < 0:
            raise InvalidParameterError("iterations must be >= 0", param="iterations")
        if self.margin < 0:
            raise InvalidParameterError("margin must be >= 0", param="margin")


@dataclass
class LaidOutPartition:
    partition_id: int
    member_ids: np.ndarray  # int64, ascending
    xy: np.ndarray          # float64 (n, 2), row i is member_ids[i]
    bbox: Rect
    _positions: dict[int, Point] | None = field(default=None, repr=False)

    @property
    def positions(self) -> Mapping[int, Point]:
        if self._positions is None:
            self._positions = {
                int(v): Point(float(x), float(y))
                for v, (x, y) in zip(self.member_ids, self.xy)
            }
        return self._positions


@njit(cache=True)
def _fr_iterations(x, y, es, ed, L, t0, iterations):  # pragma: no cover - jitted
    n = x.shape[0]
    m = es.shape[0]
    L2 = L * L
    fx = np.empty(n, dtype=np.float64)
    fy = np.empty(n, dtype=np.float64)
    for it in range(iterations):
        t = t0 * (1.0 - it / iterations)
        for i in range(n):
            fx[i] = 0.0
            fy[i] = 0.0
        # repulsion between all pairs
        for i in range(n):
            xi = x[i]
            yi = y[i]
            gx = 0.0
            gy = 0.0
            for j in range(i + 1, n):
                dx = xi - x[j]
                dy = yi - y[j]
                d2 = dx * dx + dy * dy
                if d2 < 1e-18:  # clamp at d = 1e-9
                    d2 = 1e-18
                    dx = 1e-9
                    dy = 0.0
                inv = L2 / d2
                rx = dx * inv
                ry = dy * inv
                gx += rx
                gy += ry
                fx[j] -= rx
                fy[j] -= ry
            fx[i] += gx
            fy[i] += gy
        # attraction along intra edges
        for e in range(m):
            a = es[e]
            b = ed[e]
            dx = x[a] - x[b]
            dy = y[a] - y[b]
            d = math.sqrt(dx * dx + dy * dy)
            if d < 1e-9:
                continue
            w = d / L  # force d^2/L applied along the unit vector: d/L per axis
            ax = dx * w
            ay = dy * w
            fx[a] -= ax
            fy[a] -= ay
            fx[b] += ax
            fy[b] += ay
        # move, displacement capped at the current temperature
        for i in range(n):
            fm = math.sqrt(fx[i] * fx[i] + fy[i] * fy[i])
            if fm < 1e-12:
                continue
            s = min(fm, t) / fm
            x[i] += fx[i] * s
            y[i] += fy[i] * s


def _initial_positions(n: int, L: float, rng: np.random.Generator) -> np.ndarray:
    side = math.sqrt(n) * L
    pos = rng.random((n, 2)) * side
    # jitter exact duplicates so repulsion has a direction to push along
    while True:
        seen: dict[tuple[float, float], int] = {}
        dups = []
        for i in range(n):
            key = (pos[i, 0], pos[i, 1])
            if key in seen:
                dups.append(i)
            else:
                seen[key] = i
        if not dups:
            return pos
        noise = (rng.random((len(dups), 2)) - 0.5) * 2e-3 * L
        pos[dups] += noise


def layout_partition(graph: Graph, members: Iterable[int], intra_edges: Iterable[int],
                     params: LayoutParams, partition_id: int = 0) -> LaidOutPartition:
    member_ids = np.array(sorted(set(int(v) for v in members)), dtype=np.int64)
    n = member_ids.shape[0]
    if n == 0:
        raise InvalidParameterError("members is empty", param="members")
    index = {int(v): i for i, v in enumerate(member_ids)}

    edge_ids = sorted(set(int(e) for e in intra_edges))
    es = np.empty(len(edge_ids), dtype=np.int64)
    ed = np.empty(len(edge_ids), dtype=np.int64)
    for i, eid in enumerate(edge_ids):
        e = graph.edges[eid]
        if e.src not in index or e.dst not in index:
            raise ContractViolation(
                f"edge {eid} endpoint outside partition {partition_id}"
            )
        es[i] = index[e.src]
        ed[i] = index[e.dst]

    if n == 1:
        xy = np.zeros((1, 2), dtype=np.float64)
    else:
        rng = np.random.default_rng(params.seed)
        xy = _initial_positions(n, params.ideal_edge_length, rng)
        t0 = params.initial_temperature
        if t0 is None:
            area = n * params.ideal_edge_length ** 2
            t0 = 0.1 * math.sqrt(area)
        if params.iterations > 0:
            x = np.ascontiguousarray(xy[:, 0])
            y = np.ascontiguousarray(xy[:, 1])
            _fr_iterations(x, y, es, ed, params.ideal_edge_length,
                           float(t0), params.iterations)
            xy = np.column_stack((x, y))
        if not np.all(np.isfinite(xy)):
            raise ContractViolation(f"non-finite layout in partition {partition_id}")

    bbox = _bbox_of(xy, params.margin)
    return LaidOutPartition(partition_id=partition_id, member_ids=member_ids,
                            xy=xy, bbox=bbox)


def _bbox_of(xy: np.ndarray, margin: float) -> Rect:
    return Rect(
        float(xy[:, 0].min()) - margin,
        float(xy[:, 1].min()) - margin,
        float(xy[:, 0].max()) + margin,
        float(xy[:, 1].max()) + margin,
    )


def local_bbox(positions: Mapping[int, Point], margin: float) -> Rect:
    """Smallest rect containing all points, grown by margin on each side."""
    if not positions:
        raise InvalidParameterError("positions is empty", param="positions")
    if margin < 0:
        raise InvalidParameterError("margin must be >= 0", param="margin")
    xs = [p.x for p in positions.values()]
    ys = [p.y for p in positions.values()]
    return Rect(min(xs) - margin, min(ys) - margin, max(xs) + margin, max(ys) + margin)
