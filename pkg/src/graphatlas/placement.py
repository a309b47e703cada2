"""Greedy packing of laid-out partitions into one global plane.

Partitions are placed in descending order of crossing-edge weight. Each round
enumerates candidate centers on a grid laid over expanding rings around the
union bbox of everything placed so far, keeps the candidates whose padded
bbox clears all placed padded bboxes, and picks the one minimizing the total
length of crossing edges to already-placed partitions. Ties break on lower y,
then lower x.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .geometry import Point, Rect, rects_disjoint
from .layout import LaidOutPartition

__all__ = [
    "PlacerParams",
    "CrossingEdge",
    "GlobalLayout",
    "PlacementRound",
    "place_partitions",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PlacerParams:
    gap: float = 50.0
    grid_step: float | None = None  # None: same as gap
    candidate_ring_limit: int = 3

    def __post_init__(self) -> None:
        if self.gap < 0:
            raise InvalidParameterError("gap must be >= 0", param="gap")
        step = self.grid_step if self.grid_step is not None else self.gap
        if step <= 0:
            raise InvalidParameterError("grid_step must be > 0", param="grid_step")
        if self.candidate_ring_limit < 0:
            raise InvalidParameterError("candidate_ring_limit must be >= 0",
                                        param="candidate_ring_limit")

    @property
    def step(self) -> float:
        return self.grid_step if self.grid_step is not None else self.gap


@dataclass(frozen=True, slots=True)
class CrossingEdge:
    edge_id: int
    src: int
    dst: int
    src_part: int
    dst_part: int


@dataclass
class PlacementRound:
    """Trace record for one greedy round, for inspection and tests."""
    partition_id: int
    offsets_before: dict[int, tuple[float, float]]
    first_feasible_ring: int
    last_ring: int
    candidate_offsets: np.ndarray  # (C, 2) feasible candidates, (y, x) order
    candidate_costs: np.ndarray    # (C,)
    chosen_index: int


@dataclass
class GlobalLayout:
    offsets: dict[int, tuple[float, float]]
    global_xy: np.ndarray  # float64 (n_nodes, 2)
    placed_bboxes: dict[int, Rect]
    crossing: set[int]
    total_crossing_length: float

    def position(self, node_id: int) -> Point:
        x, y = self.global_xy[node_id]
        return Point(float(x), float(y))


def _ring_points(union: Rect, expand: float, step: float) -> np.ndarray:
    """Grid points on the boundary of the union bbox grown by `expand`."""
    r = union.expanded(expand)
    xs = [r.x_min + i * step for i in range(int((r.x_max - r.x_min) / step) + 1)]
    if r.x_max - xs[-1] > 1e-9 * step:
        xs.append(r.x_max)
    ys = [r.y_min + i * step for i in range(int((r.y_max - r.y_min) / step) + 1)]
    if r.y_max - ys[-1] > 1e-9 * step:
        ys.append(r.y_max)
    pts: list[tuple[float, float]] = []
    for x in xs:
        pts.append((x, r.y_min))
        pts.append((x, r.y_max))
    for y in ys[1:-1]:
        pts.append((r.x_min, y))
        pts.append((r.x_max, y))
    return np.array(pts, dtype=np.float64)


def _feasible_mask(bbox: Rect, offs: np.ndarray, placed: np.ndarray, gap: float) -> np.ndarray:
    """offs: (C,2) candidate offsets; placed: (P,4) raw bboxes. Closed-rect
    overlap with gap/2 padding on both sides, touching counts as overlap."""
    cx0 = bbox.x_min + offs[:, 0] - gap / 2.0
    cy0 = bbox.y_min + offs[:, 1] - gap / 2.0
    cx1 = bbox.x_max + offs[:, 0] + gap / 2.0
    cy1 = bbox.y_max + offs[:, 1] + gap / 2.0
    px0 = placed[:, 0] - gap / 2.0
    py0 = placed[:, 1] - gap / 2.0
    px1 = placed[:, 2] + gap / 2.0
    py1 = placed[:, 3] + gap / 2.0
    overlap = (
        (cx0[:, None] <= px1[None, :])
        & (px0[None, :] <= cx1[:, None])
        & (cy0[:, None] <= py1[None, :])
        & (py0[None, :] <= cy1[:, None])
    )
    return ~overlap.any(axis=1)


def _candidate_costs(offs: np.ndarray, ax: np.ndarray, ay: np.ndarray,
                     bx: np.ndarray, by: np.ndarray) -> np.ndarray:
    """Sum of crossing-edge lengths for each candidate offset.

    (ax, ay) are this partition's endpoint positions in its local frame;
    (bx, by) are the partner endpoints' global positions. Chunked so the
    (C, E) intermediate stays small.
    """
    n_off = offs.shape[0]
    costs = np.empty(n_off, dtype=np.float64)
    chunk = max(1, int(4_000_000 // max(1, ax.size)))
    for lo in range(0, n_off, chunk):
        hi = min(n_off, lo + chunk)
        dx = ax[None, :] + offs[lo:hi, 0:1] - bx[None, :]
        dy = ay[None, :] + offs[lo:hi, 1:2] - by[None, :]
        costs[lo:hi] = np.sqrt(dx * dx + dy * dy).sum(axis=1)
    return costs


def place_partitions(
    layouts: Sequence[LaidOutPartition],
    crossing: Sequence[CrossingEdge],
    params: PlacerParams,
    trace: list[PlacementRound] | None = None,
) -> GlobalLayout:
    if not layouts:
        raise InvalidParameterError("layouts is empty", param="layouts")
    by_pid = {lay.partition_id: lay for lay in layouts}
    if len(by_pid) != len(layouts):
        raise InvalidParameterError("duplicate partition ids in layouts")
    for ce in crossing:
        if ce.src_part not in by_pid or ce.dst_part not in by_pid:
            raise InvalidParameterError(
                f"crossing edge {ce.edge_id} references unknown partition"
            )

    weight: dict[int, int] = {pid: 0 for pid in by_pid}
    for ce in crossing:
        weight[ce.src_part] += 1
        weight[ce.dst_part] += 1
    order = sorted(by_pid, key=lambda pid: (-weight[pid], pid))

    # local coordinates of crossing endpoints only, resolved once
    need: dict[int, set[int]] = {pid: set() for pid in by_pid}
    for ce in crossing:
        need[ce.src_part].add(ce.src)
        need[ce.dst_part].add(ce.dst)
    local_pos: dict[int, dict[int, tuple[float, float]]] = {}
    for pid, nodes in need.items():
        lay = by_pid[pid]
        local_pos[pid] = {}
        if not nodes:
            continue
        ids = np.array(sorted(nodes), dtype=np.int64)
        rows = np.searchsorted(lay.member_ids, ids)
        if rows.max() >= lay.member_ids.size or not np.array_equal(
            lay.member_ids[rows], ids
        ):
            raise InvalidParameterError(
                f"crossing endpoints are not members of partition {pid}"
            )
        local_pos[pid] = {
            int(v): (float(lay.xy[r, 0]), float(lay.xy[r, 1]))
            for v, r in zip(ids, rows)
        }

    # crossing edges bucketed by the partition placed later that round
    incident: dict[int, list[CrossingEdge]] = {pid: [] for pid in by_pid}
    for ce in crossing:
        incident[ce.src_part].append(ce)
        incident[ce.dst_part].append(ce)

    offsets: dict[int, tuple[float, float]] = {}
    placed_rows: list[list[float]] = []
    placed_bboxes: dict[int, Rect] = {}
    union: Rect | None = None
    gap = params.gap
    step = params.step

    for round_no, pid in enumerate(order):
        lay = by_pid[pid]
        c = lay.bbox.center()
        if round_no == 0:
            off = (-c.x, -c.y)
        else:
            assert union is not None
            placed = np.array(placed_rows, dtype=np.float64)
            # partner endpoints already placed
            ax_l: list[float] = []
            ay_l: list[float] = []
            bx_l: list[float] = []
            by_l: list[float] = []
            for ce in incident[pid]:
                other = ce.dst_part if ce.src_part == pid else ce.src_part
                if other not in offsets:
                    continue
                mine = ce.src if ce.src_part == pid else ce.dst
                theirs = ce.dst if ce.src_part == pid else ce.src
                lx, ly = local_pos[pid][mine]
                ox, oy = local_pos[other][theirs]
                odx, ody = offsets[other]
                ax_l.append(lx)
                ay_l.append(ly)
                bx_l.append(ox + odx)
                by_l.append(oy + ody)
            ax = np.array(ax_l, dtype=np.float64)
            ay = np.array(ay_l, dtype=np.float64)
            bx = np.array(bx_l, dtype=np.float64)
            by = np.array(by_l, dtype=np.float64)

            feas_offs: list[np.ndarray] = []
            first_feasible = -1
            ring = 0
            while True:
                ring += 1
                pts = _ring_points(union, ring * step, step)
                offs = pts - np.array([c.x, c.y])
                mask = _feasible_mask(lay.bbox, offs, placed, gap)
                if mask.any():
                    if first_feasible < 0:
                        first_feasible = ring
                    feas_offs.append(offs[mask])
                if first_feasible > 0 and ring >= first_feasible + params.candidate_ring_limit:
                    break
                if first_feasible < 0 and ring % 1000 == 0:
                    log.warning("partition %d: no feasible offset within %d rings, expanding",
                                pid, ring)
            cands = np.concatenate(feas_offs, axis=0)
            if ax.size:
                costs = _candidate_costs(cands, ax, ay, bx, by)
            else:
                costs = np.zeros(cands.shape[0], dtype=np.float64)
            # evaluate in (y, x) order so the first minimum wins ties
            perm = np.lexsort((cands[:, 0], cands[:, 1]))
            cands = cands[perm]
            costs = costs[perm]
            best = int(np.argmin(costs))
            off = (float(cands[best, 0]), float(cands[best, 1]))
            if trace is not None:
                trace.append(PlacementRound(
                    partition_id=pid,
                    offsets_before=dict(offsets),
                    first_feasible_ring=first_feasible,
                    last_ring=ring,
                    candidate_offsets=cands,
                    candidate_costs=costs,
                    chosen_index=best,
                ))

        offsets[pid] = off
        rect = lay.bbox.translated(off[0], off[1])
        placed_bboxes[pid] = rect
        placed_rows.append([rect.x_min, rect.y_min, rect.x_max, rect.y_max])
        union = rect if union is None else union.union(rect)

    n_nodes = 1 + max(int(lay.member_ids.max()) for lay in layouts if lay.member_ids.size)
    global_xy = np.zeros((n_nodes, 2), dtype=np.float64)
    for pid, lay in by_pid.items():
        ox, oy = offsets[pid]
        global_xy[lay.member_ids] = lay.xy + np.array([ox, oy])

    total = 0.0
    for ce in crossing:
        d = global_xy[ce.src] - global_xy[ce.dst]
        total += float(np.hypot(d[0], d[1]))

    return GlobalLayout(offsets=offsets, global_xy=global_xy,
                        placed_bboxes=placed_bboxes, crossing={ce.edge_id for ce in crossing},
                        total_crossing_length=total)
