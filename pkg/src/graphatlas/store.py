"""Disk persistence of the preprocessing output.

A store directory holds manifest.json plus five binary sections (node table,
edge table, label table, and the two R-trees), little-endian fixed-width
records with a CRC-32 per section. Writes go to temp files renamed into
place, manifest last, so a failed persist never leaves a loadable store.
Identical pipeline outputs persist to byte-identical files; see FORMAT.md
for the exact layouts.

The abstraction columns (supernode centroids/counts, superedge weights) are
not separate sections: they are recomputed on load from the node and edge
tables with the same deterministic reduction the pipeline used, and the
level-1 tree geometry is validated against them.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    StoreCorruptError,
    StoreError,
    StoreIOError,
    StoreVersionError,
)
from .geometry import Rect
from .query import abstraction_arrays, abstraction_tree
from .rtree import RTree, _Level

__all__ = ["FORMAT_VERSION", "StoreManifest", "ServableStore", "persist", "load"]

FORMAT_VERSION = 1

MANIFEST = "manifest.json"

# file name -> human-readable section name used in error messages
SECTIONS = {
    "nodes.bin": "node table",
    "edges.bin": "edge table",
    "labels.bin": "label table",
    "rtree.l0.bin": "level-0 R-tree",
    "rtree.l1.bin": "level-1 R-tree",
}

_NODE_DTYPE = np.dtype([("x", "<f8"), ("y", "<f8"), ("part", "<i4")])
_EDGE_DTYPE = np.dtype([("src", "<i8"), ("dst", "<i8"), ("label_idx", "<i8")])


@dataclass
class StoreManifest:
    format_version: int
    counts: dict[str, int]      # nodes, edges, partitions, crossing_edges
    bbox: Rect
    params: dict[str, float | int | None]
    checksums: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "format_version": self.format_version,
            "counts": self.counts,
            "bbox": {"x0": self.bbox.x_min, "y0": self.bbox.y_min,
                     "x1": self.bbox.x_max, "y1": self.bbox.y_max},
            "params": self.params,
            "checksums": self.checksums,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "StoreManifest":
        try:
            doc = json.loads(text)
            bbox = doc["bbox"]
            return cls(
                format_version=int(doc["format_version"]),
                counts={k: int(v) for k, v in doc["counts"].items()},
                bbox=Rect(bbox["x0"], bbox["y0"], bbox["x1"], bbox["y1"]),
                params=doc["params"],
                checksums=dict(doc["checksums"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise StoreCorruptError(f"malformed manifest: {exc}", section="manifest") from exc


@dataclass
class ServableStore:
    """Everything the query engine needs, either fresh from the pipeline or
    loaded back from disk."""

    manifest: StoreManifest
    node_xy: np.ndarray          # (n, 2) float64
    node_part: np.ndarray        # (n,) int32
    edge_src: np.ndarray         # (m,) int64
    edge_dst: np.ndarray         # (m,) int64
    edge_label_idx: np.ndarray   # (m,) int64, -1 for unlabeled
    label_table: list[str]       # node labels first, then distinct edge labels
    tree0: RTree
    tree1: RTree
    sn_pids: np.ndarray
    sn_cx: np.ndarray
    sn_cy: np.ndarray
    sn_counts: np.ndarray
    se_a: np.ndarray
    se_b: np.ndarray
    se_weight: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.node_xy.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edge_src.shape[0]

    def node_labels(self) -> list[str]:
        return self.label_table[: self.n_nodes]

    def edge_label(self, edge_id: int) -> str | None:
        idx = int(self.edge_label_idx[edge_id])
        return self.label_table[idx] if idx >= 0 else None


def _crc(data: bytes) -> str:
    return f"crc32:{zlib.crc32(data):08x}"


def _encode_nodes(store: ServableStore) -> bytes:
    n = store.n_nodes
    arr = np.empty(n, dtype=_NODE_DTYPE)
    arr["x"] = store.node_xy[:, 0]
    arr["y"] = store.node_xy[:, 1]
    arr["part"] = store.node_part
    return struct.pack("<Q", n) + arr.tobytes()


def _decode_nodes(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    n = _decode_count(data, "node table")
    arr = _decode_table(data, _NODE_DTYPE, n, "node table")
    xy = np.column_stack((arr["x"], arr["y"])).astype(np.float64)
    return xy, arr["part"].astype(np.int32)


def _encode_edges(store: ServableStore) -> bytes:
    m = store.n_edges
    arr = np.empty(m, dtype=_EDGE_DTYPE)
    arr["src"] = store.edge_src
    arr["dst"] = store.edge_dst
    arr["label_idx"] = store.edge_label_idx
    return struct.pack("<Q", m) + arr.tobytes()


def _decode_edges(data: bytes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = _decode_count(data, "edge table")
    arr = _decode_table(data, _EDGE_DTYPE, m, "edge table")
    return (arr["src"].astype(np.int64), arr["dst"].astype(np.int64),
            arr["label_idx"].astype(np.int64))


def _decode_count(data: bytes, section: str) -> int:
    if len(data) < 8:
        raise StoreCorruptError("truncated header", section=section)
    return struct.unpack_from("<Q", data, 0)[0]


def _decode_table(data: bytes, dtype: np.dtype, count: int, section: str) -> np.ndarray:
    expected = 8 + count * dtype.itemsize
    if len(data) != expected:
        raise StoreCorruptError(
            f"size mismatch: {len(data)} bytes, expected {expected}", section=section
        )
    return np.frombuffer(data, dtype=dtype, count=count, offset=8)


def _encode_labels(table: list[str]) -> bytes:
    parts = [struct.pack("<Q", len(table))]
    for s in table:
        raw = s.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    return b"".join(parts)


def _decode_labels(data: bytes) -> list[str]:
    count = _decode_count(data, "label table")
    out: list[str] = []
    pos = 8
    for _ in range(count):
        if pos + 4 > len(data):
            raise StoreCorruptError("truncated entry", section="label table")
        (ln,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + ln > len(data):
            raise StoreCorruptError("truncated entry", section="label table")
        try:
            out.append(data[pos:pos + ln].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise StoreCorruptError("invalid UTF-8 entry", section="label table") from exc
        pos += ln
    if pos != len(data):
        raise StoreCorruptError("trailing bytes", section="label table")
    return out


def _encode_tree(tree: RTree) -> bytes:
    parts = [struct.pack("<QII", tree.count, tree.fanout, len(tree.levels))]
    parts.append(np.ascontiguousarray(tree.kinds, dtype=np.uint8).tobytes())
    parts.append(np.ascontiguousarray(tree.refs, dtype="<i8").tobytes())
    parts.append(np.ascontiguousarray(tree.geom, dtype="<f8").tobytes())
    for lv in tree.levels:
        parts.append(struct.pack("<Q", lv.size))
        parts.append(np.ascontiguousarray(lv.bbox, dtype="<f8").tobytes())
        for a in (lv.child_start, lv.child_count, lv.item_start, lv.item_count):
            parts.append(np.ascontiguousarray(a, dtype="<i8").tobytes())
    return b"".join(parts)


def _decode_tree(data: bytes, section: str) -> RTree:
    if len(data) < 16:
        raise StoreCorruptError("truncated header", section=section)
    count, fanout, n_levels = struct.unpack_from("<QII", data, 0)
    pos = 16

    def take(nbytes: int) -> bytes:
        nonlocal pos
        if pos + nbytes > len(data):
            raise StoreCorruptError("truncated array", section=section)
        chunk = data[pos:pos + nbytes]
        pos += nbytes
        return chunk

    kinds = np.frombuffer(take(count), dtype=np.uint8)
    refs = np.frombuffer(take(8 * count), dtype="<i8").astype(np.int64)
    geom = np.frombuffer(take(32 * count), dtype="<f8").reshape(count, 4).astype(np.float64)
    levels: list[_Level] = []
    for _ in range(n_levels):
        (k,) = struct.unpack_from("<Q", take(8), 0)
        bbox = np.frombuffer(take(32 * k), dtype="<f8").reshape(k, 4).astype(np.float64)
        cols = [np.frombuffer(take(8 * k), dtype="<i8").astype(np.int64) for _ in range(4)]
        levels.append(_Level(bbox=bbox, child_start=cols[0], child_count=cols[1],
                             item_start=cols[2], item_count=cols[3]))
    if pos != len(data):
        raise StoreCorruptError("trailing bytes", section=section)
    bboxes = np.empty((count, 4), dtype=np.float64)
    if count:
        bboxes[:, 0] = np.minimum(geom[:, 0], geom[:, 2])
        bboxes[:, 1] = np.minimum(geom[:, 1], geom[:, 3])
        bboxes[:, 2] = np.maximum(geom[:, 0], geom[:, 2])
        bboxes[:, 3] = np.maximum(geom[:, 1], geom[:, 3])
    return RTree(int(fanout), np.ascontiguousarray(kinds), refs, geom, bboxes, levels)


def persist(store: ServableStore, path: str | Path, overwrite: bool = False) -> StoreManifest:
    """Writes all sections plus the manifest; returns the manifest with
    checksums filled in. Refuses an existing store unless overwrite is set."""
    root = Path(path)
    if (root / MANIFEST).exists() and not overwrite:
        raise StoreError(f"store already exists at {root} (use overwrite)")
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StoreIOError(f"cannot create store directory: {exc}", section="manifest") from exc

    payloads = {
        "nodes.bin": _encode_nodes(store),
        "edges.bin": _encode_edges(store),
        "labels.bin": _encode_labels(store.label_table),
        "rtree.l0.bin": _encode_tree(store.tree0),
        "rtree.l1.bin": _encode_tree(store.tree1),
    }
    manifest = StoreManifest(
        format_version=store.manifest.format_version,
        counts=dict(store.manifest.counts),
        bbox=store.manifest.bbox,
        params=dict(store.manifest.params),
        checksums={name: _crc(data) for name, data in payloads.items()},
    )

    created: list[Path] = []

    def write_atomic(name: str, data: bytes, section: str) -> None:
        tmp = root / (name + ".tmp")
        try:
            with open(tmp, "wb") as fh:
                created.append(tmp)
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, root / name)
            created.remove(tmp)
            created.append(root / name)
        except OSError as exc:
            raise StoreIOError(str(exc), section=section) from exc

    try:
        for name, data in payloads.items():
            write_atomic(name, data, SECTIONS[name])
        write_atomic(MANIFEST, manifest.to_json().encode("utf-8"), "manifest")
    except StoreIOError:
        for p in created:
            try:
                p.unlink()
            except OSError:
                pass
        raise
    try:
        dir_fd = os.open(root, os.O_RDONLY)
        try:
            os.fsync(dir_fd)
        finally:
            os.close(dir_fd)
    except OSError:
        pass  # directory fsync is best-effort on odd filesystems
    store.manifest.checksums = dict(manifest.checksums)
    return manifest


def _read_section(root: Path, name: str, manifest: StoreManifest) -> bytes:
    section = SECTIONS[name]
    try:
        data = (root / name).read_bytes()
    except OSError as exc:
        raise StoreIOError(f"cannot read section: {exc}", section=section) from exc
    want = manifest.checksums.get(name)
    if want is None:
        raise StoreCorruptError("checksum missing from manifest", section=section)
    got = _crc(data)
    if got != want:
        raise StoreCorruptError(f"checksum mismatch ({got} != {want})", section=section)
    return data


def load(path: str | Path) -> ServableStore:
    """Reads a store back, verifying every section checksum."""
    root = Path(path)
    try:
        text = (root / MANIFEST).read_text("utf-8")
    except FileNotFoundError as exc:
        raise StoreIOError(f"missing manifest in {root}", section="manifest") from exc
    except OSError as exc:
        raise StoreIOError(f"cannot read manifest: {exc}", section="manifest") from exc
    manifest = StoreManifest.from_json(text)
    if manifest.format_version != FORMAT_VERSION:
        raise StoreVersionError(
            f"store format_version {manifest.format_version} is not supported "
            f"(this build reads {FORMAT_VERSION})"
        )

    node_xy, node_part = _decode_nodes(_read_section(root, "nodes.bin", manifest))
    edge_src, edge_dst, edge_label_idx = _decode_edges(
        _read_section(root, "edges.bin", manifest))
    label_table = _decode_labels(_read_section(root, "labels.bin", manifest))
    tree0 = _decode_tree(_read_section(root, "rtree.l0.bin", manifest), "level-0 R-tree")
    tree1 = _decode_tree(_read_section(root, "rtree.l1.bin", manifest), "level-1 R-tree")

    n = node_xy.shape[0]
    m = edge_src.shape[0]
    if manifest.counts.get("nodes") != n:
        raise StoreCorruptError("node count does not match manifest", section="node table")
    if manifest.counts.get("edges") != m:
        raise StoreCorruptError("edge count does not match manifest", section="edge table")
    if len(label_table) < n:
        raise StoreCorruptError("fewer labels than nodes", section="label table")
    if tree0.count != n + m:
        raise StoreCorruptError("item count does not match node + edge counts",
                                section="level-0 R-tree")

    k = int(manifest.counts.get("partitions", 0))
    sn_pids, sn_cx, sn_cy, sn_counts, se_a, se_b, se_weight = abstraction_arrays(
        node_part, node_xy, edge_src, edge_dst, max(k, 1)
    )
    if tree1.count != sn_pids.size + se_a.size:
        raise StoreCorruptError("item count does not match derived abstraction",
                                section="level-1 R-tree")
    if sn_pids.size:
        points = tree1.kinds == 0
        refs = tree1.refs[points]
        pos = np.searchsorted(sn_pids, np.clip(refs, 0, None))
        ok = (
            refs.size == sn_pids.size
            and bool(np.all(pos < sn_pids.size))
            and np.array_equal(sn_pids[pos], refs)
            and np.array_equal(tree1.geom[points, 0], sn_cx[pos])
            and np.array_equal(tree1.geom[points, 1], sn_cy[pos])
        )
        if not ok:
            raise StoreCorruptError("stored centroids disagree with node table",
                                    section="level-1 R-tree")

    return ServableStore(
        manifest=manifest,
        node_xy=node_xy, node_part=node_part,
        edge_src=edge_src, edge_dst=edge_dst, edge_label_idx=edge_label_idx,
        label_table=label_table, tree0=tree0, tree1=tree1,
        sn_pids=sn_pids, sn_cx=sn_cx, sn_cy=sn_cy, sn_counts=sn_counts,
        se_a=se_a, se_b=se_b, se_weight=se_weight,
    )
