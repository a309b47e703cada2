"""Persistence: round-trips, checksums, atomicity, byte determinism."""
from __future__ import annotations

import json
import os
import zlib
from pathlib import Path

import numpy as np
import pytest

from graphatlas.errors import (StoreCorruptError, StoreError, StoreIOError,
                               StoreVersionError)
from graphatlas.geometry import Rect
from graphatlas.pipeline import PipelineParams, build_store
from graphatlas.query import QueryEngine
from graphatlas.store import load, persist
from conftest import random_graph

WHOLE = Rect(-1e9, -1e9, 1e9, 1e9)
ALL_FILES = {"manifest.json", "nodes.bin", "edges.bin", "labels.bin",
             "rtree.l0.bin", "rtree.l1.bin"}


def flip_byte(path: Path, offset: int) -> None:
    data = bytearray(path.read_bytes())
    data[offset] ^= 0xFF
    path.write_bytes(bytes(data))


def patch_manifest(root: Path, mutate) -> None:
    doc = json.loads((root / "manifest.json").read_text())
    mutate(doc)
    (root / "manifest.json").write_text(json.dumps(doc))


# -- round trip -----------------------------------------------------------------------

def test_round_trip_preserves_all_query_answers(small_store, tmp_path):
    store, _ = small_store
    persist(store, tmp_path / "s")
    assert set(os.listdir(tmp_path / "s")) == ALL_FILES
    loaded = load(tmp_path / "s")

    assert np.array_equal(loaded.node_xy, store.node_xy)
    assert np.array_equal(loaded.node_part, store.node_part)
    assert np.array_equal(loaded.edge_src, store.edge_src)
    assert np.array_equal(loaded.edge_dst, store.edge_dst)
    assert np.array_equal(loaded.edge_label_idx, store.edge_label_idx)
    assert loaded.label_table == store.label_table
    assert np.array_equal(loaded.sn_cx, store.sn_cx)
    assert np.array_equal(loaded.se_weight, store.se_weight)
    assert loaded.manifest.counts == store.manifest.counts

    a, b = QueryEngine(store), QueryEngine(loaded)
    for level in (0, 1):
        va = a.view(WHOLE, level)
        vb = b.view(WHOLE, level)
        assert np.array_equal(va.node_ids, vb.node_ids)
        assert np.array_equal(va.edge_ids, vb.edge_ids)
    rng = np.random.default_rng(3)
    for _ in range(25):
        x, y = rng.uniform(-500, 2000, 2)
        win = Rect(x, y, x + rng.uniform(0, 800), y + rng.uniform(0, 800))
        va, vb = a.view(win, 0), b.view(win, 0)
        assert np.array_equal(va.node_ids, vb.node_ids)
        assert np.array_equal(va.edge_ids, vb.edge_ids)
        assert np.array_equal(va.node_in_window, vb.node_in_window)
    assert a.keyword_search("v1", 20) == b.keyword_search("v1", 20)


def test_persist_refuses_existing_store_without_overwrite(small_store, tmp_path):
    store, _ = small_store
    persist(store, tmp_path)
    with pytest.raises(StoreError):
        persist(store, tmp_path)
    persist(store, tmp_path, overwrite=True)
    load(tmp_path)


def test_load_of_empty_directory_is_missing_manifest(tmp_path):
    with pytest.raises(StoreIOError) as ei:
        load(tmp_path)
    assert ei.value.section == "manifest"
    assert "manifest" in str(ei.value)


def test_future_format_version_rejected(small_store, tmp_path):
    store, _ = small_store
    persist(store, tmp_path)
    patch_manifest(tmp_path, lambda d: d.update(format_version=99))
    with pytest.raises(StoreVersionError) as ei:
        load(tmp_path)
    assert "99" in str(ei.value)


# -- corruption detection ------------------------------------------------------------

SECTION_OF = {
    "nodes.bin": "node table",
    "edges.bin": "edge table",
    "labels.bin": "label table",
    "rtree.l0.bin": "level-0 R-tree",
    "rtree.l1.bin": "level-1 R-tree",
}


@pytest.mark.parametrize("fname", sorted(SECTION_OF))
def test_single_byte_corruption_names_the_section(small_store, tmp_path, fname):
    store, _ = small_store
    persist(store, tmp_path)
    target = tmp_path / fname
    flip_byte(target, target.stat().st_size // 2)
    with pytest.raises(StoreCorruptError) as ei:
        load(tmp_path)
    assert ei.value.section == SECTION_OF[fname]
    assert SECTION_OF[fname] in str(ei.value)


def test_garbled_manifest_names_manifest(small_store, tmp_path):
    store, _ = small_store
    persist(store, tmp_path)
    (tmp_path / "manifest.json").write_text("{not json")
    with pytest.raises(StoreCorruptError) as ei:
        load(tmp_path)
    assert ei.value.section == "manifest"


def test_tampered_checksum_is_detected(small_store, tmp_path):
    store, _ = small_store
    persist(store, tmp_path)
    patch_manifest(tmp_path,
                   lambda d: d["checksums"].update({"edges.bin": "crc32:00000000"}))
    with pytest.raises(StoreCorruptError) as ei:
        load(tmp_path)
    assert ei.value.section == "edge table"


def test_wrong_count_in_manifest_is_detected(small_store, tmp_path):
    store, _ = small_store
    persist(store, tmp_path)
    patch_manifest(tmp_path, lambda d: d["counts"].update(nodes=7))
    with pytest.raises(StoreCorruptError) as ei:
        load(tmp_path)
    assert ei.value.section == "node table"


def test_consistent_crc_but_moved_node_fails_abstraction_check(small_store, tmp_path):
    """A forged node table that passes its own checksum still contradicts the
    persisted abstraction tree, which is recomputed and cross-checked."""
    store, _ = small_store
    persist(store, tmp_path)
    target = tmp_path / "nodes.bin"
    data = bytearray(target.read_bytes())
    # first node row starts at the 8-byte count header; shove x far away
    data[8:16] = np.float64(1e6).tobytes()
    target.write_bytes(bytes(data))
    crc = f"crc32:{zlib.crc32(bytes(data)) & 0xFFFFFFFF:08x}"
    patch_manifest(tmp_path, lambda d: d["checksums"].update({"nodes.bin": crc}))
    with pytest.raises(StoreCorruptError) as ei:
        load(tmp_path)
    assert ei.value.section == "level-1 R-tree"


# -- atomicity --------------------------------------------------------------------------

def test_failed_persist_leaves_no_manifest_or_partial_files(small_store, tmp_path):
    store, _ = small_store
    # a directory squatting on a section filename makes the rename step fail
    (tmp_path / "nodes.bin").mkdir()
    with pytest.raises(StoreIOError) as ei:
        persist(store, tmp_path)
    assert ei.value.section == "node table"
    assert set(os.listdir(tmp_path)) == {"nodes.bin"}  # nothing else left behind
    assert not (tmp_path / "manifest.json").exists()


def test_failed_persist_midway_cleans_earlier_sections(small_store, tmp_path):
    store, _ = small_store
    (tmp_path / "rtree.l0.bin").mkdir()
    with pytest.raises(StoreIOError) as ei:
        persist(store, tmp_path)
    assert ei.value.section == "level-0 R-tree"
    # the sections written before the failure are rolled back
    assert set(os.listdir(tmp_path)) == {"rtree.l0.bin"}


# -- determinism --------------------------------------------------------------------------

def test_same_build_persists_byte_identical_files(tmp_path):
    params = PipelineParams(k=3, iterations=60, seed=21)
    s1, _ = build_store(random_graph(120, 360, seed=6), params)
    s2, _ = build_store(random_graph(120, 360, seed=6), params)
    persist(s1, tmp_path / "a")
    persist(s2, tmp_path / "b")
    for name in sorted(ALL_FILES):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name
