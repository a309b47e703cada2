"""Command-line entry points, run in-process."""
from __future__ import annotations

import json

import pytest

from graphatlas import cli
from graphatlas.store import load as load_store

EDGELIST = "a b\nb c\nc d\nd a\na c\n"


def build_args(src, out, *extra):
    return ["build", "--input", str(src), "--format", "edgelist",
            "--out", str(out), *extra]


@pytest.fixture()
def edgelist_file(tmp_path):
    p = tmp_path / "g.edges"
    p.write_text(EDGELIST)
    return p


def test_build_writes_a_loadable_store(edgelist_file, tmp_path, capsys):
    out = tmp_path / "store"
    rc = cli.main(build_args(edgelist_file, out, "--k", "2",
                             "--iterations", "30", "--seed", "3"))
    assert rc == 0
    printed = capsys.readouterr().out
    assert f"store written to {out}" in printed
    assert "nodes" in printed and "cut size" in printed
    store = load_store(out)
    assert store.n_nodes == 4 and store.n_edges == 5
    assert json.loads((out / "manifest.json").read_text())["counts"]["edges"] == 5


def test_build_reports_dropped_lines(tmp_path, capsys):
    src = tmp_path / "d.edges"
    src.write_text("a b\na b\nb a\nb c\na a\n")
    rc = cli.main(build_args(src, tmp_path / "s", "--k", "1",
                             "--iterations", "10"))
    assert rc == 0
    assert "dropped 1 self-loops, 2 duplicates" in capsys.readouterr().out


def test_build_ntriples_format(tmp_path, capsys):
    src = tmp_path / "g.nt"
    src.write_text('<http://a> <http://p> <http://b> .\n')
    out = tmp_path / "s"
    rc = cli.main(["build", "--input", str(src), "--format", "ntriples",
                   "--out", str(out), "--k", "1", "--iterations", "10"])
    assert rc == 0
    assert load_store(out).edge_label(0) == "http://p"


def test_build_refuses_to_clobber_without_overwrite(edgelist_file, tmp_path, capsys):
    out = tmp_path / "store"
    args = build_args(edgelist_file, out, "--k", "1", "--iterations", "10")
    assert cli.main(args) == 0
    capsys.readouterr()
    assert cli.main(args) == 1
    assert "already exists" in capsys.readouterr().err
    assert cli.main(args + ["--overwrite"]) == 0


def test_build_missing_input_is_a_usage_error(tmp_path, capsys):
    rc = cli.main(build_args(tmp_path / "nope.edges", tmp_path / "s"))
    assert rc == 2
    assert "cannot read" in capsys.readouterr().err


def test_build_parse_error_is_reported(tmp_path, capsys):
    src = tmp_path / "bad.nt"
    src.write_text("<http://a> <http://p> .\n")
    rc = cli.main(["build", "--input", str(src), "--format", "ntriples",
                   "--out", str(tmp_path / "s")])
    assert rc == 1
    assert "line 1" in capsys.readouterr().err


def test_unknown_format_is_rejected_by_argparse(edgelist_file, tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["build", "--input", str(edgelist_file), "--format", "xml",
                  "--out", str(tmp_path / "s")])
    assert exc.value.code == 2


@pytest.mark.parametrize("bind", ["no-colon", "host:notaport", "host:0", "host:70000"])
def test_serve_rejects_bad_bind(bind, tmp_path, capsys):
    rc = cli.main(["serve", "--store", str(tmp_path), "--bind", bind])
    assert rc == 2
    err = capsys.readouterr().err
    assert "bind" in err or "port" in err


def test_serve_requires_an_existing_store(tmp_path, capsys):
    rc = cli.main(["serve", "--store", str(tmp_path / "missing")])
    assert rc == 2
    assert "store" in capsys.readouterr().err


def test_serve_requires_assets_to_be_a_directory(edgelist_file, tmp_path, capsys):
    out = tmp_path / "store"
    assert cli.main(build_args(edgelist_file, out, "--k", "1",
                               "--iterations", "10")) == 0
    rc = cli.main(["serve", "--store", str(out), "--assets", str(tmp_path / "nope")])
    assert rc == 2
    assert "asset" in capsys.readouterr().err
