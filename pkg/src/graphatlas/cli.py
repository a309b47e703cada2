"""Command-line entry points: `build` (preprocess a graph file into a store
directory) and `serve` (run the HTTP query server over a store)."""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from .errors import GraphAtlasError, InvalidParameterError


def _add_build(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("build", help="preprocess a graph file into a store directory")
    p.add_argument("--input", required=True, help="input graph file")
    p.add_argument("--format", required=True, choices=("ntriples", "edgelist"))
    p.add_argument("--out", required=True, help="store output directory")
    p.add_argument("--k", type=int, default=None, help="partition count (default n/2000)")
    p.add_argument("--eps", type=float, default=0.05, help="balance slack")
    p.add_argument("--edge-length", type=float, default=60.0, help="ideal edge length")
    p.add_argument("--iterations", type=int, default=300, help="layout iterations")
    p.add_argument("--margin", type=float, default=30.0, help="partition bbox margin")
    p.add_argument("--gap", type=float, default=50.0, help="minimum gap between partitions")
    p.add_argument("--grid-step", type=float, default=None, help="placement grid step")
    p.add_argument("--ring-limit", type=int, default=3, help="extra candidate rings")
    p.add_argument("--fm-passes", type=int, default=10, help="refinement passes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--overwrite", action="store_true",
                   help="replace an existing store at --out")


def _add_serve(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("serve", help="serve a store over HTTP")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--bind", default="127.0.0.1:8000", metavar="ADDR:PORT")
    p.add_argument("--assets", default=None, help="static asset directory for the UI")
    p.add_argument("--max-items", type=int, default=None,
                   help="default window item cap (default 5000)")
    p.add_argument("--no-request-log", action="store_true")


def _run_build(args: argparse.Namespace) -> int:
    from . import model, pipeline, store

    ingest = model.ingest_ntriples if args.format == "ntriples" else model.ingest_edgelist
    t = time.perf_counter()
    try:
        with open(args.input, "rb") as fh:
            graph = ingest(fh)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 2
    ingest_seconds = time.perf_counter() - t

    params = pipeline.PipelineParams(
        k=args.k, balance_eps=args.eps, max_fm_passes=args.fm_passes,
        edge_length=args.edge_length, iterations=args.iterations,
        margin=args.margin, gap=args.gap, grid_step=args.grid_step,
        candidate_ring_limit=args.ring_limit, seed=args.seed,
    )
    servable, report = pipeline.build_store(graph, params)

    t = time.perf_counter()
    store.persist(servable, args.out, overwrite=args.overwrite)
    report.timings["ingest"] = ingest_seconds
    report.timings["persist"] = time.perf_counter() - t

    rep = graph.report
    if rep.self_loops_dropped or rep.duplicates_dropped:
        print(f"ingest: dropped {rep.self_loops_dropped} self-loops, "
              f"{rep.duplicates_dropped} duplicates")
    print(report.format())
    print(f"store written to {args.out}")
    return 0


def _run_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from . import server

    host, sep, port_text = args.bind.rpartition(":")
    if not sep or not host:
        print(f"error: --bind must be ADDR:PORT, got {args.bind!r}", file=sys.stderr)
        return 2
    try:
        port = int(port_text)
    except ValueError:
        print(f"error: invalid port {port_text!r}", file=sys.stderr)
        return 2
    if not 1 <= port <= 65535:
        print(f"error: port {port} out of range", file=sys.stderr)
        return 2
    if not (Path(args.store) / "manifest.json").exists():
        print(f"error: no store at {args.store}", file=sys.stderr)
        return 2
    if args.assets and not Path(args.assets).is_dir():
        print(f"error: asset directory {args.assets} does not exist", file=sys.stderr)
        return 2

    os.environ[server.ENV_STORE] = args.store
    if args.assets:
        os.environ[server.ENV_ASSETS] = args.assets
    if args.max_items is not None:
        os.environ[server.ENV_MAX_ITEMS] = str(args.max_items)
    uvicorn.run("graphatlas.server:create_app", factory=True,
                host=host, port=port, access_log=not args.no_request_log,
                log_level="info" if not args.no_request_log else "warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="graphatlas",
                                     description="disk-backed large-graph explorer")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_build(sub)
    _add_serve(sub)
    args = parser.parse_args(argv)
    try:
        if args.command == "build":
            return _run_build(args)
        return _run_serve(args)
    except (GraphAtlasError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
