"""Graph domain types and file ingestion.

Two input formats: whitespace-separated edge lists and an N-Triples subset.
Both produce the same normalized in-memory graph: densely numbered nodes in
first-appearance order, undirected-deduplicated edges (direction kept as
metadata for display), no self-loops.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import BinaryIO, Iterator, Union

from .errors import ContractViolation, EncodingError, ParseError

__all__ = [
    "Node",
    "Edge",
    "Graph",
    "IngestOptions",
    "IngestReport",
    "ingest_edgelist",
    "ingest_ntriples",
]


@dataclass(frozen=True, slots=True)
class Node:
    id: int
    label: str


@dataclass(frozen=True, slots=True)
class Edge:
    id: int
    src: int
    dst: int
    label: str | None = None


@dataclass(frozen=True, slots=True)
class IngestOptions:
    """Ingest knobs. Currently none are defined; the type reserves the slot."""


@dataclass(slots=True)
class IngestReport:
    lines_read: int = 0
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0


class Graph:
    """Immutable-by-convention graph with per-node incident edge lists.

    adjacency[v] lists incident edge ids; an edge appears once under each
    endpoint, so the total number of adjacency entries is 2*len(edges).
    """

    __slots__ = ("nodes", "edges", "adjacency", "report")

    def __init__(self, nodes: list[Node], edges: list[Edge],
                 report: IngestReport | None = None):
        self.nodes = nodes
        self.edges = edges
        self.report = report if report is not None else IngestReport()
        n = len(nodes)
        adjacency: list[list[int]] = [[] for _ in range(n)]
        for e in edges:
            if not (0 <= e.src < n and 0 <= e.dst < n):
                raise ContractViolation(f"edge {e.id} endpoint out of range")
            if e.src == e.dst:
                raise ContractViolation(f"edge {e.id} is a self-loop")
            adjacency[e.src].append(e.id)
            adjacency[e.dst].append(e.id)
        self.adjacency = adjacency

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> Iterator[tuple[int, int]]:
        """Yields (edge_id, other_endpoint) for each edge incident to v."""
        for eid in self.adjacency[v]:
            e = self.edges[eid]
            yield eid, (e.dst if e.src == v else e.src)

    def __repr__(self) -> str:
        return f"Graph(nodes={len(self.nodes)}, edges={len(self.edges)})"


Stream = Union[bytes, str, BinaryIO]


def _iter_lines(stream: Stream) -> Iterator[tuple[int, str]]:
    """Yields (1-based line number, decoded line) from a byte stream."""
    if isinstance(stream, str):
        stream = stream.encode("utf-8")
    if isinstance(stream, bytes):
        stream = io.BytesIO(stream)
    for lineno, raw in enumerate(stream, start=1):
        try:
            line = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"invalid UTF-8: {exc.reason}", line=lineno) from exc
        yield lineno, line.rstrip("\r\n")


class _NodeInterner:
    """Assigns dense ids to node keys in first-appearance order."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self.nodes: list[Node] = []

    def intern(self, key: str) -> int:
        nid = self._ids.get(key)
        if nid is None:
            nid = len(self.nodes)
            self._ids[key] = nid
            self.nodes.append(Node(nid, key))
        return nid


def ingest_edgelist(stream: Stream, options: IngestOptions | None = None) -> Graph:
    """Parses `src dst` token pairs, one per line.

    `#` starts a comment line; blank lines are ignored. Nodes are created per
    distinct token; edges are deduplicated as unordered pairs. Self-loops and
    duplicates are dropped and counted in the report.
    """
    interner = _NodeInterner()
    edges: list[Edge] = []
    seen: set[tuple[int, int]] = set()
    report = IngestReport()
    for lineno, line in _iter_lines(stream):
        report.lines_read = lineno
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 tokens, got {len(tokens)}", line=lineno)
        src = interner.intern(tokens[0])
        dst = interner.intern(tokens[1])
        if src == dst:
            report.self_loops_dropped += 1
            continue
        key = (src, dst) if src < dst else (dst, src)
        if key in seen:
            report.duplicates_dropped += 1
            continue
        seen.add(key)
        edges.append(Edge(len(edges), src, dst))
    return Graph(interner.nodes, edges, report)


_ESCAPES = {
    "t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f",
    '"': '"', "'": "'", "\\": "\\",
}


def _scan_iri(line: str, pos: int, lineno: int) -> tuple[str, int]:
    end = line.find(">", pos + 1)
    if end < 0:
        raise ParseError("unterminated IRI", line=lineno)
    return line[pos + 1:end], end + 1


def _scan_literal(line: str, pos: int, lineno: int) -> tuple[str, int]:
    out: list[str] = []
    i = pos + 1
    n = len(line)
    while True:
        if i >= n:
            raise ParseError("unterminated literal", line=lineno)
        ch = line[i]
        if ch == '"':
            i += 1
            break
        if ch == "\\":
            if i + 1 >= n:
                raise ParseError("unterminated literal", line=lineno)
            esc = line[i + 1]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                i += 2
            elif esc in ("u", "U"):
                width = 4 if esc == "u" else 8
                hexpart = line[i + 2:i + 2 + width]
                if len(hexpart) != width:
                    raise ParseError("truncated \\u escape in literal", line=lineno)
                try:
                    out.append(chr(int(hexpart, 16)))
                except ValueError as exc:
                    raise ParseError("bad \\u escape in literal", line=lineno) from exc
                i += 2 + width
            else:
                raise ParseError(f"unknown escape \\{esc} in literal", line=lineno)
        else:
            out.append(ch)
            i += 1
    # Datatype (^^<...>) or language (@lang) suffix stays part of the
    # lexical form; scan it as raw text up to the next whitespace.
    start_suffix = i
    while i < n and not line[i].isspace():
        i += 1
    out.append(line[start_suffix:i])
    return "".join(out), i


def _scan_term(line: str, pos: int, lineno: int) -> tuple[str, str, int]:
    """Returns (kind, lexical form, next position); kind in {iri, literal, blank}."""
    n = len(line)
    while pos < n and line[pos].isspace():
        pos += 1
    if pos >= n:
        raise ParseError("unexpected end of triple", line=lineno)
    ch = line[pos]
    if ch == "<":
        text, pos = _scan_iri(line, pos, lineno)
        return "iri", text, pos
    if ch == '"':
        text, pos = _scan_literal(line, pos, lineno)
        return "literal", text, pos
    if line.startswith("_:", pos):
        end = pos
        while end < n and not line[end].isspace():
            end += 1
        return "blank", line[pos:end], end
    raise ParseError(f"unexpected character {ch!r} in triple", line=lineno)


def ingest_ntriples(stream: Stream, options: IngestOptions | None = None) -> Graph:
    """Parses the N-Triples subset `<subj> <pred> (<obj> | "literal") .`.

    Subjects and objects (IRIs, blank-node tokens, and literals alike) become
    nodes keyed by exact lexical form; literals keep any datatype or language
    suffix as part of that form. Each triple becomes an edge labeled with the
    predicate IRI; duplicates on the unordered (src, dst, predicate) key and
    self-loops are dropped and counted.
    """
    interner = _NodeInterner()
    edges: list[Edge] = []
    seen: set[tuple[int, int, str]] = set()
    report = IngestReport()
    for lineno, line in _iter_lines(stream):
        report.lines_read = lineno
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        s_kind, s_text, pos = _scan_term(line, 0, lineno)
        if s_kind == "literal":
            raise ParseError("literal not allowed as subject", line=lineno)
        p_kind, p_text, pos = _scan_term(line, pos, lineno)
        if p_kind != "iri":
            raise ParseError("predicate must be an IRI", line=lineno)
        _, o_text, pos = _scan_term(line, pos, lineno)
        rest = line[pos:].strip()
        if rest != ".":
            raise ParseError("triple must end with '.'", line=lineno)
        if not s_text or not o_text:
            # Node labels must be non-empty; <> and "" have no lexical form.
            raise ParseError("empty term", line=lineno)
        src = interner.intern(s_text)
        dst = interner.intern(o_text)
        if src == dst:
            report.self_loops_dropped += 1
            continue
        key = (src, dst, p_text) if src < dst else (dst, src, p_text)
        if key in seen:
            report.duplicates_dropped += 1
            continue
        seen.add(key)
        edges.append(Edge(len(edges), src, dst, label=p_text))
    return Graph(interner.nodes, edges, report)
