"""HTTP query server.

A small hand-rolled ASGI app (no framework): three JSON endpoints over an
immutable store plus optional static assets for the UI. Per-record JSON
fragments are rendered once at startup, so a window response is mostly a
join of prebuilt byte strings; that keeps tail latency flat under load.

Endpoints:
  GET /api/meta                                    store metadata
  GET /api/window?x0&y0&x1&y1&level&max_items      ViewResult document
  GET /api/search?q&limit                          ranked label matches

Errors are JSON: {"error": {"code": ..., "param": ..., "message": ...}}.
"""

from __future__ import annotations

import json
import mimetypes
import os
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import parse_qs

from .errors import InvalidParameterError
from .geometry import Rect
from .query import DEFAULT_MAX_ITEMS, QueryEngine
from .store import ServableStore, load

__all__ = ["ServerConfig", "App", "create_app"]

ENV_STORE = "GRAPHATLAS_STORE"
ENV_ASSETS = "GRAPHATLAS_ASSETS"
ENV_MAX_ITEMS = "GRAPHATLAS_MAX_ITEMS"


@dataclass(frozen=True, slots=True)
class ServerConfig:
    store_path: str
    assets_dir: str | None = None
    max_items: int = DEFAULT_MAX_ITEMS
    request_log: bool = True

    def __post_init__(self) -> None:
        if self.max_items < 1:
            raise InvalidParameterError("max_items must be >= 1", param="max_items")


def _dump(value) -> bytes:
    return json.dumps(value, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


class App:
    """ASGI application over one loaded store."""

    def __init__(self, store: ServableStore, config: ServerConfig):
        self.store = store
        self.config = config
        self.engine = QueryEngine(store)
        self.assets = Path(config.assets_dir).resolve() if config.assets_dir else None
        self._build_fragments()

    def _build_fragments(self) -> None:
        st = self.store
        labels = st.label_table
        self.node_frag: list[bytes] = [
            _dump({"id": i, "x": float(st.node_xy[i, 0]), "y": float(st.node_xy[i, 1]),
                   "label": labels[i], "partition": int(st.node_part[i])})
            for i in range(st.n_nodes)
        ]
        self.edge_frag: list[bytes] = [
            _dump({"id": e, "src": int(st.edge_src[e]), "dst": int(st.edge_dst[e]),
                   "label": st.edge_label(e)})
            for e in range(st.n_edges)
        ]
        # level-1 fragments are keyed by partition id / superedge index
        self.sn_frag: dict[int, bytes] = {
            int(p): _dump({"id": int(p), "x": float(x), "y": float(y), "count": int(c)})
            for p, x, y, c in zip(st.sn_pids, st.sn_cx, st.sn_cy, st.sn_counts)
        }
        self.se_frag: list[bytes] = [
            _dump({"id": i, "a": int(a), "b": int(b), "weight": int(w)})
            for i, (a, b, w) in enumerate(zip(st.se_a, st.se_b, st.se_weight))
        ]
        mf = st.manifest
        self.meta_body = _dump({
            "format_version": mf.format_version,
            "counts": mf.counts,
            "bbox": {"x0": mf.bbox.x_min, "y0": mf.bbox.y_min,
                     "x1": mf.bbox.x_max, "y1": mf.bbox.y_max},
            "levels": [0, 1],
            "max_items": self.config.max_items,
        })

    # -- request plumbing ---------------------------------------------------

    async def __call__(self, scope, receive, send) -> None:
        if scope["type"] == "lifespan":
            await self._lifespan(receive, send)
            return
        if scope["type"] != "http":
            return
        path = scope["path"]
        if scope["method"] != "GET":
            await _respond(send, 405, _error_body("method_not_allowed", None,
                                                  "only GET is supported"))
            return
        try:
            if path == "/api/meta":
                await _respond(send, 200, self.meta_body)
            elif path == "/api/window":
                await self._window(scope, send)
            elif path == "/api/search":
                await self._search(scope, send)
            elif path.startswith("/api/"):
                await _respond(send, 404, _error_body("not_found", None,
                                                      f"no such endpoint: {path}"))
            else:
                await self._asset(path, send)
        except _BadRequest as exc:
            await _respond(send, 400, _error_body(exc.code, exc.param, exc.message))

    async def _lifespan(self, receive, send) -> None:
        while True:
            message = await receive()
            if message["type"] == "lifespan.startup":
                await send({"type": "lifespan.startup.complete"})
            elif message["type"] == "lifespan.shutdown":
                await send({"type": "lifespan.shutdown.complete"})
                return

    async def _window(self, scope, send) -> None:
        q = parse_qs(scope["query_string"].decode("latin-1"))
        x0 = _float_param(q, "x0")
        y0 = _float_param(q, "y0")
        x1 = _float_param(q, "x1")
        y1 = _float_param(q, "y1")
        if x0 > x1:
            x0, x1 = x1, x0
        if y0 > y1:
            y0, y1 = y1, y0
        level = _int_param(q, "level", default=0)
        if level not in (0, 1):
            raise _BadRequest("invalid_parameter", "level", f"unknown level {level}")
        max_items = _int_param(q, "max_items", default=self.config.max_items)
        if max_items < 1:
            raise _BadRequest("invalid_parameter", "max_items", "must be >= 1")

        vr = self.engine.view(Rect(x0, y0, x1, y1), level, max_items)
        outside = vr.node_ids[~vr.node_in_window]
        head = (
            b'{"level":' + str(level).encode()
            + b',"window":{"x0":' + _num(x0) + b',"y0":' + _num(y0)
            + b',"x1":' + _num(x1) + b',"y1":' + _num(y1) + b"}"
            + b',"truncated":' + (b"true" if vr.truncated else b"false")
            + b',"outside_node_ids":' + _dump(outside.tolist())
        )
        if level == 0:
            nodes = b",".join(map(self.node_frag.__getitem__, vr.node_ids.tolist()))
            edges = b",".join(map(self.edge_frag.__getitem__, vr.edge_ids.tolist()))
            body = head + b',"nodes":[' + nodes + b'],"edges":[' + edges + b"]}"
        else:
            sns = b",".join(map(self.sn_frag.__getitem__, vr.node_ids.tolist()))
            ses = b",".join(map(self.se_frag.__getitem__, vr.edge_ids.tolist()))
            body = head + b',"supernodes":[' + sns + b'],"superedges":[' + ses + b"]}"
        await _respond(send, 200, body)

    async def _search(self, scope, send) -> None:
        q = parse_qs(scope["query_string"].decode("latin-1"))
        term = q.get("q", [""])[0]
        if not term.strip():
            raise _BadRequest("invalid_parameter", "q", "search term is empty")
        limit = _int_param(q, "limit", default=50)
        if limit < 1:
            raise _BadRequest("invalid_parameter", "limit", "must be >= 1")
        hits = self.engine.keyword_search(term, limit)
        body = _dump({"results": [
            {"id": h.node_id, "label": h.label, "x": h.x, "y": h.y,
             "partition": h.partition_id}
            for h in hits
        ]})
        await _respond(send, 200, body)

    async def _asset(self, path: str, send) -> None:
        if self.assets is None:
            await _respond(send, 404, _error_body("not_found", None,
                                                  "no static assets configured"))
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.assets / rel).resolve()
        if not str(target).startswith(str(self.assets) + os.sep) and target != self.assets:
            await _respond(send, 404, _error_body("not_found", None, "bad path"))
            return
        if target.is_dir():
            target = target / "index.html"
        try:
            data = target.read_bytes()
        except OSError:
            await _respond(send, 404, _error_body("not_found", None, path))
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        await _respond(send, 200, data, ctype)


class _BadRequest(Exception):
    def __init__(self, code: str, param: str | None, message: str):
        super().__init__(message)
        self.code = code
        self.param = param
        self.message = message


def _error_body(code: str, param: str | None, message: str) -> bytes:
    err: dict = {"code": code, "message": message}
    if param is not None:
        err["param"] = param
    return _dump({"error": err})


def _num(v: float) -> bytes:
    return repr(float(v)).encode()


def _float_param(q: dict, name: str) -> float:
    vals = q.get(name)
    if not vals:
        raise _BadRequest("missing_parameter", name, f"{name} is required")
    try:
        v = float(vals[0])
    except ValueError:
        raise _BadRequest("invalid_parameter", name,
                          f"{name} must be a number, got {vals[0]!r}") from None
    if v != v or v in (float("inf"), float("-inf")):
        raise _BadRequest("invalid_parameter", name, f"{name} must be finite")
    return v


def _int_param(q: dict, name: str, default: int) -> int:
    vals = q.get(name)
    if not vals:
        return default
    try:
        return int(vals[0])
    except ValueError:
        raise _BadRequest("invalid_parameter", name,
                          f"{name} must be an integer, got {vals[0]!r}") from None


async def _respond(send, status: int, body: bytes,
                   ctype: str = "application/json; charset=utf-8") -> None:
    await send({
        "type": "http.response.start",
        "status": status,
        "headers": [
            (b"content-type", ctype.encode("latin-1")),
            (b"content-length", str(len(body)).encode()),
        ],
    })
    await send({"type": "http.response.body", "body": body})


def create_app() -> App:
    """uvicorn factory; configuration comes from the environment."""
    store_path = os.environ.get(ENV_STORE)
    if not store_path:
        raise RuntimeError(f"{ENV_STORE} is not set")
    config = ServerConfig(
        store_path=store_path,
        assets_dir=os.environ.get(ENV_ASSETS) or None,
        max_items=int(os.environ.get(ENV_MAX_ITEMS, DEFAULT_MAX_ITEMS)),
    )
    return App(load(store_path), config)
