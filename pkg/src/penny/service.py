"""HTTP facade over the analysis pipeline.

One session per analyzed source text. A session owns the current
source, its graph, the catalogs it was opened with, and any assumption
overrides. Writes (assumption patches, black-box links) are serialized
per session and bump the session version; every response states the
version it was computed from so clients can detect staleness.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, Response

from .annotations import read_annotations, write_annotation
from .assumptions import assemble
from .errors import PennyError, UnpricedFactor, UnresolvedAssumption
from .estimator import compare_catalogs, monthly_cost
from .extract import ResourceDecl, build_graph, find_resources, resolve_usages
from .graph import CostGraph, NodeClass, factor_catalogue, required_keys
from .money import display_usd
from .parser import parse
from .pricing import Catalog, bind, load_catalog
from .source import SourceFile, Span
from .export import graph_doc, render_dot, render_report

__all__ = ["create_app", "load_catalog_dir"]


def load_catalog_dir(catalog_dir: str | Path) -> dict[str, Catalog]:
    """All *.json catalogs in a directory, keyed by their own ids."""
    out: dict[str, Catalog] = {}
    for path in sorted(Path(catalog_dir).glob("*.json")):
        catalog = load_catalog(path)
        if catalog.id in out:
            raise PennyError(f"two catalog files claim the id {catalog.id!r}")
        out[catalog.id] = catalog
    return out


def _coerce(value: Any) -> Any:
    """JSON scalars to model scalars; floats go through their decimal
    text so 0.5 lands as the exact 1/2."""
    if isinstance(value, bool) or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    raise PennyError(f"assumption values must be scalars, got {type(value).__name__}")


@dataclass
class _Session:
    id: str
    source: SourceFile
    catalog_ids: list[str]
    graph: CostGraph = field(init=False)
    resources: list[ResourceDecl] = field(init=False)
    bound: dict = field(init=False, default_factory=dict)
    overrides: dict[str, Any] = field(default_factory=dict)
    links: list[tuple[str, str]] = field(default_factory=list)
    version: int = 1
    lock: threading.RLock = field(default_factory=threading.RLock)

    def annotation_target(self, key: str) -> tuple[Span, str] | None:
        """Resolve an assumption key to (expression span, bare key).

        Keys are `<node or resource id>.<name>`; the longest id prefix
        wins so `upload.fn.memoryGb` targets the handler closure, not
        the endpoint.
        """
        spans: dict[str, Span] = {d.id: d.decl_span for d in self.resources}
        spans.update({n.id: n.span for n in self.graph.nodes})
        best: str | None = None
        for target_id in spans:
            if key.startswith(target_id + ".") and (best is None or len(target_id) > len(best)):
                best = target_id
        if best is None:
            return None
        return spans[best], key[len(best) + 1 :]


def _analyze(sess: _Session) -> None:
    tree = parse(sess.source)
    sess.resources = find_resources(tree)
    calls = resolve_usages(tree, sess.resources)
    sess.graph = build_graph(
        sess.resources, calls, annotations=read_annotations(tree), extra_links=sess.links
    )


def _rebind(sess: _Session, catalogs: Mapping[str, Catalog]) -> None:
    sess.bound = {}
    for cid in sess.catalog_ids:
        try:
            sess.bound[cid] = bind(sess.graph, catalogs[cid])
        except UnpricedFactor as err:
            sess.bound[cid] = err


def _error_response(status: int, err: PennyError) -> JSONResponse:
    return JSONResponse(status_code=status, content=err.to_doc())


def _not_found(message: str, **details: Any) -> JSONResponse:
    return JSONResponse(status_code=404, content={"error": "NotFound", "message": message, **details})


def create_app(
    catalog_dir: str | Path | None = None,
    ui_origin: str | None = None,
    catalogs: Mapping[str, Catalog] | None = None,
) -> FastAPI:
    """Build the application. Catalogs come from `catalog_dir`, from the
    `catalogs` mapping, or both; ids must not collide."""
    loaded: dict[str, Catalog] = {}
    if catalog_dir is not None:
        loaded.update(load_catalog_dir(catalog_dir))
    if catalogs:
        for cid, cat in catalogs.items():
            if cid in loaded:
                raise PennyError(f"catalog id {cid!r} supplied twice")
            loaded[cid] = cat

    app = FastAPI(title="penny", docs_url=None, redoc_url=None)
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    if ui_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[ui_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def get_session(session_id: str) -> _Session | None:
        with registry_lock:
            return sessions.get(session_id)

    def session_state(sess: _Session) -> dict:
        rows = factor_catalogue(sess.graph, sess.overrides)
        return {
            "session": sess.id,
            "source_version": sess.version,
            "factors": [row.to_doc() for row in rows],
            "unresolved": required_keys(rows),
        }

    def totals_by_vendor(sess: _Session) -> dict:
        """Fresh totals per catalog, null where the model cannot be
        priced or counted yet."""
        out: dict[str, Any] = {}
        assumptions = assemble(sess.graph, sess.overrides)
        for cid in sess.catalog_ids:
            model = sess.bound[cid]
            if isinstance(model, UnpricedFactor):
                out[cid] = None
                continue
            try:
                report = monthly_cost(model, assumptions, 1, sess.version)
            except PennyError:
                out[cid] = None
                continue
            out[cid] = {
                "total_micro_usd": report.total_micro_usd,
                "display": display_usd(report.total_micro_usd),
            }
        return out

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        source_text = payload.get("source")
        if not isinstance(source_text, str):
            return JSONResponse(
                status_code=422,
                content={"error": "BadRequest", "message": "body must carry a source string"},
            )
        wanted = payload.get("catalogs")
        if wanted is None:
            wanted = sorted(loaded)
        for cid in wanted:
            if cid not in loaded:
                return _not_found(f"unknown catalog {cid!r}", catalog=cid)
        initial = payload.get("assumptions") or {}
        try:
            overrides = {key: _coerce(value) for key, value in initial.items()}
        except PennyError as err:
            return _error_response(422, err)
        sess = _Session(
            id=uuid.uuid4().hex[:12],
            source=SourceFile(text=source_text, path=None, version=1),
            catalog_ids=list(wanted),
            overrides=overrides,
        )
        try:
            _analyze(sess)
        except PennyError as err:
            return _error_response(422, err)
        _rebind(sess, loaded)
        with registry_lock:
            sessions[sess.id] = sess
        body = session_state(sess)
        body["graph"] = graph_doc(sess.graph, sess.version, factor_catalogue(sess.graph, sess.overrides))
        return body

    @app.get("/catalogs")
    def list_catalogs():
        return {
            "catalogs": [
                {
                    "id": cat.id,
                    "vendor_id": cat.vendor_id,
                    "version": cat.version,
                    "rules": len(cat.rules),
                }
                for _, cat in sorted(loaded.items())
            ]
        }

    @app.get("/sessions/{session_id}/cost")
    def get_cost(session_id: str, month: int = 1, vendor: str | None = None):
        sess = get_session(session_id)
        if sess is None:
            return _not_found(f"no session {session_id!r}")
        if month < 1:
            return JSONResponse(
                status_code=400,
                content={"error": "BadMonth", "message": f"month must be >= 1, got {month}"},
            )
        with sess.lock:
            if vendor is None and not sess.catalog_ids:
                return _not_found("session has no catalogs bound")
            vendor_id = vendor if vendor is not None else sess.catalog_ids[0]
            model = sess.bound.get(vendor_id)
            if model is None:
                return _not_found(f"vendor {vendor_id!r} is not bound to this session", vendor=vendor_id)
            if isinstance(model, UnpricedFactor):
                return _error_response(409, model)
            assumptions = assemble(sess.graph, sess.overrides)
            try:
                report = monthly_cost(model, assumptions, month, sess.version)
            except UnresolvedAssumption as err:
                return _error_response(409, err)
            except PennyError as err:
                return _error_response(422, err)
        return Response(content=render_report(report), media_type="application/json")

    @app.get("/sessions/{session_id}/compare")
    def get_compare(session_id: str, month: int = 1):
        sess = get_session(session_id)
        if sess is None:
            return _not_found(f"no session {session_id!r}")
        if month < 1:
            return JSONResponse(
                status_code=400,
                content={"error": "BadMonth", "message": f"month must be >= 1, got {month}"},
            )
        with sess.lock:
            for cid in sess.catalog_ids:
                if isinstance(sess.bound[cid], UnpricedFactor):
                    return _error_response(409, sess.bound[cid])
            assumptions = assemble(sess.graph, sess.overrides)
            try:
                comparisons = compare_catalogs(
                    sess.graph,
                    assumptions,
                    [loaded[cid] for cid in sess.catalog_ids],
                    month,
                    sess.version,
                )
            except UnresolvedAssumption as err:
                return _error_response(409, err)
            except PennyError as err:
                return _error_response(422, err)
            return {
                "source_version": sess.version,
                "month": month,
                "baseline": sess.catalog_ids[0] if sess.catalog_ids else None,
                "comparisons": [
                    {
                        "vendor": comp.vendor,
                        "total_micro_usd": comp.total_micro_usd,
                        "total_display": display_usd(comp.total_micro_usd),
                        "node_deltas": dict(comp.node_deltas),
                    }
                    for comp in comparisons
                ],
            }

    @app.patch("/sessions/{session_id}/assumptions")
    def patch_assumptions(session_id: str, payload: dict = Body(...)):
        sess = get_session(session_id)
        if sess is None:
            return _not_found(f"no session {session_id!r}")
        persist = payload.pop("persist", False)
        if not isinstance(persist, bool):
            return JSONResponse(
                status_code=422,
                content={"error": "BadRequest", "message": "persist must be a boolean"},
            )
        with sess.lock:
            known = {row.key for row in factor_catalogue(sess.graph, sess.overrides)}
            for key in payload:
                if key not in known:
                    return _not_found(f"unknown assumption key {key!r}", key=key)
            try:
                values = {key: _coerce(value) for key, value in payload.items()}
            except PennyError as err:
                return _error_response(422, err)

            if persist:
                try:
                    for key, value in values.items():
                        target = sess.annotation_target(key)
                        if target is None:
                            return _not_found(f"no source location for key {key!r}", key=key)
                        span, bare = target
                        sess.source = write_annotation(sess.source, span, {bare: value})
                        # Spans move with every splice; recompute them
                        # before the next key.
                        _analyze(sess)
                        sess.overrides.pop(key, None)
                except PennyError as err:
                    return _error_response(422, err)
            else:
                sess.overrides.update(values)
            sess.version += 1
            sess.source = replace(sess.source, version=sess.version)
            _analyze(sess)
            _rebind(sess, loaded)
            body = session_state(sess)
            body["totals"] = totals_by_vendor(sess)
            return body

    @app.post("/sessions/{session_id}/black-box-link")
    def link_black_box(session_id: str, payload: dict = Body(...)):
        sess = get_session(session_id)
        if sess is None:
            return _not_found(f"no session {session_id!r}")
        call_id = payload.get("call")
        route = payload.get("route")
        if not isinstance(call_id, str) or not isinstance(route, str):
            return JSONResponse(
                status_code=422,
                content={"error": "BadRequest", "message": "body must carry call and route strings"},
            )
        with sess.lock:
            if not sess.graph.has_node(call_id):
                return _not_found(f"no node {call_id!r}", node=call_id)
            node = sess.graph.node(call_id)
            if node.node_class is not NodeClass.EXTERNAL_HTTP_CALL:
                return _not_found(f"node {call_id!r} is not an external call", node=call_id)
            target = next(
                (
                    n.id
                    for n in sess.graph.nodes
                    if n.node_class is NodeClass.ENDPOINT and n.label == route
                ),
                None,
            )
            if target is None:
                return _not_found(f"no endpoint registered for route {route!r}", route=route)
            already = (call_id, route) in sess.links or any(
                e.src == call_id and e.dst == target for e in sess.graph.edges
            )
            if already:
                return JSONResponse(
                    status_code=409,
                    content={
                        "error": "AlreadyLinked",
                        "message": f"{call_id!r} already links to {route!r}",
                    },
                )
            # Validate the widened graph before committing: a link that
            # closes a loop must leave the session untouched.
            sess.links.append((call_id, route))
            try:
                _analyze(sess)
            except PennyError as err:
                sess.links.pop()
                _analyze(sess)
                return JSONResponse(status_code=409, content=err.to_doc())
            sess.version += 1
            sess.source = replace(sess.source, version=sess.version)
            _rebind(sess, loaded)
            body = session_state(sess)
            body["graph"] = graph_doc(sess.graph, sess.version, factor_catalogue(sess.graph, sess.overrides))
            return body

    @app.get("/sessions/{session_id}/source")
    def get_source(session_id: str):
        sess = get_session(session_id)
        if sess is None:
            return _not_found(f"no session {session_id!r}")
        with sess.lock:
            annotations = read_annotations(parse(sess.source))
            return {
                "source_version": sess.version,
                "text": sess.source.text,
                "annotations": [a.to_doc() for a in annotations],
            }

    @app.get("/sessions/{session_id}/graph")
    def get_graph(session_id: str, format: str = "json"):
        sess = get_session(session_id)
        if sess is None:
            return _not_found(f"no session {session_id!r}")
        if format not in ("json", "dot"):
            return JSONResponse(
                status_code=400,
                content={"error": "BadFormat", "message": f"format must be json or dot, got {format!r}"},
            )
        with sess.lock:
            if format == "dot":
                return Response(content=render_dot(sess.graph), media_type="text/vnd.graphviz")
            doc = graph_doc(sess.graph, sess.version, factor_catalogue(sess.graph, sess.overrides))
        return doc

    return app
