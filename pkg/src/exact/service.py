"""Read-only query layer and HTTP service over a written analysis bundle.

The service loads ``analysis.json`` once and answers every request from
that snapshot: each endpoint is a pure projection of the file, so
responses can never drift from what ``analyze`` wrote.  When a UI asset
directory is available its files are served at the root path.
"""

from __future__ import annotations

import mimetypes
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from .a1 import A1ParseError, CellAddress, parse_a1
from .logic import AccessKind, ProcedureId
from .reporting import (
    AnalysisBundle,
    UnknownProcedureError,
    bundle_dict,
    bundle_from_json,
    canonical_json,
    dependency_subgraph,
)


class XrefError(ValueError):
    def __init__(self, message: str, status: int = 400):
        self.status = status
        super().__init__(message)


@dataclass(frozen=True)
class XrefResult:
    """Procedures whose read/write groups contain the queried cell."""

    query: CellAddress
    readers: tuple[ProcedureId, ...]
    writers: tuple[ProcedureId, ...]
    groups: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "query": {"sheet": self.query.sheet, "row": self.query.row, "col": self.query.col},
            "readers": [p.dotted for p in self.readers],
            "writers": [p.dotted for p in self.writers],
            "groups": list(self.groups),
        }


class AnalysisService:
    """In-memory projection of one analysis.json file."""

    def __init__(self, bundle: AnalysisBundle):
        self.bundle = bundle

    @classmethod
    def load(cls, out_dir: str | Path) -> AnalysisService:
        path = Path(out_dir) / "analysis.json"
        if not path.is_file():
            raise FileNotFoundError(f"analysis file not found: {path}")
        return cls(bundle_from_json(path.read_text(encoding="utf-8")))

    # -- slices --

    def structure(self) -> dict:
        return self.bundle.structure

    def metrics(self) -> dict:
        return self.bundle.metrics.to_dict()

    def model(self) -> dict:
        return bundle_dict(self.bundle)["conceptualModel"]

    def dependencies(self) -> dict:
        return bundle_dict(self.bundle)["dependencies"]

    def diagnostics(self) -> list:
        return bundle_dict(self.bundle)["diagnostics"]

    # -- queries --

    def procedure_detail(self, dotted: str) -> dict:
        dep = self.bundle.dependencies
        info = dep.procedure(dotted)
        if info is None:
            raise UnknownProcedureError(dotted, [p.id.dotted for p in dep.procedures])
        graph = dependency_subgraph(dep, dotted)
        callees = []
        callers = []
        for edge in dep.call_edges:
            if edge.caller.key == info.id.key:
                if edge.callee is not None:
                    callees.append({"id": edge.callee.dotted, "resolved": True})
                else:
                    callees.append(
                        {"name": edge.unresolved_name, "resolved": False, "reason": edge.reason}
                    )
            if edge.callee is not None and edge.callee.key == info.id.key:
                callers.append(edge.caller.dotted)
        bindings = [
            {
                "sourceKind": b.source_kind.value,
                "sourceName": b.source_name,
                "eventName": b.event_name,
            }
            for b in dep.event_bindings
            if b.handler.key == info.id.key
        ]
        groups = {
            "read": [
                {"id": g.id, "label": g.label, "dynamic": g.dynamic}
                for g in dep.groups_for(info.id, AccessKind.READ)
            ],
            "write": [
                {"id": g.id, "label": g.label, "dynamic": g.dynamic}
                for g in dep.groups_for(info.id, AccessKind.WRITE)
            ],
        }
        return {
            "procedure": {
                "id": info.id.dotted,
                "module": info.id.module,
                "name": info.id.name,
                "kind": info.kind,
                "visibility": info.visibility,
                "signature": info.signature,
                "span": list(info.span),
                "moduleKind": info.module_kind,
            },
            "eventBindings": bindings,
            "callees": callees,
            "callers": sorted(set(callers)),
            "readGroups": groups["read"],
            "writeGroups": groups["write"],
            "graph": graph,
        }

    def xref(self, cell_ref: str) -> XrefResult:
        try:
            rect = parse_a1(cell_ref)
        except A1ParseError as exc:
            raise XrefError(str(exc)) from exc
        if rect.sheet is None:
            raise XrefError(f"cell reference must be sheet-qualified: {cell_ref!r}")
        if not rect.is_single_cell:
            raise XrefError(f"xref expects a single cell, got range {cell_ref!r}")
        known_sheets = {s["name"].lower() for s in self.bundle.workbook["sheets"]}
        if rect.sheet.lower() not in known_sheets:
            raise XrefError(f"unknown sheet {rect.sheet!r}", status=404)
        query = CellAddress(rect.sheet, rect.top, rect.left)
        readers: list[ProcedureId] = []
        writers: list[ProcedureId] = []
        groups: list[str] = []
        for group in self.bundle.dependencies.cell_groups:
            if group.contains(rect.sheet, rect.top, rect.left):
                groups.append(group.id)
                bucket = readers if group.kind is AccessKind.READ else writers
                if all(p.key != group.procedure.key for p in bucket):
                    bucket.append(group.procedure)
        readers.sort(key=lambda p: p.key)
        writers.sort(key=lambda p: p.key)
        return XrefResult(
            query=query, readers=tuple(readers), writers=tuple(writers), groups=tuple(groups)
        )


# --- HTTP layer -----------------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    service: AnalysisService
    ui_dir: Path | None = None
    quiet = True

    def log_message(self, fmt: str, *args) -> None:  # noqa: A003 - stdlib signature
        if not self.quiet:
            super().log_message(fmt, *args)

    # -- helpers --

    def _send_json(self, payload, status: int = 200) -> None:
        body = canonical_json(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, message: str, status: int, **extra) -> None:
        self._send_json({"error": message, **extra}, status=status)

    def _send_file(self, path: Path) -> None:
        content_type = mimetypes.guess_type(str(path))[0] or "application/octet-stream"
        body = path.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    # -- routing --

    def do_GET(self) -> None:  # noqa: N802 - stdlib naming
        parsed = urlparse(self.path)
        segments = [unquote(s) for s in parsed.path.split("/") if s]
        try:
            if segments[:1] == ["api"]:
                self._handle_api(segments[1:], parse_qs(parsed.query))
            else:
                self._handle_static(segments)
        except BrokenPipeError:  # client went away; nothing to do
            pass

    def _handle_api(self, segments: list[str], query: dict[str, list[str]]) -> None:
        service = self.service
        if segments == ["structure"]:
            self._send_json(service.structure())
        elif segments == ["metrics"]:
            self._send_json(service.metrics())
        elif segments == ["model"]:
            self._send_json(service.model())
        elif segments == ["dependencies"]:
            self._send_json(service.dependencies())
        elif segments == ["diagnostics"]:
            self._send_json(service.diagnostics())
        elif len(segments) == 3 and segments[0] == "procedures" and segments[2] == "deps":
            try:
                self._send_json(service.procedure_detail(segments[1]))
            except UnknownProcedureError as exc:
                self._send_error_json(
                    f"unknown procedure {exc.dotted!r}", 404, known=exc.known
                )
        elif segments == ["xref"]:
            cell = query.get("cell", [""])[0]
            if not cell:
                self._send_error_json("missing 'cell' query parameter", 400)
                return
            try:
                self._send_json(service.xref(cell).to_dict())
            except XrefError as exc:
                self._send_error_json(str(exc), exc.status)
        else:
            self._send_error_json(f"no such API route: /{'/'.join(['api'] + segments)}", 404)

    def _handle_static(self, segments: list[str]) -> None:
        if self.ui_dir is None:
            if not segments:
                self._send_json(
                    {
                        "service": "spreadsheet analysis explorer",
                        "api": [
                            "/api/structure",
                            "/api/metrics",
                            "/api/model",
                            "/api/dependencies",
                            "/api/procedures/<Module.Name>/deps",
                            "/api/xref?cell=<Sheet!A1>",
                            "/api/diagnostics",
                        ],
                    }
                )
            else:
                self._send_error_json(
                    f"asset not found (no UI configured): /{'/'.join(segments)}", 404
                )
            return
        name = "/".join(segments) or "index.html"
        target = (self.ui_dir / name).resolve()
        root = self.ui_dir.resolve()
        if root not in target.parents and target != root:
            self._send_error_json("path outside UI root", 403)
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_error_json(f"asset not found: /{name}", 404)
            return
        self._send_file(target)


def make_server(
    out_dir: str | Path,
    port: int = 8000,
    host: str = "127.0.0.1",
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = AnalysisService.load(out_dir)
    resolved_ui: Path | None = None
    if ui_dir is not None:
        resolved_ui = Path(ui_dir)
    else:
        default_ui = Path(out_dir) / "ui"
        if default_ui.is_dir():
            resolved_ui = default_ui
    handler = type("BoundHandler", (_Handler,), {"service": service, "ui_dir": resolved_ui})
    return ThreadingHTTPServer((host, port), handler)


def serve(
    out_dir: str | Path,
    port: int = 8000,
    host: str = "127.0.0.1",
    ui_dir: str | Path | None = None,
) -> None:
    """Run the read-only analysis service until interrupted."""
    server = make_server(out_dir, port=port, host=host, ui_dir=ui_dir)
    address = server.server_address
    print(f"serving analysis on http://{address[0]}:{address[1]}/ (Ctrl-C to stop)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
