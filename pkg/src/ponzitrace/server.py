"""Read-only HTTP surface: report + opcode-list endpoints and static hosting.

GET /api/report?fixture=NAME | ?address=0x...   serialized analysis report
GET /api/opcodes?fixture=NAME | ?address=0x...  disassembly grouped by block
GET /api/health                                 version + status
GET /...                                        static UI bundle

Identical concurrent requests share one analysis (single-flight); the service
never mutates fixtures.
"""

from __future__ import annotations

import json
import threading
import traceback
import urllib.parse
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .bytecode import Bytecode
from .ingest import (
    CacheEntry,
    ContractRef,
    FixtureNotFound,
    IngestError,
    InvalidAddress,
    ProviderConfig,
    ProviderError,
    fetch_bytecode,
    list_fixtures,
    load_cache_entry,
    load_fixture,
)
from .paths import Bounds
from .pipeline import TOOL_VERSION, analyze_bytecode, opcode_listing
from .report import dumps, report_to_dict


class HttpFail(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class AnalysisService:
    """Resolves fixture names / addresses to analyses, memoized single-flight."""

    fixtures_dir: Path | None = None
    cache_dir: Path | None = None
    provider: ProviderConfig | None = None  # None = network disabled
    bounds: Bounds = field(default_factory=Bounds)
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _flights: dict[str, threading.Event] = field(default_factory=dict)
    _results: dict[str, tuple[dict, dict]] = field(default_factory=dict)

    def analyses_run(self) -> int:
        return len(self._results)

    def _resolve(self, fixture: str | None, address: str | None) -> tuple[str, ContractRef, Bytecode]:
        if (fixture is None) == (address is None):
            raise HttpFail(400, "exactly one of fixture= or address= is required")
        if fixture is not None:
            try:
                ref, code = load_fixture(fixture, self.fixtures_dir)
            except FixtureNotFound as exc:
                raise HttpFail(404, str(exc))
            return f"fixture:{fixture}", ref, code
        try:
            ref = ContractRef(address=address)  # type: ignore[arg-type]
        except InvalidAddress as exc:
            raise HttpFail(400, str(exc))
        # a fixture carrying this address serves as the offline source
        for name in list_fixtures(self.fixtures_dir):
            fref, code = load_fixture(name, self.fixtures_dir)
            if fref.address == ref.address:
                return f"address:{ref.address}", fref, code
        if self.cache_dir is not None:
            cached = load_cache_entry(self.cache_dir, ref.address)
            if cached is not None:
                return f"address:{ref.address}", ref, cached
        if self.provider is None:
            raise HttpFail(404, f"{ref.address} not available offline and fetching is disabled")
        try:
            code = fetch_bytecode(ref, self.provider)
        except ProviderError as exc:
            raise HttpFail(502, f"provider failure: {exc}")
        except IngestError as exc:
            raise HttpFail(502, str(exc))
        return f"address:{ref.address}", ref, code

    def get(self, fixture: str | None, address: str | None) -> tuple[dict, dict]:
        key, ref, code = self._resolve(fixture, address)
        while True:
            with self._lock:
                if key in self._results:
                    return self._results[key]
                flight = self._flights.get(key)
                if flight is None:
                    flight = threading.Event()
                    self._flights[key] = flight
                    break
            flight.wait()
        try:
            contract = {
                "name": ref.name or ref.address,
                "address": ref.address,
                "chain": ref.chain,
                "code_hash": CacheEntry.digest(code.code),
            }
            report = report_to_dict(analyze_bytecode(code, contract, self.bounds))
            opcodes = opcode_listing(code)
            with self._lock:
                self._results[key] = (report, opcodes)
            return report, opcodes
        finally:
            with self._lock:
                del self._flights[key]
            flight.set()


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class _Handler(BaseHTTPRequestHandler):
    service: AnalysisService
    static_dir: Path | None

    def log_message(self, fmt: str, *args) -> None:  # quiet by default
        pass

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, document: dict) -> None:
        self._send(status, dumps(document).encode(), "application/json")

    def do_GET(self) -> None:  # noqa: N802 (http.server naming)
        parsed = urllib.parse.urlparse(self.path)
        query = urllib.parse.parse_qs(parsed.query)
        fixture = query.get("fixture", [None])[0]
        address = query.get("address", [None])[0]
        try:
            if parsed.path == "/api/health":
                self._send_json(200, {"status": "ok", "version": TOOL_VERSION})
            elif parsed.path == "/api/report":
                report, _ = self.service.get(fixture, address)
                self._send_json(200, report)
            elif parsed.path == "/api/opcodes":
                _, opcodes = self.service.get(fixture, address)
                self._send_json(200, opcodes)
            else:
                self._serve_static(parsed.path)
        except HttpFail as exc:
            self._send_json(exc.status, {"error": str(exc), "status": exc.status})
        except Exception:
            diagnostic_id = uuid.uuid4().hex[:12]
            traceback.print_exc()
            self._send_json(500, {"error": f"internal error (diagnostic {diagnostic_id})"})

    def _serve_static(self, path: str) -> None:
        if self.static_dir is None:
            raise HttpFail(404, "no static bundle configured")
        relative = path.lstrip("/") or "index.html"
        base = self.static_dir.resolve()
        target = (base / relative).resolve()
        if not str(target).startswith(str(base)) or not target.is_file():
            raise HttpFail(404, f"no such file: {path}")
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), content_type)


def make_server(
    service: AnalysisService, port: int = 8350, static_dir: Path | None = None
) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service, "static_dir": static_dir})
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve_forever(service: AnalysisService, port: int, static_dir: Path | None = None) -> None:
    server = make_server(service, port, static_dir)
    host, bound_port = server.server_address[:2]
    print(f"serving on http://{host}:{bound_port}/ (api under /api/)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
