"""TCP gateway: newline-delimited JSON envelopes over concurrent connections.

Each line is one envelope ``{"type": ..., "id": ..., "payload": {...}}``; the
response echoes the id. Request types: ping, map_text, map_audio, query,
execute, map_and_execute, scene_reset, scene_get. Responses: pong, mapping,
candidates, snapshot, error. A malformed line produces an error envelope and
leaves the connection usable. Every connection gets its own scene session
(fresh 96-object pile); envelopes carrying a ``session_id`` field share a
named session instead.

Timings: payloads carry ``timings`` with stt_ms/ttc_ms/exec_ms when those
stages ran, and total_ms measured around the whole request.
"""

from __future__ import annotations

import base64
import binascii
import json
import socket
import socketserver
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import data
from .corpus import load_fixture_manifest
from .embedding import Index, load_index
from .errors import (
    CommandSyntaxError,
    EmptyInputError,
    EmptySceneError,
    EmptySelectionError,
    UnknownCommandError,
    ValidationError,
    VoicegateError,
)
from .grammar import CommandCatalog
from .pipeline import (
    DEFAULT_K,
    DEFAULT_THRESHOLD,
    FAILURE_FIXTURE_MISS,
    MappingResult,
    STATUS_OK,
    map_audio,
    map_text,
)
from .scene import SceneState, execute, snapshot, spawn_pile
from .transcribe import FixtureBackend, TranscriberBackend

DEFAULT_SCENE_OBJECTS = 96
DEFAULT_SCENE_SEED = 0

ERROR_CODES = (
    "malformed",
    "unknown_type",
    "unknown_command",
    "empty_input",
    "low_confidence",
    "stt_failed",
    "fixture_miss",
    "empty_selection",
    "internal",
)


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 0
    grammar_path: str | None = None
    index_path: str | None = None
    fixtures_path: str | None = None
    threshold: float = DEFAULT_THRESHOLD
    k: int = DEFAULT_K
    ws_port: int | None = None

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ServerConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)


class SceneSession:
    """One command stream over one scene; applications serialize on the lock."""

    def __init__(self, session_id: str):
        self.session_id = session_id
        self.lock = threading.Lock()
        self.state: SceneState = spawn_pile(DEFAULT_SCENE_OBJECTS, DEFAULT_SCENE_SEED)


def encode_envelope(envelope: dict) -> bytes:
    return (json.dumps(envelope, ensure_ascii=False) + "\n").encode("utf-8")


def decode_envelope(line: str) -> dict:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("type"), str):
        raise ValidationError("envelope must be an object with a string 'type'")
    payload = raw.get("payload", {})
    if not isinstance(payload, dict):
        raise ValidationError("'payload' must be an object")
    return raw


def _mapping_payload(result: MappingResult, exec_ms: float | None = None) -> dict:
    timings: dict = {}
    if result.stt_ms is not None:
        timings["stt_ms"] = result.stt_ms
    if result.ttc_ms is not None:
        timings["ttc_ms"] = result.ttc_ms
    if exec_ms is not None:
        timings["exec_ms"] = exec_ms
    payload = {
        "status": result.status,
        "command": result.command.id if result.command else None,
        "score": result.score,
        "alternatives": [[cid, score] for cid, score in result.alternatives],
        "timings": timings,
    }
    if result.transcript is not None:
        payload["transcript"] = result.transcript
    return payload


class Gateway:
    """Shared immutable pipeline state plus the request dispatcher."""

    def __init__(
        self,
        catalog: CommandCatalog,
        index: Index,
        backend: TranscriberBackend | None = None,
        threshold: float = DEFAULT_THRESHOLD,
        k: int = DEFAULT_K,
    ):
        self.catalog = catalog
        self.index = index
        self.backend = backend
        self.threshold = threshold
        self.k = k
        self._sessions: dict[str, SceneSession] = {}
        self._sessions_lock = threading.Lock()

    def session(self, session_id: str) -> SceneSession:
        with self._sessions_lock:
            if session_id not in self._sessions:
                self._sessions[session_id] = SceneSession(session_id)
            return self._sessions[session_id]

    # -- request handling ----------------------------------------------------

    def handle(self, envelope: dict, session: SceneSession) -> dict:
        """Route one envelope; any VoicegateError becomes an error response."""
        started = time.perf_counter()
        request_id = envelope.get("id")
        request_type = envelope["type"]
        payload = envelope.get("payload", {})
        try:
            kind, body = self._dispatch(request_type, payload, session)
        except VoicegateError as exc:
            return self._error(request_id, _error_code(exc), str(exc))
        except Exception as exc:  # pragma: no cover - defensive
            return self._error(request_id, "internal", f"{type(exc).__name__}: {exc}")
        if kind == "error":
            body.setdefault("message", body.get("code", "error"))
            return {"type": "error", "id": request_id, "payload": body}
        total_ms = (time.perf_counter() - started) * 1e3
        if "timings" in body:
            body["timings"]["total_ms"] = total_ms
        return {"type": kind, "id": request_id, "payload": body}

    def _dispatch(self, request_type: str, payload: dict, session: SceneSession):
        if request_type == "ping":
            return "pong", {}
        if request_type == "map_text":
            result = self._map_text(payload)
            return "mapping", _mapping_payload(result)
        if request_type == "map_audio":
            result, cleanup = self._map_audio(payload)
            if result.status == "stt_failed":
                return "error", self._stt_error_body(result)
            return "mapping", _mapping_payload(result)
        if request_type == "query":
            return "candidates", self._query(payload)
        if request_type == "execute":
            command = self.catalog.parse(_require_str(payload, "command"))
            body, exec_ms = self._execute(session, command)
            return "snapshot", {"snapshot": body, "timings": {"exec_ms": exec_ms}}
        if request_type == "map_and_execute":
            return self._map_and_execute(payload, session)
        if request_type == "scene_reset":
            n = payload.get("n", DEFAULT_SCENE_OBJECTS)
            seed = payload.get("seed", DEFAULT_SCENE_SEED)
            if not isinstance(n, int) or not isinstance(seed, int):
                raise ValidationError("'n' and 'seed' must be integers")
            with session.lock:
                session.state = spawn_pile(n, seed)
                body = snapshot(session.state)
            return "snapshot", {"snapshot": body, "timings": {}}
        if request_type == "scene_get":
            with session.lock:
                body = snapshot(session.state)
            return "snapshot", {"snapshot": body, "timings": {}}
        return "error", {
            "code": "unknown_type",
            "message": f"unknown request type {request_type!r}",
        }

    def _map_text(self, payload: dict) -> MappingResult:
        text = _require_str(payload, "text")
        return map_text(
            self.index, text, self.catalog, threshold=self.threshold, k=self.k
        )

    def _map_audio(self, payload: dict) -> tuple[MappingResult, None]:
        if self.backend is None:
            raise ValidationError("no transcriber backend configured")
        if "audio_path" in payload:
            audio_ref = _require_str(payload, "audio_path")
            return (
                map_audio(
                    self.index,
                    audio_ref,
                    self.backend,
                    self.catalog,
                    threshold=self.threshold,
                    k=self.k,
                ),
                None,
            )
        encoded = _require_str(payload, "audio_b64")
        try:
            blob = base64.b64decode(encoded, validate=True)
        except binascii.Error as exc:
            raise ValidationError(f"audio_b64 is not valid base64: {exc}") from exc
        with tempfile.NamedTemporaryFile(suffix=".wav") as handle:
            handle.write(blob)
            handle.flush()
            result = map_audio(
                self.index,
                handle.name,
                self.backend,
                self.catalog,
                threshold=self.threshold,
                k=self.k,
            )
        return result, None

    def _query(self, payload: dict) -> dict:
        text = _require_str(payload, "text")
        k = payload.get("k", self.k)
        if not isinstance(k, int) or k < 1:
            raise ValidationError("'k' must be a positive integer")
        started = time.perf_counter()
        result = self.index.query(text, k=k)
        ttc_ms = (time.perf_counter() - started) * 1e3
        return {
            "candidates": [
                {"command": m.command_id, "score": m.score, "variant": m.variant_text}
                for m in result.matches
            ],
            "timings": {"ttc_ms": ttc_ms},
        }

    def _execute(self, session: SceneSession, command) -> tuple[dict, float]:
        started = time.perf_counter()
        with session.lock:
            session.state = execute(session.state, command)
            body = snapshot(session.state)
        return body, (time.perf_counter() - started) * 1e3

    def _map_and_execute(self, payload: dict, session: SceneSession):
        if "text" in payload:
            result = self._map_text(payload)
        else:
            result, _ = self._map_audio(payload)
        if result.status == "stt_failed":
            return "error", self._stt_error_body(result)
        if result.status != STATUS_OK:
            return "error", {
                "code": "low_confidence",
                "message": f"best score {result.score:.4f} below threshold {self.threshold}",
                "mapping": _mapping_payload(result),
                "alternatives": [[cid, score] for cid, score in result.alternatives],
            }
        body, exec_ms = self._execute(session, result.command)
        mapping = _mapping_payload(result, exec_ms=exec_ms)
        mapping["snapshot"] = body
        return "mapping", mapping

    def _stt_error_body(self, result: MappingResult) -> dict:
        code = "fixture_miss" if result.failure == FAILURE_FIXTURE_MISS else "stt_failed"
        return {
            "code": code,
            "message": f"transcription failed ({result.failure})",
            "stage": "stt",
            "mapping": _mapping_payload(result),
        }

    def _error(self, request_id, code: str, message: str) -> dict:
        return {
            "type": "error",
            "id": request_id,
            "payload": {"code": code, "message": message},
        }


def _require_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise ValidationError(f"payload key {key!r} must be a string")
    return value


def _error_code(exc: VoicegateError) -> str:
    if isinstance(exc, (UnknownCommandError, CommandSyntaxError)):
        return "unknown_command"
    if isinstance(exc, EmptyInputError):
        return "empty_input"
    if isinstance(exc, EmptySelectionError):
        return "empty_selection"
    if isinstance(exc, (ValidationError, EmptySceneError)):
        return "malformed"
    return "internal"


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        gateway: Gateway = self.server.gateway  # type: ignore[attr-defined]
        default_session = gateway.session(f"conn-{id(self)}-{threading.get_ident()}")
        while True:
            try:
                raw = self.rfile.readline()
            except (ConnectionError, OSError):
                break
            if not raw:
                break
            line = raw.decode("utf-8", "replace").strip()
            if not line:
                continue
            try:
                envelope = decode_envelope(line)
            except ValidationError as exc:
                response = {
                    "type": "error",
                    "id": None,
                    "payload": {"code": "malformed", "message": str(exc)},
                }
                if not self._send(response):
                    break
                continue
            session = default_session
            session_id = envelope.get("session_id")
            if isinstance(session_id, str) and session_id:
                session = gateway.session(session_id)
            response = gateway.handle(envelope, session)
            if not self._send(response):
                break

    def _send(self, response: dict) -> bool:
        try:
            self.wfile.write(encode_envelope(response))
            self.wfile.flush()
            return True
        except (ConnectionError, OSError):
            return False


class _ThreadingTCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


@dataclass
class GatewayServer:
    """Lifecycle wrapper: bind, serve on a background thread, stop."""

    gateway: Gateway
    host: str = "127.0.0.1"
    port: int = 0
    ws_port: int | None = None
    _tcp: _ThreadingTCPServer | None = field(default=None, repr=False)
    _ws_bridge: object | None = field(default=None, repr=False)

    def start(self) -> "GatewayServer":
        self._tcp = _ThreadingTCPServer((self.host, self.port), _Handler)
        self._tcp.gateway = self.gateway  # type: ignore[attr-defined]
        self.port = self._tcp.server_address[1]
        thread = threading.Thread(target=self._tcp.serve_forever, daemon=True)
        thread.start()
        if self.ws_port is not None:
            from .wsbridge import WebSocketBridge

            self._ws_bridge = WebSocketBridge(
                listen_host=self.host,
                listen_port=self.ws_port,
                target_host=self.host,
                target_port=self.port,
            ).start()
            self.ws_port = self._ws_bridge.port
        return self

    @property
    def address(self) -> tuple[str, int]:
        return (self.host, self.port)

    def stop(self) -> None:
        if self._ws_bridge is not None:
            self._ws_bridge.stop()
        if self._tcp is not None:
            self._tcp.shutdown()
            self._tcp.server_close()
            self._tcp = None


def build_gateway(config: ServerConfig) -> Gateway:
    """Load catalog, index, and fixture backend per the config.

    Falls back to the shipped grammar when no grammar path is given. An index
    path is required (build one with ``voicegate build-index``).
    """
    grammar_path = config.grammar_path or str(data.grammar_path())
    catalog = CommandCatalog.from_file(grammar_path)
    if not config.index_path:
        raise ValidationError("server config needs an index path")
    index = load_index(config.index_path)
    backend = None
    if config.fixtures_path:
        loaded = load_fixture_manifest(config.fixtures_path, catalog)
        if loaded.errors:
            first = loaded.errors[0]
            raise ValidationError(
                f"fixture manifest line {first.line_no}: {first.message}"
            )
        backend = FixtureBackend(loaded.fixtures)
    return Gateway(
        catalog, index, backend=backend, threshold=config.threshold, k=config.k
    )


def serve(config: ServerConfig) -> GatewayServer:
    """Start a server for the given config; caller owns stop()."""
    gateway = build_gateway(config)
    return GatewayServer(
        gateway, host=config.host, port=config.port, ws_port=config.ws_port
    ).start()


class GatewayClient:
    """Small blocking client used by tests and the CLI."""

    def __init__(self, host: str, port: int, timeout_s: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout_s)
        self._file = self._sock.makefile("rwb")
        self._next_id = 0

    def send(self, request_type: str, payload: dict | None = None, **extra) -> None:
        self._next_id += 1
        envelope = {"type": request_type, "id": str(self._next_id), "payload": payload or {}}
        envelope.update(extra)
        self._file.write(encode_envelope(envelope))
        self._file.flush()

    def send_raw(self, line: str) -> None:
        self._file.write(line.encode("utf-8") + b"\n")
        self._file.flush()

    def recv(self) -> dict:
        raw = self._file.readline()
        if not raw:
            raise ConnectionError("server closed the connection")
        return json.loads(raw.decode("utf-8"))

    def request(self, request_type: str, payload: dict | None = None, **extra) -> dict:
        self.send(request_type, payload, **extra)
        return self.recv()

    def close(self) -> None:
        try:
            self._file.close()
        finally:
            self._sock.close()

    def __enter__(self) -> "GatewayClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
