"""Transcriber backends: fixture replay, subprocess and HTTP adapters."""

import http.server
import json
import sys
import threading

import pytest

from conftest import make_fixture_manifest, write_tone_wav
from voicegate import data
from voicegate.corpus import load_fixture_manifest
from voicegate.errors import (
    FixtureMissError,
    TranscriptionError,
    TranscriptionTimeout,
)
from voicegate.grammar import CommandCatalog
from voicegate.transcribe import (
    FixtureBackend,
    HttpBackend,
    ProcessBackend,
    get_backend,
    register_backend,
    transcribe,
)


@pytest.fixture(scope="module")
def catalog():
    return CommandCatalog.from_file(data.grammar_path())


def test_fixture_backend_returns_manifest_transcript(tmp_path, catalog):
    manifest = make_fixture_manifest(
        tmp_path,
        [{"accent": "en-IN", "transcript": "select all red boxes", "command": "select(cube, red)"}],
    )
    loaded = load_fixture_manifest(manifest, catalog)
    backend = FixtureBackend(loaded.fixtures)
    result = transcribe(loaded.fixtures[0].audio_ref, backend)
    assert result.text == "select all red boxes"
    assert result.backend == "fixture"
    assert result.elapsed_ms >= 0.0


def test_fixture_backend_miss(tmp_path):
    backend = FixtureBackend([])
    stray = tmp_path / "stray.wav"
    write_tone_wav(stray, seed=123)
    with pytest.raises(FixtureMissError):
        backend.transcribe(stray)


def test_fixture_backend_missing_file(tmp_path):
    backend = FixtureBackend([])
    with pytest.raises(FixtureMissError):
        backend.transcribe(tmp_path / "nope.wav")


def test_fixture_keyed_on_content_not_path(tmp_path, catalog):
    manifest = make_fixture_manifest(
        tmp_path, [{"accent": "en-US", "transcript": "drop them", "command": "drop"}]
    )
    loaded = load_fixture_manifest(manifest, catalog)
    copy = tmp_path / "copied-elsewhere.wav"
    copy.write_bytes((tmp_path / "clip000.wav").read_bytes())
    backend = FixtureBackend(loaded.fixtures)
    assert backend.transcribe(copy) == "drop them"


ECHO_SCRIPT = (
    "import json,sys\n"
    "request = json.loads(sys.stdin.readline())\n"
    "print(json.dumps({'text': 'echo ' + request['audio_path'].rsplit('/', 1)[-1],"
    " 'elapsed_ms': 1}))\n"
)


def test_process_backend_round_trip(tmp_path):
    backend = ProcessBackend([sys.executable, "-c", ECHO_SCRIPT], name="echo")
    text = backend.transcribe(tmp_path / "clip.wav")
    assert text == "echo clip.wav"


def test_process_backend_timeout():
    backend = ProcessBackend(
        [sys.executable, "-c", "import time; time.sleep(30)"], timeout_s=0.3
    )
    with pytest.raises(TranscriptionTimeout):
        backend.transcribe("x.wav")


def test_process_backend_bad_reply():
    backend = ProcessBackend([sys.executable, "-c", "print('not json')"])
    with pytest.raises(TranscriptionError):
        backend.transcribe("x.wav")


def test_process_backend_nonzero_exit():
    backend = ProcessBackend([sys.executable, "-c", "raise SystemExit(3)"])
    with pytest.raises(TranscriptionError):
        backend.transcribe("x.wav")


class _Handler(http.server.BaseHTTPRequestHandler):
    def do_POST(self):
        body = self.rfile.read(int(self.headers["Content-Length"]))
        request = json.loads(body)
        reply = json.dumps(
            {"text": "http " + request["audio_path"].rsplit("/", 1)[-1], "elapsed_ms": 2}
        ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Length", str(len(reply)))
        self.end_headers()
        self.wfile.write(reply)

    def log_message(self, *args):
        pass


@pytest.fixture()
def http_url():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/stt"
    server.shutdown()


def test_http_backend_round_trip(http_url):
    backend = HttpBackend(http_url, name="remote")
    assert backend.transcribe("clips/take1.wav") == "http take1.wav"


def test_http_backend_unreachable():
    backend = HttpBackend("http://127.0.0.1:1/stt", timeout_s=0.5)
    with pytest.raises(TranscriptionError):
        backend.transcribe("x.wav")


def test_registry_round_trip():
    backend = FixtureBackend([])
    register_backend(backend, name="fixture-test")
    assert get_backend("fixture-test") is backend
    with pytest.raises(TranscriptionError):
        get_backend("never-registered")
