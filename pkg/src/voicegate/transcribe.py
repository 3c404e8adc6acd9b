"""Pluggable transcriber backends and the timed transcribe() entry point.

The fixture backend keys on the audio file's content hash and replays the
transcript recorded in the manifest, keeping tests hermetic. External models
plug in through a line-oriented subprocess or an HTTP POST adapter; both
speak ``{"audio_path": ...}`` in and ``{"text": ..., "elapsed_ms": N}`` out.
"""

from __future__ import annotations

import hashlib
import json
import subprocess
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

from .corpus import AudioFixture
from .errors import FixtureMissError, TranscriptionError, TranscriptionTimeout

DEFAULT_TIMEOUT_S = 10.0


@dataclass(frozen=True)
class TranscriptResult:
    text: str
    backend: str
    elapsed_ms: float


class TranscriberBackend(Protocol):
    """Anything with a name that turns an audio path into text.

    Implementations must either be safe for concurrent calls or document
    that access is serialized.
    """

    name: str

    def transcribe(self, audio_ref: str | Path) -> str: ...


class FixtureBackend:
    """Replays manifest transcripts, keyed by audio content hash."""

    name = "fixture"

    def __init__(self, fixtures: Sequence[AudioFixture]):
        self._by_hash = {f.content_hash: f.heard_transcript for f in fixtures}

    def transcribe(self, audio_ref: str | Path) -> str:
        try:
            digest = hashlib.sha256(Path(audio_ref).read_bytes()).hexdigest()
        except OSError as exc:
            raise FixtureMissError(f"cannot read audio file {audio_ref}: {exc}") from exc
        if digest not in self._by_hash:
            raise FixtureMissError(f"audio content {digest[:12]}… not in fixture manifest")
        return self._by_hash[digest]


class ProcessBackend:
    """One-shot subprocess adapter: JSON request on stdin, JSON reply on stdout."""

    def __init__(self, argv: Sequence[str], name: str = "process", timeout_s: float = DEFAULT_TIMEOUT_S):
        self.argv = list(argv)
        self.name = name
        self.timeout_s = timeout_s

    def transcribe(self, audio_ref: str | Path) -> str:
        request = json.dumps({"audio_path": str(audio_ref)}) + "\n"
        try:
            proc = subprocess.run(
                self.argv,
                input=request.encode("utf-8"),
                capture_output=True,
                timeout=self.timeout_s,
            )
        except subprocess.TimeoutExpired as exc:
            raise TranscriptionTimeout(
                f"backend {self.name!r} exceeded {self.timeout_s}s"
            ) from exc
        except OSError as exc:
            raise TranscriptionError(f"cannot launch backend {self.name!r}: {exc}") from exc
        if proc.returncode != 0:
            raise TranscriptionError(
                f"backend {self.name!r} exited {proc.returncode}: "
                f"{proc.stderr.decode('utf-8', 'replace').strip()}"
            )
        return _parse_reply(self.name, proc.stdout.decode("utf-8", "replace"))


class HttpBackend:
    """HTTP POST adapter speaking the same request/reply documents."""

    def __init__(self, url: str, name: str = "http", timeout_s: float = DEFAULT_TIMEOUT_S):
        self.url = url
        self.name = name
        self.timeout_s = timeout_s

    def transcribe(self, audio_ref: str | Path) -> str:
        body = json.dumps({"audio_path": str(audio_ref)}).encode("utf-8")
        request = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout_s) as reply:
                return _parse_reply(self.name, reply.read().decode("utf-8", "replace"))
        except TimeoutError as exc:
            raise TranscriptionTimeout(f"backend {self.name!r} timed out") from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, TimeoutError):
                raise TranscriptionTimeout(f"backend {self.name!r} timed out") from exc
            raise TranscriptionError(f"backend {self.name!r} failed: {exc}") from exc


def _parse_reply(name: str, payload: str) -> str:
    try:
        reply = json.loads(payload.strip().splitlines()[-1])
        text = reply["text"]
    except (json.JSONDecodeError, KeyError, IndexError) as exc:
        raise TranscriptionError(f"backend {name!r} returned malformed reply") from exc
    if not isinstance(text, str):
        raise TranscriptionError(f"backend {name!r} returned non-string text")
    return text


_REGISTRY: dict[str, TranscriberBackend] = {}


def register_backend(backend: TranscriberBackend, name: str | None = None) -> None:
    _REGISTRY[name or backend.name] = backend


def get_backend(name: str) -> TranscriberBackend:
    if name not in _REGISTRY:
        raise TranscriptionError(f"no backend registered under {name!r}")
    return _REGISTRY[name]


def registered_backends() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def transcribe(audio_ref: str | Path, backend: TranscriberBackend) -> TranscriptResult:
    """Run one backend call under a monotonic clock."""
    start = time.perf_counter()
    text = backend.transcribe(audio_ref)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return TranscriptResult(text=text, backend=backend.name, elapsed_ms=elapsed_ms)
