import json
import math
import wave

import pytest

from voicegate import data
from voicegate.corpus import import_corpus, load_fixture_manifest
from voicegate.embedding import build_index
from voicegate.grammar import CommandCatalog


def write_tone_wav(path, seed, duration_s=0.2, rate=16000):
    """Tiny deterministic 16 kHz mono PCM WAV; distinct per seed."""
    n = int(duration_s * rate)
    freq = 200.0 + 7.0 * (seed % 97)
    frames = bytearray()
    for i in range(n):
        sample = int(12000 * math.sin(2.0 * math.pi * freq * i / rate))
        frames += sample.to_bytes(2, "little", signed=True)
    with wave.open(str(path), "wb") as handle:
        handle.setnchannels(1)
        handle.setsampwidth(2)
        handle.setframerate(rate)
        handle.writeframes(bytes(frames))
    return path


@pytest.fixture(scope="session")
def shipped_catalog():
    return CommandCatalog.from_file(data.grammar_path())


@pytest.fixture(scope="session")
def shipped_records(shipped_catalog):
    result = import_corpus(data.corpus_path().read_text(encoding="utf-8"), shipped_catalog)
    assert not result.errors
    return result.records


@pytest.fixture(scope="session")
def shipped_index(shipped_records):
    return build_index(shipped_records)


@pytest.fixture(scope="session")
def shipped_fixtures(shipped_catalog):
    result = load_fixture_manifest(data.fixtures_manifest_path(), shipped_catalog)
    assert not result.errors
    return result.fixtures


def make_fixture_manifest(tmp_path, rows):
    """Write audio files plus a manifest; rows are manifest dicts sans audio."""
    lines = []
    for i, row in enumerate(rows):
        name = f"clip{i:03d}.wav"
        write_tone_wav(tmp_path / name, seed=i)
        lines.append(json.dumps({"audio": name, **row}))
    manifest = tmp_path / "fixtures.ndjson"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
