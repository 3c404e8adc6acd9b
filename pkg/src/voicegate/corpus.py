"""Variant corpus and audio-fixture management.

A corpus maps natural-language phrasings to catalog command ids; fixtures tie
accent-tagged audio files to a reference transcript and a command. Both load
from newline-delimited JSON and validate every record against the catalog,
collecting per-line errors instead of aborting the import.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError, VoicegateError
from .grammar import CommandCatalog, ExecutableCommand
from .textnorm import normalize_text

_PLACEHOLDER_RE = re.compile(r"\{([a-z]+)\}")
_KNOWN_PLACEHOLDERS = {"verb", "object", "attribute"}


@dataclass(frozen=True)
class VariantRecord:
    """One natural-language phrasing of a catalog command."""

    text: str
    command_id: str
    source: str = "imported"  # imported | template


@dataclass(frozen=True)
class AudioFixture:
    """An audio file standing in for a live utterance of one command.

    ``reference_transcript`` is what the speaker said; ``heard_transcript``
    is what the fixture transcriber returns (identical except for fixtures
    that simulate a mis-transcription).
    """

    audio_ref: str
    content_hash: str
    accent: str
    reference_transcript: str
    command_id: str
    heard_transcript: str


@dataclass(frozen=True)
class LineError:
    line_no: int
    message: str
    raw: str


@dataclass(frozen=True)
class ImportResult:
    records: tuple[VariantRecord, ...] = ()
    errors: tuple[LineError, ...] = ()


@dataclass(frozen=True)
class FixtureImportResult:
    fixtures: tuple[AudioFixture, ...] = ()
    errors: tuple[LineError, ...] = ()


@dataclass(frozen=True)
class CorpusStats:
    """Per-command variant counts and their summary statistics."""

    per_command: dict[str, int] = field(default_factory=dict)
    mean: float = 0.0
    std_dev: float = 0.0
    minimum: int = 0
    median: int = 0
    maximum: int = 0
    total_variants: int = 0
    total_fixtures: int = 0
    accents: tuple[str, ...] = ()


def _parse_line(line: str, required: dict[str, type]) -> dict:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("expected a JSON object")
    for key, kind in required.items():
        if key not in raw:
            raise ValidationError(f"missing key {key!r}")
        if not isinstance(raw[key], kind):
            raise ValidationError(f"key {key!r} must be a {kind.__name__}")
    return raw


def import_corpus(document: str, catalog: CommandCatalog) -> ImportResult:
    """Ingest NDJSON variant records: ``{"text": ..., "command": ...}``.

    Unknown command ids and malformed lines are reported and skipped;
    duplicates (same normalized text and command) collapse to the first
    occurrence.
    """
    records: list[VariantRecord] = []
    errors: list[LineError] = []
    seen: set[tuple[str, str]] = set()
    for line_no, line in enumerate(document.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = _parse_line(line, {"text": str, "command": str})
            command = catalog.parse(raw["command"])
            if not normalize_text(raw["text"]):
                raise ValidationError("text normalizes to the empty string")
        except VoicegateError as exc:
            errors.append(LineError(line_no, str(exc), line))
            continue
        key = (normalize_text(raw["text"]), command.id)
        if key in seen:
            continue
        seen.add(key)
        records.append(VariantRecord(text=raw["text"], command_id=command.id))
    return ImportResult(records=tuple(records), errors=tuple(errors))


def export_corpus(records: list[VariantRecord] | tuple[VariantRecord, ...]) -> str:
    """Inverse of import_corpus modulo ordering and duplicate collapse."""
    lines = [
        json.dumps({"text": r.text, "command": r.command_id}, ensure_ascii=False)
        for r in records
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def load_fixture_manifest(path: str | Path, catalog: CommandCatalog) -> FixtureImportResult:
    """Load an NDJSON fixture manifest and hash each referenced audio file.

    Line schema: ``{"audio": relative path, "accent": tag, "transcript":
    reference text, "command": id}`` plus an optional ``"heard"`` field giving
    the simulated transcriber output for noisy fixtures.
    """
    path = Path(path)
    base = path.parent
    fixtures: list[AudioFixture] = []
    errors: list[LineError] = []
    for line_no, line in enumerate(
        path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            raw = _parse_line(
                line, {"audio": str, "accent": str, "transcript": str, "command": str}
            )
            command = catalog.parse(raw["command"])
            if not normalize_text(raw["transcript"]):
                raise ValidationError("transcript normalizes to the empty string")
            heard = raw.get("heard", raw["transcript"])
            if not isinstance(heard, str):
                raise ValidationError("key 'heard' must be a str")
            audio_path = base / raw["audio"]
            try:
                digest = hashlib.sha256(audio_path.read_bytes()).hexdigest()
            except OSError as exc:
                raise ValidationError(f"cannot read audio file: {exc}") from exc
        except VoicegateError as exc:
            errors.append(LineError(line_no, str(exc), line))
            continue
        fixtures.append(
            AudioFixture(
                audio_ref=str(audio_path),
                content_hash=digest,
                accent=raw["accent"],
                reference_transcript=raw["transcript"],
                command_id=command.id,
                heard_transcript=heard,
            )
        )
    return FixtureImportResult(fixtures=tuple(fixtures), errors=tuple(errors))


def generate_template_variants(
    command: ExecutableCommand, templates: list[str]
) -> list[VariantRecord]:
    """Instantiate templates against one command; inapplicable templates skip.

    A template is applicable when every placeholder it mentions is fillable:
    ``{verb}`` always, ``{object}``/``{attribute}`` only if the command has
    that slot filled. Unknown placeholder names raise ValidationError.
    """
    fills = {"verb": command.verb, "object": command.object, "attribute": command.attribute}
    records: list[VariantRecord] = []
    seen: set[str] = set()
    for template in templates:
        placeholders = set(_PLACEHOLDER_RE.findall(template))
        unknown = placeholders - _KNOWN_PLACEHOLDERS
        if unknown:
            raise ValidationError(f"unknown placeholders {sorted(unknown)} in {template!r}")
        if any(fills[p] is None for p in placeholders):
            continue
        text = _PLACEHOLDER_RE.sub(lambda m: fills[m.group(1)], template)
        key = normalize_text(text)
        if key in seen:
            continue
        seen.add(key)
        records.append(VariantRecord(text=text, command_id=command.id, source="template"))
    return records


def compute_stats(
    records: list[VariantRecord] | tuple[VariantRecord, ...],
    fixtures: list[AudioFixture] | tuple[AudioFixture, ...] = (),
) -> CorpusStats:
    """Summary statistics over per-command variant counts.

    Statistics cover commands with at least one variant. Standard deviation
    is population (the corpus is the whole population); the median of an
    even-length list is the lower middle element.
    """
    per_command: dict[str, int] = {}
    for record in records:
        per_command[record.command_id] = per_command.get(record.command_id, 0) + 1
    accents = tuple(sorted({f.accent for f in fixtures}))
    if not per_command:
        return CorpusStats(total_fixtures=len(fixtures), accents=accents)
    counts = sorted(per_command.values())
    n = len(counts)
    mean = sum(counts) / n
    variance = sum((c - mean) ** 2 for c in counts) / n
    return CorpusStats(
        per_command=per_command,
        mean=mean,
        std_dev=variance**0.5,
        minimum=counts[0],
        median=counts[(n - 1) // 2],
        maximum=counts[-1],
        total_variants=sum(counts),
        total_fixtures=len(fixtures),
        accents=accents,
    )
