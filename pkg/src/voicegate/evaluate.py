"""Robustness and latency evaluation over fixtures and corpora.

Three evaluations mirror the pipeline stages: speech-to-text success (exact
normalized transcript match, WER = 0), text-to-command success (mapping a
variant back to its own command, optionally leave-one-out), and end to end
(audio through to the executed command). The overall rate is reported both
as the product of the two stage rates and as directly measured; the product
assumes an independence the measurement need not satisfy, so neither bounds
the other.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .corpus import AudioFixture, VariantRecord
from .embedding import Index
from .errors import TranscriptionError, UndefinedRateError, ValidationError
from .grammar import CommandCatalog
from .pipeline import (
    DEFAULT_K,
    DEFAULT_THRESHOLD,
    STATUS_OK,
    map_audio,
    map_text,
    word_error_rate,
)
from .textnorm import normalize_text
from .transcribe import TranscriberBackend, transcribe

UNTAGGED_ACCENT = "(untagged)"

REPORT_VERSION = 1


@dataclass(frozen=True)
class RateEstimate:
    """Success fraction with its binomial standard error sqrt(p(1-p)/n)."""

    successes: int
    total: int

    @property
    def rate(self) -> float:
        return self.successes / self.total

    @property
    def stderr(self) -> float:
        p = self.rate
        return math.sqrt(p * (1.0 - p) / self.total)


@dataclass(frozen=True)
class Percentiles:
    p50: float
    p90: float
    p99: float


@dataclass(frozen=True)
class Failure:
    stage: str  # stt | ttc | e2e
    utterance: str
    expected: str
    observed: str


@dataclass(frozen=True)
class SttOutcome:
    audio_ref: str
    accent: str
    command_id: str
    transcript: str | None
    wer_rate: float | None
    ok: bool
    error: str | None
    stt_ms: float | None


@dataclass(frozen=True)
class SttEval:
    outcomes: tuple[SttOutcome, ...]
    rate: RateEstimate
    per_accent: dict[str, dict]


@dataclass(frozen=True)
class TtcOutcome:
    text: str
    expected: str
    observed: str
    score: float
    status: str
    ok: bool


@dataclass(frozen=True)
class TtcEval:
    outcomes: tuple[TtcOutcome, ...]
    rate: RateEstimate
    held_out: bool

    @property
    def failures(self) -> tuple[TtcOutcome, ...]:
        return tuple(o for o in self.outcomes if not o.ok)


@dataclass(frozen=True)
class EvalReport:
    """Full end-to-end report; see emit_report for serialized layouts."""

    utterances: int
    s_stt: RateEstimate
    s_ttc: RateEstimate
    s_stc_measured: RateEstimate
    per_accent: dict[str, dict] = field(default_factory=dict)
    latency_ms: dict[str, Percentiles] = field(default_factory=dict)
    failures: tuple[Failure, ...] = ()

    @property
    def s_stc_product(self) -> float:
        return self.s_stt.rate * self.s_ttc.rate

    def to_dict(self) -> dict:
        return {
            "utterances": self.utterances,
            "s_stt": {"successes": self.s_stt.successes, "total": self.s_stt.total},
            "s_ttc": {"successes": self.s_ttc.successes, "total": self.s_ttc.total},
            "s_stc_measured": {
                "successes": self.s_stc_measured.successes,
                "total": self.s_stc_measured.total,
            },
            "per_accent": self.per_accent,
            "latency_ms": {
                stage: {"p50": p.p50, "p90": p.p90, "p99": p.p99}
                for stage, p in self.latency_ms.items()
            },
            "failures": [
                {
                    "stage": f.stage,
                    "utterance": f.utterance,
                    "expected": f.expected,
                    "observed": f.observed,
                }
                for f in self.failures
            ],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EvalReport":
        return cls(
            utterances=raw["utterances"],
            s_stt=RateEstimate(**raw["s_stt"]),
            s_ttc=RateEstimate(**raw["s_ttc"]),
            s_stc_measured=RateEstimate(**raw["s_stc_measured"]),
            per_accent=dict(raw["per_accent"]),
            latency_ms={
                stage: Percentiles(**values)
                for stage, values in raw["latency_ms"].items()
            },
            failures=tuple(Failure(**f) for f in raw["failures"]),
        )


def percentiles(values: list[float]) -> Percentiles:
    """Nearest-rank percentiles; deterministic and library-free."""
    ordered = sorted(values)
    n = len(ordered)

    def at(q: float) -> float:
        return ordered[min(n - 1, max(0, math.ceil(q * n) - 1))]

    return Percentiles(p50=at(0.50), p90=at(0.90), p99=at(0.99))


def _accent_label(accent: str) -> str:
    return accent if accent.strip() else UNTAGGED_ACCENT


def overall_rate(s_stt: float, s_ttc: float) -> float:
    """The product formula for the overall spoken-command success rate."""
    return s_stt * s_ttc


def eval_stt(
    fixtures: tuple[AudioFixture, ...] | list[AudioFixture],
    backend: TranscriberBackend,
) -> SttEval:
    """Per-fixture WER against the reference transcript; success is WER = 0.

    Transcription errors (fixture misses included) count as failures and
    stay listed in the outcomes.
    """
    if not fixtures:
        raise UndefinedRateError("no fixtures to evaluate")
    outcomes: list[SttOutcome] = []
    for fixture in fixtures:
        try:
            result = transcribe(fixture.audio_ref, backend)
        except TranscriptionError as exc:
            outcomes.append(
                SttOutcome(
                    audio_ref=fixture.audio_ref,
                    accent=_accent_label(fixture.accent),
                    command_id=fixture.command_id,
                    transcript=None,
                    wer_rate=None,
                    ok=False,
                    error=str(exc),
                    stt_ms=None,
                )
            )
            continue
        score = word_error_rate(fixture.reference_transcript, result.text)
        outcomes.append(
            SttOutcome(
                audio_ref=fixture.audio_ref,
                accent=_accent_label(fixture.accent),
                command_id=fixture.command_id,
                transcript=result.text,
                wer_rate=score.rate,
                ok=score.rate == 0.0,
                error=None,
                stt_ms=result.elapsed_ms,
            )
        )
    per_accent: dict[str, dict] = {}
    for outcome in outcomes:
        bucket = per_accent.setdefault(
            outcome.accent, {"count": 0, "successes": 0, "wer_sum": 0.0, "scored": 0}
        )
        bucket["count"] += 1
        bucket["successes"] += int(outcome.ok)
        if outcome.wer_rate is not None:
            bucket["wer_sum"] += outcome.wer_rate
            bucket["scored"] += 1
    summary = {
        accent: {
            "count": b["count"],
            "successes": b["successes"],
            "mean_wer": (b["wer_sum"] / b["scored"]) if b["scored"] else None,
        }
        for accent, b in sorted(per_accent.items())
    }
    rate = RateEstimate(sum(o.ok for o in outcomes), len(outcomes))
    return SttEval(outcomes=tuple(outcomes), rate=rate, per_accent=summary)


def _entry_positions(index: Index) -> dict[tuple[str, str], int]:
    return {
        (normalize_text(entry.text), entry.command_id): i
        for i, entry in enumerate(index.entries)
    }


def eval_ttc(
    records: tuple[VariantRecord, ...] | list[VariantRecord],
    index: Index,
    catalog: CommandCatalog,
    threshold: float = DEFAULT_THRESHOLD,
    k: int = DEFAULT_K,
    held_out: bool = False,
) -> TtcEval:
    """Map each variant's text; success means ok status and its own command.

    With ``held_out`` each record is masked out of the index it queries
    (leave-one-out), approximating novel-utterance robustness.
    """
    if not records:
        raise UndefinedRateError("no records to evaluate")
    positions = _entry_positions(index) if held_out else {}
    outcomes: list[TtcOutcome] = []
    for record in records:
        exclude: tuple[int, ...] = ()
        if held_out:
            key = (normalize_text(record.text), record.command_id)
            if key not in positions:
                raise ValidationError(
                    f"record not present in index, cannot hold out: {record.text!r}"
                )
            exclude = (positions[key],)
        result = map_text(
            index,
            record.text,
            catalog,
            threshold=threshold,
            k=k,
            exclude_entries=exclude,
        )
        observed = result.command.id if result.command else (
            result.alternatives[0][0] if result.alternatives else ""
        )
        ok = result.status == STATUS_OK and observed == record.command_id
        outcomes.append(
            TtcOutcome(
                text=record.text,
                expected=record.command_id,
                observed=observed,
                score=result.score,
                status=result.status,
                ok=ok,
            )
        )
    rate = RateEstimate(sum(o.ok for o in outcomes), len(outcomes))
    return TtcEval(outcomes=tuple(outcomes), rate=rate, held_out=held_out)


def eval_end_to_end(
    fixtures: tuple[AudioFixture, ...] | list[AudioFixture],
    index: Index,
    catalog: CommandCatalog,
    backend: TranscriberBackend,
    threshold: float = DEFAULT_THRESHOLD,
    k: int = DEFAULT_K,
) -> EvalReport:
    """Audio through mapping, with stage-attributed failures.

    s_stt scores transcripts against references; s_ttc scores the mapper on
    the clean reference texts; s_stc_measured scores the full audio path.
    """
    if not fixtures:
        raise UndefinedRateError("no fixtures to evaluate")
    stt_ok = ttc_ok = e2e_ok = 0
    stt_times: list[float] = []
    ttc_times: list[float] = []
    failures: list[Failure] = []
    per_accent: dict[str, dict] = {}

    for fixture in fixtures:
        accent = _accent_label(fixture.accent)
        bucket = per_accent.setdefault(
            accent, {"count": 0, "stt_successes": 0, "wer_sum": 0.0, "scored": 0}
        )
        bucket["count"] += 1

        measured = map_audio(
            index, fixture.audio_ref, backend, catalog, threshold=threshold, k=k
        )
        if measured.stt_ms is not None:
            stt_times.append(measured.stt_ms)
        if measured.ttc_ms is not None:
            ttc_times.append(measured.ttc_ms)

        # Stage 1: strict transcript match.
        if measured.transcript is None:
            failures.append(
                Failure(
                    stage="stt",
                    utterance=fixture.reference_transcript,
                    expected=fixture.reference_transcript,
                    observed=f"<{measured.failure or 'stt error'}>",
                )
            )
        else:
            wer = word_error_rate(fixture.reference_transcript, measured.transcript)
            bucket["wer_sum"] += wer.rate
            bucket["scored"] += 1
            if wer.rate == 0.0:
                stt_ok += 1
                bucket["stt_successes"] += 1
            else:
                failures.append(
                    Failure(
                        stage="stt",
                        utterance=fixture.reference_transcript,
                        expected=fixture.reference_transcript,
                        observed=measured.transcript,
                    )
                )

        # Stage 2: mapper quality on the clean reference text.
        reference_mapping = map_text(
            index, fixture.reference_transcript, catalog, threshold=threshold, k=k
        )
        reference_observed = (
            reference_mapping.command.id if reference_mapping.command else ""
        )
        if reference_mapping.status == STATUS_OK and reference_observed == fixture.command_id:
            ttc_ok += 1
        else:
            failures.append(
                Failure(
                    stage="ttc",
                    utterance=fixture.reference_transcript,
                    expected=fixture.command_id,
                    observed=reference_observed or f"<{reference_mapping.status}>",
                )
            )

        # End to end: the audio path resolved to the right command.
        measured_observed = measured.command.id if measured.command else ""
        if measured.status == STATUS_OK and measured_observed == fixture.command_id:
            e2e_ok += 1
        else:
            failures.append(
                Failure(
                    stage="e2e",
                    utterance=fixture.reference_transcript,
                    expected=fixture.command_id,
                    observed=measured_observed or f"<{measured.status}>",
                )
            )

    total = len(fixtures)
    latency = {}
    if stt_times:
        latency["stt_ms"] = percentiles(stt_times)
    if ttc_times:
        latency["ttc_ms"] = percentiles(ttc_times)
    accent_summary = {
        accent: {
            "count": b["count"],
            "stt_successes": b["stt_successes"],
            "mean_wer": (b["wer_sum"] / b["scored"]) if b["scored"] else None,
        }
        for accent, b in sorted(per_accent.items())
    }
    return EvalReport(
        utterances=total,
        s_stt=RateEstimate(stt_ok, total),
        s_ttc=RateEstimate(ttc_ok, total),
        s_stc_measured=RateEstimate(e2e_ok, total),
        per_accent=accent_summary,
        latency_ms=latency,
        failures=tuple(failures),
    )


def emit_report(report: EvalReport, format: str = "json") -> str:
    """Serialize a report: versioned JSON, or a Markdown table layout."""
    if format == "json":
        payload = {"version": REPORT_VERSION, **report.to_dict()}
        payload["s_stc_product"] = report.s_stc_product
        payload["rates"] = {
            "s_stt": report.s_stt.rate,
            "s_stt_stderr": report.s_stt.stderr,
            "s_ttc": report.s_ttc.rate,
            "s_ttc_stderr": report.s_ttc.stderr,
            "s_stc_measured": report.s_stc_measured.rate,
            "s_stc_measured_stderr": report.s_stc_measured.stderr,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if format == "markdown":
        lines = [
            "# Evaluation report",
            "",
            f"Utterances evaluated: {report.utterances}",
            "",
            "| rate | value | std err |",
            "| --- | --- | --- |",
            f"| s_stt | {report.s_stt.rate:.4f} | {report.s_stt.stderr:.4f} |",
            f"| s_ttc | {report.s_ttc.rate:.4f} | {report.s_ttc.stderr:.4f} |",
            f"| s_stc (product) | {report.s_stc_product:.4f} | |",
            f"| s_stc (measured) | {report.s_stc_measured.rate:.4f} | {report.s_stc_measured.stderr:.4f} |",
            "",
            "## Per accent",
            "",
            "| accent | utterances | stt successes | mean WER |",
            "| --- | --- | --- | --- |",
        ]
        for accent, stats in report.per_accent.items():
            wer = "" if stats["mean_wer"] is None else f"{stats['mean_wer']:.4f}"
            lines.append(
                f"| {accent} | {stats['count']} | {stats['stt_successes']} | {wer} |"
            )
        lines += ["", "## Latency (ms)", "", "| stage | p50 | p90 | p99 |", "| --- | --- | --- | --- |"]
        for stage, p in report.latency_ms.items():
            lines.append(f"| {stage} | {p.p50:.2f} | {p.p90:.2f} | {p.p99:.2f} |")
        if report.failures:
            lines += ["", "## Failures", ""]
            for f in report.failures:
                lines.append(
                    f"- [{f.stage}] {f.utterance!r}: expected {f.expected!r}, observed {f.observed!r}"
                )
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown report format {format!r}")


def parse_report(text: str) -> EvalReport:
    """Inverse of emit_report for the JSON format."""
    raw = json.loads(text)
    if raw.get("version") != REPORT_VERSION:
        raise ValidationError(f"unsupported report version {raw.get('version')!r}")
    return EvalReport.from_dict(raw)
