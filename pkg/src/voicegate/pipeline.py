"""Run-time text/speech-to-command mapping with WER scoring.

map_text normalizes the utterance, retrieves the best-aligned catalog command
from the index, and gates it behind a cosine threshold; map_audio prepends a
transcriber stage. Word error rate is the minimal word-level edit distance
between normalized token sequences.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path

from .embedding import Index
from .errors import (
    EmptyInputError,
    FixtureMissError,
    TranscriptionError,
    UndefinedReferenceError,
)
from .grammar import CommandCatalog, ExecutableCommand
from .textnorm import normalize_text, tokens
from .transcribe import TranscriberBackend, transcribe

DEFAULT_THRESHOLD = 0.35
DEFAULT_K = 5

STATUS_OK = "ok"
STATUS_LOW_CONFIDENCE = "low_confidence"
STATUS_STT_FAILED = "stt_failed"

FAILURE_FIXTURE_MISS = "fixture_miss"
FAILURE_STT = "stt_failed"
FAILURE_EMPTY_TRANSCRIPT = "empty_transcript"


@dataclass(frozen=True)
class WerScore:
    substitutions: int
    insertions: int
    deletions: int
    reference_words: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def rate(self) -> float:
        return self.errors / self.reference_words


@dataclass(frozen=True)
class MappingResult:
    """Outcome of one utterance: resolved command (iff ok), score, timings."""

    status: str
    command: ExecutableCommand | None
    score: float
    alternatives: tuple[tuple[str, float], ...]
    stt_ms: float | None = None
    ttc_ms: float | None = None
    transcript: str | None = None
    failure: str | None = None


def word_error_rate(reference: str, hypothesis: str) -> WerScore:
    """Minimal word-level edit distance over normalized token sequences.

    Counts substitutions, insertions, and deletions of one minimal alignment
    (unit costs); raises UndefinedReferenceError when the reference
    normalizes to zero words.
    """
    ref = tokens(reference)
    hyp = tokens(hypothesis)
    if not ref:
        raise UndefinedReferenceError(f"reference has no words: {reference!r}")

    m, n = len(ref), len(hyp)
    # cost[i][j] = minimal edits aligning ref[:i] with hyp[:j]
    cost = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        cost[i][0] = i
    for j in range(1, n + 1):
        cost[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            same = ref[i - 1] == hyp[j - 1]
            cost[i][j] = min(
                cost[i - 1][j - 1] + (0 if same else 1),
                cost[i - 1][j] + 1,  # deletion of a reference word
                cost[i][j - 1] + 1,  # insertion of a hypothesis word
            )

    substitutions = insertions = deletions = 0
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and cost[i][j] == cost[i - 1][j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and cost[i][j] == cost[i - 1][j - 1] + 1:
            substitutions += 1
            i, j = i - 1, j - 1
        elif i > 0 and cost[i][j] == cost[i - 1][j] + 1:
            deletions += 1
            i -= 1
        else:
            insertions += 1
            j -= 1
    return WerScore(
        substitutions=substitutions,
        insertions=insertions,
        deletions=deletions,
        reference_words=m,
    )


def map_text(
    index: Index,
    text: str,
    catalog: CommandCatalog,
    threshold: float = DEFAULT_THRESHOLD,
    k: int = DEFAULT_K,
    exclude_entries: tuple[int, ...] = (),
) -> MappingResult:
    """Resolve an utterance to a catalog command when confidence clears τ.

    Status is ``ok`` with the command set when the best cosine is at least
    ``threshold``; otherwise ``low_confidence`` with ranked alternatives.
    ``exclude_entries`` masks index entries (leave-one-out evaluation).
    """
    if not normalize_text(text):
        raise EmptyInputError(f"no content after normalization: {text!r}")
    start = time.perf_counter()
    result = index.query(text, k=k, exclude_entries=exclude_entries)
    ttc_ms = (time.perf_counter() - start) * 1e3
    best = result.best
    alternatives = tuple((m.command_id, m.score) for m in result.matches)
    if best.score >= threshold:
        return MappingResult(
            status=STATUS_OK,
            command=catalog.parse(best.command_id),
            score=best.score,
            alternatives=alternatives,
            ttc_ms=ttc_ms,
        )
    return MappingResult(
        status=STATUS_LOW_CONFIDENCE,
        command=None,
        score=best.score,
        alternatives=alternatives,
        ttc_ms=ttc_ms,
    )


def map_audio(
    index: Index,
    audio_ref: str | Path,
    backend: TranscriberBackend,
    catalog: CommandCatalog,
    threshold: float = DEFAULT_THRESHOLD,
    k: int = DEFAULT_K,
) -> MappingResult:
    """Transcribe then map; equal to map_text over the transcript.

    Transcription failures surface as status ``stt_failed`` with ``failure``
    naming the cause (``fixture_miss`` for unregistered audio); ttc_ms stays
    absent because the mapping stage never ran.
    """
    start = time.perf_counter()
    try:
        transcript = transcribe(audio_ref, backend)
    except TranscriptionError as exc:
        stt_ms = (time.perf_counter() - start) * 1e3
        failure = FAILURE_FIXTURE_MISS if isinstance(exc, FixtureMissError) else FAILURE_STT
        return MappingResult(
            status=STATUS_STT_FAILED,
            command=None,
            score=0.0,
            alternatives=(),
            stt_ms=stt_ms,
            failure=failure,
        )
    try:
        mapped = map_text(index, transcript.text, catalog, threshold=threshold, k=k)
    except EmptyInputError:
        # The transcriber produced no usable words; attribute to the STT stage.
        return MappingResult(
            status=STATUS_STT_FAILED,
            command=None,
            score=0.0,
            alternatives=(),
            stt_ms=transcript.elapsed_ms,
            transcript=transcript.text,
            failure=FAILURE_EMPTY_TRANSCRIPT,
        )
    return replace(mapped, stt_ms=transcript.elapsed_ms, transcript=transcript.text)
