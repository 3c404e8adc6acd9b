"""Deterministic trigram embedding and an exact cosine nearest-neighbor index.

Texts embed as L2-normalized hashed character-trigram counts: each normalized
token is wrapped in boundary markers (``cube`` becomes ``^cube$``), its
trigrams are counted, and counts land in a fixed-size vector through a seeded
hash. Queries are an exact dot-product scan aggregated to a per-command best
score. Two document templates are supported: ``query_key`` embeds the variant
text itself, ``instruction_doc`` embeds the instruction-formatted string
"special command of {variant} is {command}" and wraps queries as a question.
"""

from __future__ import annotations

import base64
import functools
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import VariantRecord
from .errors import (
    EmptyIndexError,
    EmptyInputError,
    IncompatibleIndexError,
    IndexIntegrityError,
    ValidationError,
)
from .textnorm import normalize_text

DIM = 4096
HASH_SEED = 7
FORMAT_VERSION = 1

MODES = ("query_key", "instruction_doc")

DOC_TEMPLATE = "special command of {text} is {command}"
QUERY_TEMPLATE = "what is the special command of {text}?"


def trigrams(text: str) -> list[str]:
    """Character trigrams of each normalized, boundary-wrapped token."""
    out: list[str] = []
    for token in normalize_text(text).split():
        wrapped = f"^{token}$"
        out.extend(wrapped[i : i + 3] for i in range(len(wrapped) - 2))
    return out


@functools.lru_cache(maxsize=65536)
def _bucket(trigram: str, seed: int, dim: int) -> int:
    digest = hashlib.blake2b(
        trigram.encode("utf-8"), digest_size=8, salt=seed.to_bytes(8, "little")
    ).digest()
    return int.from_bytes(digest, "little") % dim


def embed(text: str, dim: int = DIM, seed: int = HASH_SEED) -> np.ndarray:
    """Unit-length trigram-count vector of ``text``; deterministic.

    Raises EmptyInputError when the text normalizes to nothing.
    """
    grams = trigrams(text)
    if not grams:
        raise EmptyInputError(f"no content after normalization: {text!r}")
    vector = np.zeros(dim, dtype=np.float64)
    for gram in grams:
        vector[_bucket(gram, seed, dim)] += 1.0
    return vector / np.linalg.norm(vector)


@dataclass(frozen=True)
class IndexEntry:
    command_id: str
    text: str
    document_text: str
    vector: np.ndarray


@dataclass(frozen=True)
class CommandScore:
    command_id: str
    score: float
    variant_text: str


@dataclass(frozen=True)
class QueryResult:
    """Per-command best scores, non-increasing; ties favor the smaller id."""

    matches: tuple[CommandScore, ...]

    @property
    def best(self) -> CommandScore:
        return self.matches[0]


class Index:
    """Immutable exact-cosine index over variant records."""

    def __init__(
        self,
        entries: Sequence[IndexEntry],
        matrix: np.ndarray,
        mode: str,
        dim: int,
        hash_seed: int,
    ):
        self.entries = tuple(entries)
        self._matrix = matrix
        self.mode = mode
        self.dim = dim
        self.hash_seed = hash_seed

    def __len__(self) -> int:
        return len(self.entries)

    def embed_query(self, text: str) -> np.ndarray:
        if self.mode == "instruction_doc":
            text = QUERY_TEMPLATE.format(text=text)
        return embed(text, dim=self.dim, seed=self.hash_seed)

    def query(
        self, text: str, k: int = 5, exclude_entries: Iterable[int] = ()
    ) -> QueryResult:
        """Exact top-k commands by cosine, max-aggregated over their variants.

        ``exclude_entries`` masks entry indexes out of the scan; used for
        leave-one-out evaluation.
        """
        if not self.entries:
            raise EmptyIndexError("cannot query an empty index")
        vector = self.embed_query(text)
        scores = self._matrix @ vector
        excluded = set(exclude_entries)
        best: dict[str, tuple[int, float, int]] = {}
        for i, entry in enumerate(self.entries):
            if i in excluded:
                continue
            score = float(scores[i])
            # Integer trigram counts make mathematically equal cosines across
            # entries common; ranking on a 1e-9 quantum keeps tie-breaking
            # independent of last-bit float noise.
            quantized = round(score * 1e9)
            current = best.get(entry.command_id)
            if current is None or quantized > current[0]:
                best[entry.command_id] = (quantized, score, i)
        ranked = sorted(best.items(), key=lambda item: (-item[1][0], item[0]))
        matches = tuple(
            CommandScore(command_id=cid, score=score, variant_text=self.entries[i].text)
            for cid, (_, score, i) in ranked[: max(k, 0)]
        )
        return QueryResult(matches=matches)


def document_text(record: VariantRecord, mode: str) -> str:
    if mode == "instruction_doc":
        return DOC_TEMPLATE.format(text=record.text, command=record.command_id)
    return record.text


def build_index(
    records: Sequence[VariantRecord],
    mode: str = "query_key",
    dim: int = DIM,
    hash_seed: int = HASH_SEED,
) -> Index:
    """Embed one document per record; raises EmptyIndexError on zero records."""
    if mode not in MODES:
        raise ValidationError(f"unknown template mode {mode!r}")
    if not records:
        raise EmptyIndexError("cannot build an index from zero records")
    entries: list[IndexEntry] = []
    rows: list[np.ndarray] = []
    for record in records:
        doc = document_text(record, mode)
        vector = embed(doc, dim=dim, seed=hash_seed)
        rows.append(vector)
        entries.append(
            IndexEntry(
                command_id=record.command_id,
                text=record.text,
                document_text=doc,
                vector=vector,
            )
        )
    return Index(entries, np.vstack(rows), mode=mode, dim=dim, hash_seed=hash_seed)


def save_index(index: Index, path: str | Path) -> None:
    """Write header + NDJSON entries; vectors as base64 little-endian float32."""
    entry_lines = []
    for entry in index.entries:
        packed = entry.vector.astype("<f4").tobytes()
        entry_lines.append(
            json.dumps(
                {
                    "command": entry.command_id,
                    "text": entry.text,
                    "vector_b64": base64.b64encode(packed).decode("ascii"),
                },
                ensure_ascii=False,
            )
        )
    body = "".join(line + "\n" for line in entry_lines).encode("utf-8")
    header = {
        "version": FORMAT_VERSION,
        "dim": index.dim,
        "mode": index.mode,
        "hash_seed": index.hash_seed,
        "count": len(index.entries),
        "checksum": hashlib.sha256(body).hexdigest(),
    }
    with open(path, "wb") as handle:
        handle.write((json.dumps(header) + "\n").encode("utf-8"))
        handle.write(body)


def load_index(path: str | Path) -> Index:
    """Inverse of save_index; verifies version and checksum before decoding."""
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise IndexIntegrityError("missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise IndexIntegrityError(f"unreadable header: {exc}") from exc
    if not isinstance(header, dict) or "version" not in header:
        raise IndexIntegrityError("header is not an index header")
    if header["version"] != FORMAT_VERSION:
        raise IncompatibleIndexError(
            f"index version {header['version']!r}, expected {FORMAT_VERSION}"
        )
    for key in ("dim", "mode", "hash_seed", "count", "checksum"):
        if key not in header:
            raise IndexIntegrityError(f"header missing {key!r}")
    body = raw[newline + 1 :]
    if hashlib.sha256(body).hexdigest() != header["checksum"]:
        raise IndexIntegrityError("checksum mismatch (truncated or corrupt file)")

    dim, mode, seed = header["dim"], header["mode"], header["hash_seed"]
    if mode not in MODES:
        raise IndexIntegrityError(f"unknown template mode {mode!r}")
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise IndexIntegrityError(f"hash seed out of range: {seed!r}")
    if not isinstance(dim, int) or dim < 1:
        raise IndexIntegrityError(f"invalid dimension: {dim!r}")
    lines = body.decode("utf-8").splitlines()
    if len(lines) != header["count"]:
        raise IndexIntegrityError(
            f"entry count {len(lines)} does not match header count {header['count']}"
        )
    entries: list[IndexEntry] = []
    rows: list[np.ndarray] = []
    for line_no, line in enumerate(lines, start=1):
        try:
            raw_entry = json.loads(line)
            packed = base64.b64decode(raw_entry["vector_b64"], validate=True)
        except Exception as exc:
            raise IndexIntegrityError(f"entry {line_no}: {exc}") from exc
        if len(packed) != dim * 4:
            raise IndexIntegrityError(f"entry {line_no}: vector length mismatch")
        vector = np.frombuffer(packed, dtype="<f4").astype(np.float64)
        # float32 storage perturbs the norm; restore unit length.
        vector = vector / np.linalg.norm(vector)
        record = VariantRecord(text=raw_entry["text"], command_id=raw_entry["command"])
        rows.append(vector)
        entries.append(
            IndexEntry(
                command_id=record.command_id,
                text=record.text,
                document_text=document_text(record, mode),
                vector=vector,
            )
        )
    if not entries:
        raise EmptyIndexError("index file contains zero entries")
    return Index(entries, np.vstack(rows), mode=mode, dim=dim, hash_seed=seed)
