"""Deterministic text normalization applied before matching, embedding, and WER."""

from __future__ import annotations

import re
import unicodedata

# Everything outside lowercase ASCII letters, digits, space, and apostrophe
# becomes a space; runs of whitespace then collapse.
_STRIP_RE = re.compile(r"[^a-z0-9' ]+")


def normalize_text(text: str) -> str:
    """Lowercase NFC form with punctuation stripped and whitespace collapsed.

    May return the empty string (e.g. for punctuation-only input); callers
    that require content must check.
    """
    text = unicodedata.normalize("NFC", text).lower()
    text = _STRIP_RE.sub(" ", text)
    return " ".join(text.split())


def tokens(text: str) -> list[str]:
    """Normalized word sequence of ``text``; empty list for empty content."""
    normalized = normalize_text(text)
    return normalized.split() if normalized else []
