"""Shipped desk-scale dataset: grammar config, variant corpus, audio fixtures.

The grammar enumerates exactly 66 commands; corpus and fixture counts plus
values pinned from one-off calibration runs live in pinned.json (regenerated
by scripts/generate_data.py).
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path


def _data_path(name: str) -> Path:
    return Path(str(resources.files(__package__).joinpath(name)))


def grammar_path() -> Path:
    return _data_path("grammar.json")


def corpus_path() -> Path:
    return _data_path("corpus.ndjson")


def fixtures_manifest_path() -> Path:
    return _data_path("fixtures.ndjson")


def pinned() -> dict:
    """Values measured once against the shipped data and asserted thereafter."""
    return json.loads(_data_path("pinned.json").read_text(encoding="utf-8"))
