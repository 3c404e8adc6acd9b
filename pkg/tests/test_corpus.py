"""Corpus ingestion, template generation, and summary statistics."""

import json
import random

import pytest

from voicegate import data
from voicegate.corpus import (
    AudioFixture,
    VariantRecord,
    compute_stats,
    export_corpus,
    generate_template_variants,
    import_corpus,
)
from voicegate.errors import ValidationError
from voicegate.grammar import CommandCatalog, ExecutableCommand


@pytest.fixture(scope="module")
def catalog():
    return CommandCatalog.from_file(data.grammar_path())


def ndjson(*rows):
    return "\n".join(json.dumps(row) for row in rows) + "\n"


def test_import_three_valid_lines(catalog):
    document = ndjson(
        {"text": "select all red cubes", "command": "select(cube, red)"},
        {"text": "pick the red cubes", "command": "select(cube, red)"},
        {"text": "grab the spheres", "command": "grab(sphere)"},
    )
    result = import_corpus(document, catalog)
    assert len(result.records) == 3
    assert not result.errors
    stats = compute_stats(result.records)
    assert sorted(stats.per_command.values()) == [1, 2]


def test_import_unknown_command_skipped(catalog):
    document = ndjson(
        {"text": "select the dragon", "command": "select(dragon)"},
        {"text": "grab the spheres", "command": "grab(sphere)"},
    )
    result = import_corpus(document, catalog)
    assert len(result.records) == 1
    assert len(result.errors) == 1
    assert result.errors[0].line_no == 1
    assert "dragon" in result.errors[0].message


def test_import_malformed_line_skipped(catalog):
    document = '{"text": "grab the spheres", "command": "grab(sphere)"}\nnot json\n'
    result = import_corpus(document, catalog)
    assert len(result.records) == 1
    assert len(result.errors) == 1
    assert result.errors[0].line_no == 2


def test_import_collapses_duplicates(catalog):
    document = ndjson(
        {"text": "Grab the spheres!", "command": "grab(sphere)"},
        {"text": "grab the spheres", "command": "grab(sphere)"},
        {"text": "grab the spheres", "command": "grab(cylinder)"},
    )
    result = import_corpus(document, catalog)
    # Same normalized text for a different command is not a duplicate.
    assert len(result.records) == 2


def test_import_normalizes_command_spelling(catalog):
    document = ndjson({"text": "select red boxes", "command": "select (cube,red)"})
    result = import_corpus(document, catalog)
    assert result.records[0].command_id == "select(cube, red)"


def test_export_round_trip(catalog):
    document = ndjson(
        {"text": "grab the spheres", "command": "grab(sphere)"},
        {"text": "select all red cubes", "command": "select(cube, red)"},
    )
    first = import_corpus(document, catalog)
    second = import_corpus(export_corpus(first.records), catalog)
    assert first.records == second.records


def test_shipped_corpus_matches_documented_total(catalog):
    result = import_corpus(data.corpus_path().read_text(encoding="utf-8"), catalog)
    assert not result.errors
    assert len(result.records) == data.pinned()["corpus_records"]
    stats = compute_stats(result.records)
    # Every catalog command is phrased at least twice in the shipped corpus.
    assert set(stats.per_command) == {c.id for c in catalog}
    assert stats.minimum >= 2


def test_template_substitution():
    command = ExecutableCommand("select", object="cube", attribute="red")
    records = generate_template_variants(
        command, ["please {verb} every {attribute} {object}"]
    )
    assert [r.text for r in records] == ["please select every red cube"]
    assert records[0].source == "template"


def test_template_skipped_when_slot_missing():
    command = ExecutableCommand("arrange", attribute="circle")
    assert generate_template_variants(command, ["{verb} the {object}"]) == []


def test_template_count_matches_applicability_scan():
    templates = [
        "{verb} the {object}",
        "{verb} all the {object}s",
        "please {verb} every {object}",
        "{verb} each {object} now",
        "{verb} the {object} please",
        "{verb} the {attribute} {object}",
    ]
    command = ExecutableCommand("select", object="cube")
    applicable = [
        t
        for t in templates
        if ("{attribute}" not in t or command.attribute)
        and ("{object}" not in t or command.object)
    ]
    records = generate_template_variants(command, templates)
    assert len(records) == len(applicable) == 5


def test_template_unknown_placeholder():
    command = ExecutableCommand("drop")
    with pytest.raises(ValidationError):
        generate_template_variants(command, ["{verb} {speed}"])


def test_stats_min_median_max():
    records = []
    for command_id, n in (("drop", 4), ("grab", 40), ("put", 66)):
        records += [VariantRecord(f"variant {i} {command_id}", command_id) for i in range(n)]
    stats = compute_stats(records)
    assert stats.minimum == 4
    assert stats.median == 40
    assert stats.maximum == 66
    assert stats.total_variants == 110


def test_stats_empty():
    stats = compute_stats([])
    assert stats.total_variants == 0
    assert stats.mean == 0.0
    assert stats.minimum == stats.median == stats.maximum == 0


def test_stats_uniform():
    records = [
        VariantRecord(f"t{i} {c}", c) for c in ("drop", "grab", "put") for i in range(2)
    ]
    stats = compute_stats(records)
    assert stats.mean == 2.0
    assert stats.std_dev == 0.0


def test_stats_median_even_takes_lower_middle():
    records = [VariantRecord(f"t{i} {c}", c) for c, n in (("drop", 1), ("grab", 3)) for i in range(n)]
    stats = compute_stats(records)
    assert stats.median == 1


def test_stats_shuffle_invariant(catalog):
    result = import_corpus(data.corpus_path().read_text(encoding="utf-8"), catalog)
    shuffled = list(result.records)
    random.Random(11).shuffle(shuffled)
    assert compute_stats(shuffled) == compute_stats(result.records)


def test_stats_accents():
    fixture = AudioFixture(
        audio_ref="a.wav",
        content_hash="00",
        accent="en-IN",
        reference_transcript="drop them",
        command_id="drop",
        heard_transcript="drop them",
    )
    stats = compute_stats([], [fixture])
    assert stats.total_fixtures == 1
    assert stats.accents == ("en-IN",)
