"""CLI surfaces: build-index, eval subcommands, exit codes."""

import json

import pytest

from voicegate import data
from voicegate.cli import main
from voicegate.embedding import load_index


@pytest.fixture(scope="module")
def index_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "index.vgx"
    code = main(
        [
            "build-index",
            "--corpus",
            str(data.corpus_path()),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    return out


def test_build_index_output_loads(index_file):
    index = load_index(index_file)
    assert len(index) == data.pinned()["corpus_records"]


def test_build_index_missing_corpus(tmp_path, capsys):
    code = main(["build-index", "--corpus", str(tmp_path / "nope.ndjson"), "--out", str(tmp_path / "i")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_eval_stt_cli(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(
        [
            "eval",
            "stt",
            "--fixtures",
            str(data.fixtures_manifest_path()),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "s_stt = 0.9667" in printed
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["s_stt"] == {"successes": 29, "total": 30}


def test_eval_ttc_cli(index_file, tmp_path, capsys):
    code = main(
        [
            "eval",
            "ttc",
            "--corpus",
            str(data.corpus_path()),
            "--index",
            str(index_file),
        ]
    )
    assert code == 0
    assert "s_ttc (training-mode) = 1.0000" in capsys.readouterr().out


def test_eval_ttc_held_out_cli(index_file, capsys):
    code = main(
        [
            "eval",
            "ttc",
            "--corpus",
            str(data.corpus_path()),
            "--index",
            str(index_file),
            "--held-out",
        ]
    )
    assert code == 0
    assert "leave-one-out" in capsys.readouterr().out


def test_eval_e2e_cli_markdown(index_file, tmp_path, capsys):
    out = tmp_path / "report.md"
    code = main(
        [
            "eval",
            "e2e",
            "--fixtures",
            str(data.fixtures_manifest_path()),
            "--index",
            str(index_file),
            "--out",
            str(out),
            "--format",
            "markdown",
        ]
    )
    assert code == 0
    markdown = out.read_text(encoding="utf-8")
    assert "| s_stt | 0.9667 |" in markdown
    assert "en-IN" in markdown


def test_eval_e2e_needs_index_or_corpus(capsys):
    code = main(["eval", "e2e", "--fixtures", str(data.fixtures_manifest_path())])
    assert code == 2
    assert "needs --index or --corpus" in capsys.readouterr().err
