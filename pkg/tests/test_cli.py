import json
from pathlib import Path

import pytest

from newslens.cli import main


def run(tmp_path, *argv):
    return main(["--store", str(tmp_path / "store"), *argv])


def tree_digest(root: Path):
    out = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            out[str(path.relative_to(root))] = path.read_bytes()
    return out


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["no-such-command"])
    assert e.value.code == 2


def test_fixture_generate_is_deterministic(tmp_path):
    for run_dir in ("a", "b"):
        assert run(tmp_path, "fixture", "generate", "--articles", "40",
                   "--seed", "5", "--dir", str(tmp_path / run_dir)) == 0
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_full_cycle_exit_codes_and_rerun(tmp_path, capsys):
    fixtures = tmp_path / "fx"
    assert run(tmp_path, "fixture", "generate", "--articles", "40", "--seed", "3",
               "--days", "1", "--dir", str(fixtures)) == 0
    layout = json.loads(capsys.readouterr().out)
    intervals = sorted({i for pub in layout["layout"].values() for i in pub})

    for interval in intervals:
        assert run(tmp_path, "ingest", "--interval", interval,
                   "--fixtures", str(fixtures)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["totals"]["failure"] == 0

    # rerun: everything is a duplicate, still exit 0
    assert run(tmp_path, "ingest", "--interval", intervals[0],
               "--fixtures", str(fixtures)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["totals"]["new"] == 0

    lexicon_file = tmp_path / "lexicon.json"
    # regenerate the corpus lexicon for the mock provider
    from newslens import synth
    from newslens.store import Store

    taxonomy = Store(tmp_path / "store").open_snapshot().taxonomy()
    corpus = synth.generate_corpus(40, 3, taxonomy, start_date="2024-08-19", days=1)
    lexicon_file.write_text(json.dumps(corpus.lexicon))
    assert run(tmp_path, "annotate", "--provider", "mock",
               "--lexicon", str(lexicon_file)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["failed"] == 0 and report["annotated"] == 40

    assert run(tmp_path, "events", "recompute", "--date", "2024-08-19") == 0
    capsys.readouterr()
    assert run(tmp_path, "export", "--granularity", "aggregate",
               "--node", "politics") == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "publisher,key,key_name,count,proportion"


def test_ingest_missing_fixture_dir_exits_1(tmp_path):
    assert run(tmp_path, "ingest", "--interval", "x",
               "--fixtures", str(tmp_path / "missing")) == 1


def test_export_without_store_exits_1(tmp_path, capsys):
    assert run(tmp_path, "export") == 1


def test_review_apply_unknown_task_exits_1(tmp_path):
    run(tmp_path, "taxonomy", "show")  # bootstrap nothing; store may not exist
    assert run(tmp_path, "review", "apply", "--task", "rt-nope", "--approve") == 1


def test_taxonomy_propose_and_apply(tmp_path, capsys):
    fixtures = tmp_path / "fx"
    run(tmp_path, "fixture", "generate", "--articles", "20", "--days", "1",
        "--dir", str(fixtures))
    capsys.readouterr()
    proposal = tmp_path / "p.json"
    proposal.write_text(json.dumps({
        "id": "tp-1", "kind": "add_subtopic",
        "payload": {"id": "pol-election-debates", "name": "Debates",
                    "parent_id": "pol-election"}}))
    assert run(tmp_path, "taxonomy", "propose", "--file", str(proposal)) == 0
    capsys.readouterr()
    assert run(tmp_path, "taxonomy", "apply", "--id", "tp-1") == 0
    applied = json.loads(capsys.readouterr().out)
    assert applied["new_version"] == 2
    assert run(tmp_path, "taxonomy", "show", "--version", "2") == 0
    assert "pol-election-debates" in capsys.readouterr().out
    assert run(tmp_path, "taxonomy", "show", "--version", "9") == 1
    assert run(tmp_path, "taxonomy", "apply", "--id", "missing") == 1


def test_out_flag_writes_file(tmp_path):
    out = tmp_path / "result.json"
    assert run(tmp_path, "--out", str(out), "fixture", "generate",
               "--articles", "20", "--days", "1", "--dir", str(tmp_path / "fx")) == 0
    payload = json.loads(out.read_text())
    assert payload["articles"] == 20
