from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from fpeval.cli import main
from fpeval.dataset import load_dataset
from fpeval.maskinfer import load_mask_model


def run(*argv: str) -> int:
    return main(list(argv))


@pytest.fixture
def corpus_path(tmp_path: Path) -> Path:
    out = tmp_path / "corpus.jsonl"
    assert run(
        "gen", "corpus", "--preset", "firefox-like", "--n", "120", "--seed", "5",
        "--out", str(out),
    ) == 0
    return out


@pytest.fixture
def log_path(tmp_path: Path) -> Path:
    verdicts = tmp_path / "verdicts.json"
    verdicts.write_text(
        json.dumps(
            {
                "timezone": "masked_standardize",
                "language": "masked_vary",
                "platform": "unmasked",
                "canvas fingerprint": "inconclusive_insufficient_diversity",
            }
        ),
        encoding="utf-8",
    )
    out = tmp_path / "obs.jsonl"
    assert run(
        "gen", "log", "--pet", "cloak", "--verdicts", str(verdicts),
        "--platforms", "4", "--epochs", "2", "--seed", "3", "--out", str(out),
    ) == 0
    return out


def test_gen_corpus_writes_loadable_jsonl(corpus_path):
    ds = load_dataset(corpus_path, "jsonl")
    assert len(ds) == 120


def test_ingest_pipeline(tmp_path, corpus_path):
    out = tmp_path / "clean.jsonl"
    assert run(
        "ingest", "--input", str(corpus_path), "--format", "jsonl",
        "--out", str(out), "--browser", "firefox",
    ) == 0
    clean = load_dataset(out, "jsonl")
    assert 0 < len(clean) <= 120
    assert all(r.browser_family == "firefox" for r in clean)


def test_infer_matches_requested_verdicts(tmp_path, log_path):
    model_path = tmp_path / "model.json"
    assert run(
        "infer", "--log", str(log_path), "--pet", "cloak", "--out", str(model_path)
    ) == 0
    model = load_mask_model(model_path)
    statuses = {a: v.status for a, v in model.verdicts.items()}
    assert statuses == {
        "timezone": "masked_standardize",
        "language": "masked_vary",
        "platform": "unmasked",
        "canvas fingerprint": "inconclusive_insufficient_diversity",
    }


def test_rank_outputs_json(tmp_path, log_path):
    model_path = tmp_path / "model.json"
    run("infer", "--log", str(log_path), "--pet", "cloak", "--out", str(model_path))
    out = tmp_path / "ranking.json"
    assert run("rank", "--model", str(model_path), "--model", str(model_path), "--out", str(out)) == 0
    ranking = json.loads(out.read_text(encoding="utf-8"))
    assert ranking["masked_counts"] == {"cloak": 2}


def test_evaluate_table(tmp_path, corpus_path):
    table = tmp_path / "table.csv"
    report = tmp_path / "report.json"
    assert run(
        "evaluate", "--data", str(corpus_path), "--model", "builtin:tor-firefox",
        "--out", str(table), "--json", str(report), "--browser", "firefox",
    ) == 0
    rows = list(csv.DictReader(table.open()))
    assert len(rows) == 1
    assert float(rows[0]["entropy_bits"]) <= 8  # resolution-only signal remains
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert payload[0]["before"]["n"] == 120


def test_popeval_skips_unknown_and_oversized(tmp_path, corpus_path, log_path, capsys):
    model_path = tmp_path / "model.json"
    run("infer", "--log", str(log_path), "--pet", "cloak", "--out", str(model_path))
    pop = tmp_path / "pop.csv"
    pop.write_text("pet,users\ncloak,40\nother,NA\n", encoding="utf-8")
    out = tmp_path / "popeval.csv"
    assert run(
        "popeval", "--data", str(corpus_path), "--model", str(model_path),
        "--popularity", str(pop), "--samples", "10", "--seed", "2", "--out", str(out),
    ) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1
    assert rows[0]["pet"] == "cloak"
    assert rows[0]["users"] == "40"


def test_sweep_with_exclusion_and_pareto(tmp_path, corpus_path):
    out = tmp_path / "sweep.csv"
    pareto_out = tmp_path / "pareto.csv"
    assert run(
        "sweep", "--data", str(corpus_path), "--model", "builtin:tor-firefox",
        "--caps", "1000x1000", "--quanta", "195x95..200x100", "--exclude", "200x100",
        "--pareto-reference", "1000x1000:200x100", "--pareto-out", str(pareto_out),
        "--out", str(out),
    ) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6 * 6 - 1
    assert {tuple(r[k] for k in ("quant_w", "quant_h")) for r in rows} >= {("195", "95")}
    assert pareto_out.exists()


def test_usage_error_exit_code_1():
    assert run("sweep", "--data") in (1,)


def test_unknown_command_exit_code_1():
    assert run("frobnicate") == 1


def test_missing_file_exit_code_2(tmp_path):
    out = tmp_path / "x.json"
    assert run("infer", "--log", str(tmp_path / "nope.jsonl"), "--pet", "t", "--out", str(out)) == 2
    assert not out.exists()


def test_bad_data_exit_code_2(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json}\n", encoding="utf-8")
    out = tmp_path / "clean.jsonl"
    assert run("ingest", "--input", str(bad), "--format", "jsonl", "--out", str(out)) == 2
    assert not out.exists()


def test_gen_corpus_spec_file(tmp_path):
    spec = {
        "n": 10,
        "seed": 2,
        "browser_mix": {"chrome": 1.0},
        "attributes": {"tz": {"values": [-480, 60], "weights": [0.5, 0.5]}},
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec), encoding="utf-8")
    out = tmp_path / "c.jsonl"
    assert run("gen", "corpus", "--spec", str(spec_path), "--out", str(out)) == 0
    ds = load_dataset(out, "jsonl")
    assert len(ds) == 10
    assert all(r.browser_family == "chrome" for r in ds)


def test_ingest_csv_output_round_trips(tmp_path, corpus_path):
    out = tmp_path / "clean.csv"
    assert run(
        "ingest", "--input", str(corpus_path), "--format", "jsonl",
        "--out", str(out), "--out-format", "csv",
    ) == 0
    reloaded = load_dataset(out, "csv")
    assert len(reloaded) > 0


def test_cli_sweep_exact_19999_rows(tmp_path):
    corpus = tmp_path / "small.jsonl"
    assert run(
        "gen", "corpus", "--preset", "firefox-like", "--n", "50", "--seed", "1",
        "--out", str(corpus),
    ) == 0
    out = tmp_path / "sweep.csv"
    assert run(
        "sweep", "--data", str(corpus), "--model", "builtin:tor-firefox",
        "--caps", "1000x1000", "--quanta", "1x1..200x100", "--exclude", "200x100",
        "--out", str(out),
    ) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 19_999
