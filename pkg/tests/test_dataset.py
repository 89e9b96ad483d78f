from __future__ import annotations

from pathlib import Path

import pytest

from fpeval.dataset import (
    Dataset,
    dedupe_by_cookie,
    load_dataset,
    sanitize,
    save_dataset,
    split_by_browser,
)
from fpeval.errors import FormatError
from fpeval.fingerprint import MISSING

from conftest import make_dataset, make_record


def test_csv_basic_parse(tmp_path: Path):
    path = tmp_path / "d.csv"
    path.write_text("cookie_id,timezone\nc1,-480\nc2,-480\nc3,60\n", encoding="utf-8")
    ds = load_dataset(path, "csv")
    assert len(ds) == 3
    assert [r.cookie_id for r in ds] == ["c1", "c2", "c3"]
    assert all(len(r.fingerprint) == 1 for r in ds)
    assert ds.records[0].fingerprint.get("timezone") == -480


def test_csv_header_only(tmp_path: Path):
    path = tmp_path / "d.csv"
    path.write_text("cookie_id,timezone\n", encoding="utf-8")
    assert len(load_dataset(path, "csv")) == 0


def test_csv_empty_cell_is_missing(tmp_path: Path):
    path = tmp_path / "d.csv"
    path.write_text("cookie_id,a,b\nc1,,x\n", encoding="utf-8")
    record = load_dataset(path, "csv").records[0]
    assert record.fingerprint.get("a") is MISSING
    assert record.fingerprint.get("b") == "x"


def test_csv_short_row_pads_missing(tmp_path: Path):
    path = tmp_path / "d.csv"
    path.write_text("cookie_id,a,b\nc1,x\n", encoding="utf-8")
    record = load_dataset(path, "csv").records[0]
    assert record.fingerprint.get("a") == "x"
    assert record.fingerprint.get("b") is MISSING


def test_csv_duplicate_column_rejected(tmp_path: Path):
    path = tmp_path / "d.csv"
    path.write_text("cookie_id,a,a\nc1,1,2\n", encoding="utf-8")
    with pytest.raises(FormatError, match="'a'"):
        load_dataset(path, "csv")


def test_csv_overlong_row_rejected(tmp_path: Path):
    path = tmp_path / "d.csv"
    path.write_text("cookie_id,a\nc1,1,2\n", encoding="utf-8")
    with pytest.raises(FormatError, match="row 2"):
        load_dataset(path, "csv")


def test_non_utf8_reports_byte_offset(tmp_path: Path):
    path = tmp_path / "d.csv"
    path.write_bytes(b"cookie_id,a\nc1,\xff\n")
    with pytest.raises(FormatError, match="byte offset 15"):
        load_dataset(path, "csv")


def test_jsonl_parse_and_meta(tmp_path: Path):
    path = tmp_path / "d.jsonl"
    path.write_text(
        '{"_meta":{"cookie_id":"c1","js_enabled":false},"a":1,"b":"x","c":null}\n',
        encoding="utf-8",
    )
    record = load_dataset(path, "jsonl").records[0]
    assert record.cookie_id == "c1"
    assert not record.js_enabled
    assert record.fingerprint.get("a") == 1
    assert record.fingerprint.get("c") is MISSING


def test_jsonl_duplicate_key_rejected(tmp_path: Path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"a":1,"a":2}\n', encoding="utf-8")
    with pytest.raises(FormatError, match="'a'"):
        load_dataset(path, "jsonl")


def test_jsonl_round_trip(tmp_path: Path):
    rows = [
        {"a": 1, "b": "x"},
        {"a": 2, "b": ""},
        {"a": -5},
    ]
    ds = make_dataset(rows, cookies=["c1", None, "c2"])
    path = tmp_path / "d.jsonl"
    save_dataset(ds, path, "jsonl")
    assert load_dataset(path, "jsonl") == ds


def test_csv_round_trip(tmp_path: Path):
    rows = [{"a": 1, "b": "xyz"}, {"a": 2}, {"b": "w w"}]
    ds = make_dataset(rows)
    path = tmp_path / "d.csv"
    save_dataset(ds, path, "csv")
    assert load_dataset(path, "csv") == ds


def test_csv_save_rejects_unrepresentable_text():
    with pytest.raises(FormatError, match="not representable"):
        save_dataset(make_dataset([{"a": "42"}]), "/dev/null", "csv")
    with pytest.raises(FormatError, match="not representable"):
        save_dataset(make_dataset([{"a": ""}]), "/dev/null", "csv")


def test_dedupe_keeps_first_per_cookie():
    rows = [{"v": 1}, {"v": 2}, {"v": 3}, {"v": 4}]
    ds = make_dataset(rows, cookies=["c1", "c1", "c2", None])
    out = dedupe_by_cookie(ds)
    assert [r.cookie_id for r in out] == ["c1", "c2"]
    assert out.records[0].fingerprint.get("v") == 1


def test_dedupe_all_distinct_is_identity_minus_cookieless():
    rows = [{"v": i} for i in range(4)]
    ds = make_dataset(rows, cookies=["a", "b", None, "c"])
    out = dedupe_by_cookie(ds)
    assert len(out) == 3
    assert [r.fingerprint.get("v") for r in out] == [0, 1, 3]


def test_dedupe_output_has_distinct_cookies():
    ds = make_dataset([{"v": i} for i in range(10)], cookies=["c"] * 5 + ["d"] * 5)
    out = dedupe_by_cookie(ds)
    cookies = [r.cookie_id for r in out]
    assert len(cookies) == len(set(cookies))


def test_sanitize_rules_and_counts(ua_firefox_linux):
    records = [
        make_record({"h.User-Agent": ua_firefox_linux, "x": 1}, js_enabled=False),
        make_record({"h.User-Agent": ua_firefox_linux, "screen.Width": "0", "screen.Height": 900}),
        make_record({"h.User-Agent": ua_firefox_linux, "screen.Width": "abc"}),
        make_record({"h.User-Agent": "curl/7"}),
        make_record({"h.User-Agent": ua_firefox_linux, "screen.Width": 1920, "screen.Height": 1080}),
    ]
    ds = Dataset(records=tuple(records), provenance="t")
    clean, report = sanitize(ds)
    assert report.dropped == {
        "js-disabled": 1,
        "illegitimate-resolution": 2,
        "non-desktop-os": 1,
    }
    assert report.kept == len(clean) == 1


def test_sanitize_missing_resolution_is_kept(ua_firefox_linux):
    ds = Dataset(
        records=(make_record({"h.User-Agent": ua_firefox_linux}),), provenance="t"
    )
    clean, report = sanitize(ds)
    assert len(clean) == 1
    assert report.total_dropped() == 0


def test_sanitize_idempotent(ua_firefox_linux, ua_chrome_windows):
    records = [
        make_record({"h.User-Agent": ua_firefox_linux, "screen.Width": 10}),
        make_record({"h.User-Agent": ua_chrome_windows, "screen.Width": "0"}),
        make_record({"h.User-Agent": ua_chrome_windows}, js_enabled=False),
    ]
    ds = Dataset(records=tuple(records), provenance="t")
    once, _ = sanitize(ds)
    twice, second_report = sanitize(once)
    assert twice == once
    assert second_report.total_dropped() == 0


def test_split_by_browser(ua_firefox_linux, ua_chrome_windows):
    records = [
        make_record({"h.User-Agent": ua_firefox_linux}),
        make_record({"h.User-Agent": ua_chrome_windows}),
        make_record({"h.User-Agent": "Mozilla/5.0 Chrome/63.0 Safari Edge/16"}),
    ]
    ds = Dataset(records=tuple(records), provenance="t")
    chrome, firefox = split_by_browser(ds)
    assert len(chrome) == 1 and len(firefox) == 1
    assert len(chrome) + len(firefox) <= len(ds)


def test_record_mirrors_screen_attributes(ua_firefox_linux):
    record = make_record(
        {"h.User-Agent": ua_firefox_linux, "screen.Width": "1440", "screen.Height": 900}
    )
    assert record.screen_w == 1440
    assert record.screen_h == 900
    assert make_record({"screen.Width": "abc"}).screen_w is None
    assert make_record({"screen.Width": 0}).screen_w is None
