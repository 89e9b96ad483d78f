"""Dataset model, file ingestion, deduplication, and sanitization.

Two on-disk formats are supported:

* csv: first row is the header. The reserved columns ``cookie_id`` and
  ``js_enabled`` are metadata; every other column is an attribute. An empty
  cell means MISSING. Cells consisting only of an optional minus sign and
  digits (without leading zeros) are integers; everything else is text.
* jsonl: one JSON object per line. The reserved key ``_meta`` holds the
  metadata object; all other keys are attributes. ``null`` means MISSING,
  strings are text, integers are integers, and ``{"masked": true}`` is the
  reserved masked sentinel.

Loading and saving round-trip for both formats, with the caveat that csv
cannot represent the empty string, integer-looking text, or the masked
sentinel; saving such a value as csv raises FormatError instead of silently
changing it.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Literal

from fpeval.errors import FormatError
from fpeval.fingerprint import (
    MASKED,
    MISSING,
    AttributeValue,
    Fingerprint,
    int_value,
)
from fpeval.useragent import BrowserFamily, OsFamily, browser_family, os_family

DatasetFormat = Literal["csv", "jsonl"]

USER_AGENT_ATTRIBUTE = "h.User-Agent"
SCREEN_WIDTH_ATTRIBUTE = "screen.Width"
SCREEN_HEIGHT_ATTRIBUTE = "screen.Height"

RESERVED_CSV_COLUMNS = ("cookie_id", "js_enabled")
META_KEY = "_meta"

_CSV_INT_PATTERN = re.compile(r"-?(0|[1-9][0-9]*)\Z")


@dataclass(frozen=True)
class Record:
    """One observed platform visit: a fingerprint plus ingestion metadata."""

    fingerprint: Fingerprint
    cookie_id: str | None = None
    browser_family: BrowserFamily = "other"
    os_family: OsFamily = "other"
    js_enabled: bool = True
    screen_w: int | None = None
    screen_h: int | None = None

    @classmethod
    def from_fingerprint(
        cls,
        fingerprint: Fingerprint,
        *,
        cookie_id: str | None = None,
        js_enabled: bool = True,
    ) -> "Record":
        """Derive the browser/OS families and screen mirrors from the attributes."""
        ua = fingerprint.get(USER_AGENT_ATTRIBUTE)
        browser: BrowserFamily = "other"
        os: OsFamily = "other"
        if isinstance(ua, str):
            browser = browser_family(ua)
            os = os_family(ua)
        return cls(
            fingerprint=fingerprint,
            cookie_id=cookie_id,
            browser_family=browser,
            os_family=os,
            js_enabled=js_enabled,
            screen_w=_positive_int(fingerprint.get(SCREEN_WIDTH_ATTRIBUTE)),
            screen_h=_positive_int(fingerprint.get(SCREEN_HEIGHT_ATTRIBUTE)),
        )

    def with_fingerprint(self, fingerprint: Fingerprint) -> "Record":
        """Same metadata, new fingerprint; screen mirrors are recomputed."""
        return replace(
            self,
            fingerprint=fingerprint,
            screen_w=_positive_int(fingerprint.get(SCREEN_WIDTH_ATTRIBUTE)),
            screen_h=_positive_int(fingerprint.get(SCREEN_HEIGHT_ATTRIBUTE)),
        )


def _positive_int(value: AttributeValue) -> int | None:
    parsed = int_value(value)
    return parsed if parsed is not None and parsed > 0 else None


@dataclass(frozen=True)
class Dataset:
    """Ordered, immutable collection of records."""

    records: tuple[Record, ...]
    provenance: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    def fingerprints(self) -> list[Fingerprint]:
        return [r.fingerprint for r in self.records]

    def attribute_names(self) -> set[str]:
        names: set[str] = set()
        for record in self.records:
            names.update(record.fingerprint.names())
        return names


@dataclass(frozen=True)
class SanitizeReport:
    """Per-rule drop counts from one sanitize pass."""

    dropped: dict[str, int]
    kept: int

    def total_dropped(self) -> int:
        return sum(self.dropped.values())


# ---------------------------------------------------------------------------
# loading / saving


def load_dataset(path: str | Path, format: DatasetFormat) -> Dataset:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not valid UTF-8 at byte offset {exc.start}") from None
    if format == "csv":
        records = _parse_csv(text)
    elif format == "jsonl":
        records = _parse_jsonl(text)
    else:
        raise FormatError(f"unknown dataset format: {format!r}")
    return Dataset(records=tuple(records), provenance=str(path))


def render_dataset(dataset: Dataset, format: DatasetFormat) -> str:
    if format == "csv":
        return _render_csv(dataset)
    if format == "jsonl":
        return _render_jsonl(dataset)
    raise FormatError(f"unknown dataset format: {format!r}")


def save_dataset(dataset: Dataset, path: str | Path, format: DatasetFormat) -> None:
    Path(path).write_text(render_dataset(dataset, format), encoding="utf-8")


def _parse_csv(text: str) -> list[Record]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    seen: set[str] = set()
    for name in header:
        if name in seen:
            raise FormatError(f"duplicate attribute column name: {name!r}")
        seen.add(name)
    records = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) > len(header):
            raise FormatError(
                f"row {line_no} has {len(row)} cells but the header has {len(header)}"
            )
        cookie_id = None
        js_enabled = True
        attrs: list[tuple[str, AttributeValue]] = []
        for name, cell in zip(header, row):
            if name == "cookie_id":
                cookie_id = cell or None
            elif name == "js_enabled":
                js_enabled = _parse_bool_cell(cell, line_no)
            else:
                attrs.append((name, _decode_csv_cell(cell)))
        records.append(
            Record.from_fingerprint(
                Fingerprint(attrs), cookie_id=cookie_id, js_enabled=js_enabled
            )
        )
    return records


def _parse_bool_cell(cell: str, line_no: int) -> bool:
    lowered = cell.strip().lower()
    if lowered in ("", "true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise FormatError(f"row {line_no}: cannot parse js_enabled cell {cell!r}")


def _decode_csv_cell(cell: str) -> AttributeValue:
    if cell == "":
        return MISSING
    if _CSV_INT_PATTERN.match(cell) and cell != "-0":
        return int(cell)
    return cell


def _encode_csv_cell(value: AttributeValue) -> str:
    if value is MISSING:
        return ""
    if value is MASKED:
        raise FormatError("the masked sentinel is not representable in csv; use jsonl")
    if isinstance(value, int):
        return str(value)
    if value == "" or (_CSV_INT_PATTERN.match(value) and value != "-0"):
        raise FormatError(f"text value {value!r} is not representable in csv; use jsonl")
    return value


def _render_csv(dataset: Dataset) -> str:
    attr_names = sorted(dataset.attribute_names())
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(RESERVED_CSV_COLUMNS) + attr_names)
    for record in dataset:
        row = [
            record.cookie_id or "",
            "true" if record.js_enabled else "false",
        ]
        row.extend(_encode_csv_cell(record.fingerprint.get(n)) for n in attr_names)
        writer.writerow(row)
    return out.getvalue()


def _reject_duplicate_keys(pairs: list[tuple[str, object]]) -> dict[str, object]:
    obj: dict[str, object] = {}
    for key, value in pairs:
        if key in obj:
            raise FormatError(f"duplicate attribute name: {key!r}")
        obj[key] = value
    return obj


def _decode_json_value(value: object) -> AttributeValue:
    if isinstance(value, dict):
        if value == {"masked": True}:
            return MASKED
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    from fpeval.fingerprint import coerce_value

    return coerce_value(value)


def _encode_json_value(value: AttributeValue) -> object:
    if value is MASKED:
        return {"masked": True}
    return value


def _parse_jsonl(text: str) -> list[Record]:
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line, object_pairs_hook=_reject_duplicate_keys)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {line_no}: invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise FormatError(f"line {line_no}: expected a JSON object")
        meta = obj.pop(META_KEY, {})
        if not isinstance(meta, dict):
            raise FormatError(f"line {line_no}: {META_KEY} must be an object")
        cookie_id = meta.get("cookie_id")
        if cookie_id is not None and not isinstance(cookie_id, str):
            raise FormatError(f"line {line_no}: cookie_id must be a string or null")
        js_enabled = meta.get("js_enabled", True)
        if not isinstance(js_enabled, bool):
            raise FormatError(f"line {line_no}: js_enabled must be a boolean")
        attrs = [(name, _decode_json_value(v)) for name, v in obj.items()]
        records.append(
            Record.from_fingerprint(
                Fingerprint(attrs), cookie_id=cookie_id, js_enabled=js_enabled
            )
        )
    return records


def _render_jsonl(dataset: Dataset) -> str:
    lines = []
    for record in dataset:
        obj: dict[str, object] = {
            META_KEY: {"cookie_id": record.cookie_id, "js_enabled": record.js_enabled}
        }
        for name, value in record.fingerprint.items():
            obj[name] = _encode_json_value(value)
        lines.append(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# pipeline operations


def dedupe_by_cookie(dataset: Dataset) -> Dataset:
    """Keep the first record per cookie id; drop records without a cookie."""
    seen: set[str] = set()
    kept = []
    for record in dataset:
        if record.cookie_id is None:
            continue
        if record.cookie_id in seen:
            continue
        seen.add(record.cookie_id)
        kept.append(record)
    return Dataset(records=tuple(kept), provenance=dataset.provenance)


def sanitize(dataset: Dataset) -> tuple[Dataset, SanitizeReport]:
    """Drop records showing obvious tool interference or non-desktop origin.

    Rules fire in order and a record is counted under the first that hits:
    ``js-disabled``, ``illegitimate-resolution`` (a screen dimension present
    but non-numeric or <= 0), ``non-desktop-os``.
    """
    dropped = {"js-disabled": 0, "illegitimate-resolution": 0, "non-desktop-os": 0}
    kept = []
    for record in dataset:
        if not record.js_enabled:
            dropped["js-disabled"] += 1
        elif _has_illegitimate_resolution(record):
            dropped["illegitimate-resolution"] += 1
        elif record.os_family == "other":
            dropped["non-desktop-os"] += 1
        else:
            kept.append(record)
    clean = Dataset(records=tuple(kept), provenance=dataset.provenance)
    return clean, SanitizeReport(dropped=dropped, kept=len(kept))


def _has_illegitimate_resolution(record: Record) -> bool:
    for attr in (SCREEN_WIDTH_ATTRIBUTE, SCREEN_HEIGHT_ATTRIBUTE):
        value = record.fingerprint.get(attr)
        if value is MISSING:
            continue
        parsed = int_value(value)
        if parsed is None or parsed <= 0:
            return True
    return False


def split_by_browser(dataset: Dataset) -> tuple[Dataset, Dataset]:
    """Partition into (chrome, firefox); records classified "other" join neither."""
    chrome = tuple(r for r in dataset if r.browser_family == "chrome")
    firefox = tuple(r for r in dataset if r.browser_family == "firefox")
    return (
        Dataset(records=chrome, provenance=f"{dataset.provenance}[chrome]"),
        Dataset(records=firefox, provenance=f"{dataset.provenance}[firefox]"),
    )


def project_fingerprints(records: Iterable[Record]) -> list[Fingerprint]:
    return [r.fingerprint for r in records]
