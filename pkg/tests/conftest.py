"""Shared builders for the test suite."""

from __future__ import annotations

import pytest

from fpeval.dataset import Dataset, Record
from fpeval.fingerprint import Fingerprint
from fpeval.maskinfer import Observation, ObservationLog


def make_fp(attrs: dict) -> Fingerprint:
    return Fingerprint(attrs)


def make_record(attrs: dict, cookie_id: str | None = None, js_enabled: bool = True) -> Record:
    return Record.from_fingerprint(
        Fingerprint(attrs), cookie_id=cookie_id, js_enabled=js_enabled
    )


def make_dataset(rows: list[dict], cookies: list[str | None] | None = None) -> Dataset:
    records = []
    for i, attrs in enumerate(rows):
        cookie = cookies[i] if cookies is not None else f"c{i}"
        records.append(make_record(attrs, cookie_id=cookie))
    return Dataset(records=tuple(records), provenance="test")


def build_log(entries: list[tuple[str, str, str, int, dict]]) -> ObservationLog:
    """entries: (platform, subject, boundary, epoch, attrs)."""
    return ObservationLog(
        Observation(
            platform_id=platform,
            subject=subject,
            boundary=boundary,
            epoch=epoch,
            fingerprint=Fingerprint(attrs),
        )
        for platform, subject, boundary, epoch, attrs in entries
    )


def constant_pair_log(
    baseline_values: dict[str, dict[str, str]],
    pet_values: dict[str, dict[str, dict[str, str]]],
    epochs: int = 2,
    boundaries: tuple[str, ...] = ("reload", "domain"),
) -> ObservationLog:
    """Log with constant per-platform values.

    baseline_values: platform -> attrs; pet_values: pet -> platform -> attrs.
    """
    entries = []
    for platform, attrs in baseline_values.items():
        for boundary in boundaries:
            for epoch in range(epochs):
                entries.append((platform, "baseline", boundary, epoch, attrs))
    for pet, platforms in pet_values.items():
        for platform, attrs in platforms.items():
            for boundary in boundaries:
                for epoch in range(epochs):
                    entries.append((platform, f"pet:{pet}", boundary, epoch, attrs))
    return build_log(entries)


@pytest.fixture
def ua_firefox_linux() -> str:
    return "Mozilla/5.0 (X11; Linux x86_64; rv:56.0) Gecko/20100101 Firefox/56.0"


@pytest.fixture
def ua_chrome_windows() -> str:
    return (
        "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
        "(KHTML, like Gecko) Chrome/63.0.3239.84 Safari/537.36"
    )
