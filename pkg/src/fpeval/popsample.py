"""Popularity-adjusted evaluation by repeated seeded subsampling.

A tool with N users is simulated by drawing N records without replacement
from the masked dataset, computing the trackability metrics on the draw, and
repeating; the estimate is the per-metric mean and standard error of the
mean (sample standard deviation with the n-1 denominator, divided by the
square root of the number of draws). Sampling with replacement would place
duplicate records in the same anonymity set and flatter any tool, so draws
larger than the dataset are refused rather than approximated.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from fpeval.dataset import Dataset
from fpeval.errors import DataError, FormatError, SampleTooLargeError
from fpeval.hybrid import DEFAULT_POLICY, Policy, apply_mask
from fpeval.maskinfer import MaskModel
from fpeval.metrics import METRICS, Metric, metric_values_from_counts


@dataclass(frozen=True)
class PopularityEntry:
    """One row of the popularity table; users=None means unknown."""

    pet: str
    users: int | None


def load_popularity_table(path: str | Path) -> list[PopularityEntry]:
    """csv with header ``pet,users``; the users cell "NA" (or empty) is unknown."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError(f"{path}: empty popularity table") from None
    if [h.strip().lower() for h in header[:2]] != ["pet", "users"]:
        raise FormatError(f"{path}: popularity table header must be 'pet,users'")
    entries = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < 2:
            raise FormatError(f"{path}: line {line_no}: expected 'pet,users'")
        cell = row[1].strip()
        if cell.upper() in ("", "NA"):
            users: int | None = None
        else:
            try:
                users = int(cell.replace(",", ""))
            except ValueError:
                raise FormatError(
                    f"{path}: line {line_no}: cannot parse user count {cell!r}"
                ) from None
            if users < 1:
                raise FormatError(f"{path}: line {line_no}: user count must be positive")
        entries.append(PopularityEntry(pet=row[0].strip(), users=users))
    return entries


@dataclass(frozen=True)
class SampledEstimate:
    """Per-metric (mean, sem) over the sampled draws."""

    metrics: Mapping[Metric, tuple[float, float]]
    samples: int
    sample_size: int
    seed: int

    def to_json_obj(self) -> dict[str, object]:
        return {
            "metrics": {
                m: {"mean": mean, "sem": sem} for m, (mean, sem) in self.metrics.items()
            },
            "samples": self.samples,
            "sample_size": self.sample_size,
            "seed": self.seed,
        }


def _mean_sem(values: Sequence[float]) -> tuple[float, float]:
    first = values[0]
    if all(v == first for v in values):
        return first, 0.0
    n = len(values)
    mean = math.fsum(values) / n
    variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(variance / n)


def popularity_evaluate(
    dataset: Dataset,
    model: MaskModel,
    users: int,
    samples: int = 100,
    seed: int = 0,
    policy: Policy = DEFAULT_POLICY,
) -> SampledEstimate:
    """Mean and sem of the after-mask metrics over seeded subsamples.

    Each draw takes `users` records without replacement; the i-th draw uses
    the sub-seed (seed, i), so runs are reproducible and iterations are
    independent of each other and of `samples`.
    """
    n = len(dataset)
    if users < 1:
        raise DataError("users must be a positive integer")
    if users > n:
        raise SampleTooLargeError(
            f"cannot draw {users} records without replacement from {n}; "
            "the tool's user base exceeds the dataset and the evaluation is skipped"
        )
    if samples < 2:
        raise DataError("need at least two samples for the standard error")
    if seed < 0:
        raise DataError("seed must be >= 0")

    masked = apply_mask(dataset, model, policy)
    canon_to_code: dict[str, int] = {}
    codes = np.empty(n, dtype=np.int64)
    for i, fp in enumerate(masked.fingerprints()):
        canon = fp.canonical()
        codes[i] = canon_to_code.setdefault(canon, len(canon_to_code))

    per_metric: dict[Metric, list[float]] = {m: [] for m in METRICS}
    for i in range(samples):
        rng = np.random.default_rng((seed, i))
        picked = rng.choice(n, size=users, replace=False)
        counts = np.bincount(codes[picked])
        counts = counts[counts > 0]
        h, le1, le10 = metric_values_from_counts(counts.tolist(), users)
        per_metric["entropy"].append(h)
        per_metric["pct_le_1"].append(le1)
        per_metric["pct_le_10"].append(le10)

    return SampledEstimate(
        metrics={m: _mean_sem(values) for m, values in per_metric.items()},
        samples=samples,
        sample_size=users,
        seed=seed,
    )
