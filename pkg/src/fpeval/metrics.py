"""Anonymity-set distribution and trackability metrics.

An anonymity set groups platforms whose fingerprints are identical; the
distribution of set sizes supports three uniqueness metrics:

* entropy (bits): H = -sum_k p_k * log2(p_k) with p_k the plug-in frequency
  of the k-th distinct fingerprint,
* pct_le_1 / pct_le_10: the fraction of platforms hiding in sets of size at
  most 1 / at most 10.

Effectiveness of a masking tool under a metric F is F(without) - F(with);
positive values mean the tool reduced trackability.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Literal, Mapping

from fpeval.errors import DataError
from fpeval.fingerprint import Fingerprint

Metric = Literal["entropy", "pct_le_1", "pct_le_10"]
METRICS: tuple[Metric, ...] = ("entropy", "pct_le_1", "pct_le_10")


@dataclass(frozen=True)
class AnonymitySetDistribution:
    """Map of canonical fingerprint to its multiplicity."""

    sets: Mapping[str, int]
    total: int

    def __post_init__(self) -> None:
        if any(c < 1 for c in self.sets.values()):
            raise DataError("anonymity-set counts must be >= 1")
        if sum(self.sets.values()) != self.total:
            raise DataError("anonymity-set counts must sum to the total")

    def counts(self) -> list[int]:
        return list(self.sets.values())


@dataclass(frozen=True)
class TrackabilityReport:
    """Uniqueness metrics of one fingerprint multiset."""

    n: int
    entropy_bits: float
    pct_le_1: float
    pct_le_10: float

    def value(self, metric: Metric) -> float:
        return {
            "entropy": self.entropy_bits,
            "pct_le_1": self.pct_le_1,
            "pct_le_10": self.pct_le_10,
        }[metric]

    def to_json_obj(self) -> dict[str, object]:
        return {
            "n": self.n,
            "entropy_bits": self.entropy_bits,
            "pct_le_1": self.pct_le_1,
            "pct_le_10": self.pct_le_10,
        }


def anonymity_sets(fingerprints: Iterable[Fingerprint]) -> AnonymitySetDistribution:
    counter = Counter(fp.canonical() for fp in fingerprints)
    return AnonymitySetDistribution(sets=dict(counter), total=sum(counter.values()))


def entropy_from_counts(counts: Iterable[int], total: int) -> float:
    if total < 1:
        raise DataError("entropy is undefined for an empty distribution")
    # math.fsum is correctly rounded, so the result does not depend on the
    # iteration order of the counts.
    value = -math.fsum((c / total) * math.log2(c / total) for c in counts)
    return value + 0.0  # normalize -0.0


def entropy(dist: AnonymitySetDistribution) -> float:
    return entropy_from_counts(dist.counts(), dist.total)


def pct_le(dist: AnonymitySetDistribution, k: int) -> float:
    if dist.total < 1:
        raise DataError("pct_le is undefined for an empty distribution")
    if k < 1:
        raise DataError("k must be a positive integer")
    return sum(c for c in dist.counts() if c <= k) / dist.total


def metric_values_from_counts(counts: Iterable[int], total: int) -> tuple[float, float, float]:
    """(entropy, pct_le_1, pct_le_10) from raw set sizes, shared by all callers."""
    counts = list(counts)
    if total < 1:
        raise DataError("metrics are undefined for an empty distribution")
    h = entropy_from_counts(counts, total)
    le1 = sum(c for c in counts if c <= 1) / total
    le10 = sum(c for c in counts if c <= 10) / total
    return h, le1, le10


def trackability(fingerprints: Iterable[Fingerprint]) -> TrackabilityReport:
    dist = anonymity_sets(fingerprints)
    h, le1, le10 = metric_values_from_counts(dist.counts(), dist.total)
    return TrackabilityReport(n=dist.total, entropy_bits=h, pct_le_1=le1, pct_le_10=le10)


def effectiveness(
    metric: Metric,
    without_tool: Iterable[Fingerprint],
    with_tool: Iterable[Fingerprint],
) -> float:
    """Metric on the unprotected fingerprints minus metric on the protected ones."""
    without_list = list(without_tool)
    with_list = list(with_tool)
    if not without_list or not with_list:
        raise DataError("effectiveness requires two non-empty fingerprint sets")
    return trackability(without_list).value(metric) - trackability(with_list).value(metric)
