"""Screen-resolution spoofing strategies: spoof function, utility loss,
exhaustive cap/quanta sweeps, and strict Pareto comparison.

A strategy rounds each window dimension down to a multiple of its quantum
and caps it; dimensions smaller than one quantum are clamped up to a single
quantum rather than collapsing to zero. The spoofed pair drives the reported
screen.Width/Height and the derived screen.Avail* attributes, so under a
model that masks everything else, users fall into one anonymity set per
reachable spoofed pair.

Utility loss counts screen pixels a spoofed window cannot use: per record
w*h - min(w, w')*min(h, h'), averaged over the dataset, in absolute pixels
and as a fraction of the true pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from fpeval import _kernels
from fpeval.dataset import Dataset
from fpeval.errors import ConfigurationError, DataError, MissingResolutionError
from fpeval.fingerprint import Fingerprint, int_value
from fpeval.hybrid import (
    DEFAULT_POLICY,
    MapFunction,
    Policy,
    apply_mask,
    effective_masked_attributes,
)
from fpeval.maskinfer import MaskModel, Verdict
from fpeval.metrics import trackability

WIDTH_ATTRIBUTE = "screen.Width"
HEIGHT_ATTRIBUTE = "screen.Height"
SPOOFED_ATTRIBUTES = (
    "screen.Width",
    "screen.Height",
    "screen.AvailWidth",
    "screen.AvailHeight",
    "screen.AvailLeft",
    "screen.AvailTop",
)


@dataclass(frozen=True)
class SpoofStrategy:
    """Cap and quantum, per axis, in pixels."""

    cap_w: int
    cap_h: int
    quant_w: int
    quant_h: int

    def __post_init__(self) -> None:
        for name, value in (
            ("cap_w", self.cap_w),
            ("cap_h", self.cap_h),
            ("quant_w", self.quant_w),
            ("quant_h", self.quant_h),
        ):
            if value < 1:
                raise ConfigurationError(f"{name} must be a positive pixel count")
        if self.quant_w > self.cap_w or self.quant_h > self.cap_h:
            raise ConfigurationError("quanta must not exceed the caps")

    def as_candidate(self) -> tuple[int, int, int, int]:
        return (self.cap_w, self.cap_h, self.quant_w, self.quant_h)


TOR_STRATEGY = SpoofStrategy(cap_w=1000, cap_h=1000, quant_w=200, quant_h=100)


def _spoof_axis(cap: int, quant: int, value: int) -> int:
    steps = max(value // quant, 1)
    return min(cap, steps * quant)


def spoof(strategy: SpoofStrategy, w: int, h: int) -> tuple[int, int]:
    """Spoofed (width, height) for a true resolution; deterministic."""
    if w < 1 or h < 1:
        raise DataError("true dimensions must be >= 1")
    return (
        _spoof_axis(strategy.cap_w, strategy.quant_w, w),
        _spoof_axis(strategy.cap_h, strategy.quant_h, h),
    )


def _reachable_axis_values(cap: int, quant: int) -> int:
    values = {min(cap, step * quant) for step in range(1, cap // quant + 2)}
    return len(values)


def strategy_sets(strategy: SpoofStrategy) -> int:
    """Number of distinct spoofed pairs the strategy can emit."""
    return _reachable_axis_values(strategy.cap_w, strategy.quant_w) * _reachable_axis_values(
        strategy.cap_h, strategy.quant_h
    )


@dataclass(frozen=True)
class StrategyScore:
    """Trackability metrics plus utility loss for one strategy."""

    entropy_bits: float
    pct_le_1: float
    pct_le_10: float
    abs_loss: float
    pct_loss: float

    def strictly_improves_on(self, reference: "StrategyScore") -> bool:
        """Lower in every metric and every loss; ties disqualify."""
        return (
            self.entropy_bits < reference.entropy_bits
            and self.pct_le_1 < reference.pct_le_1
            and self.pct_le_10 < reference.pct_le_10
            and self.abs_loss < reference.abs_loss
            and self.pct_loss < reference.pct_loss
        )


def _record_dimensions(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    missing = [
        i for i, r in enumerate(dataset) if r.screen_w is None or r.screen_h is None
    ]
    if missing:
        raise MissingResolutionError(missing)
    ws = np.fromiter((r.screen_w for r in dataset), dtype=np.int64, count=len(dataset))
    hs = np.fromiter((r.screen_h for r in dataset), dtype=np.int64, count=len(dataset))
    return ws, hs


def _fingerprint_dimensions(fp: Fingerprint) -> tuple[int, int]:
    w = int_value(fp.get(WIDTH_ATTRIBUTE))
    h = int_value(fp.get(HEIGHT_ATTRIBUTE))
    if w is None or h is None or w < 1 or h < 1:
        raise DataError("fingerprint lacks a parseable positive screen resolution")
    return w, h


def _strategy_model(baseline_model: MaskModel, strategy: SpoofStrategy) -> MaskModel:
    """Baseline model with the screen attributes masked via the strategy."""
    verdicts = dict(baseline_model.verdicts)
    for attr in SPOOFED_ATTRIBUTES:
        verdicts[attr] = Verdict(
            status="masked_standardize", reason="resolution spoofing strategy"
        )

    def spoofed_width(fp: Fingerprint) -> int:
        w, h = _fingerprint_dimensions(fp)
        return spoof(strategy, w, h)[0]

    def spoofed_height(fp: Fingerprint) -> int:
        w, h = _fingerprint_dimensions(fp)
        return spoof(strategy, w, h)[1]

    transforms = dict(baseline_model.transforms)
    transforms.update(
        {
            "screen.Width": MapFunction(spoofed_width),
            "screen.Height": MapFunction(spoofed_height),
            "screen.AvailWidth": MapFunction(spoofed_width),
            "screen.AvailHeight": MapFunction(spoofed_height),
            "screen.AvailLeft": MapFunction(lambda fp: 0),
            "screen.AvailTop": MapFunction(lambda fp: 0),
        }
    )
    return MaskModel(
        pet=baseline_model.pet,
        params=baseline_model.params,
        verdicts=verdicts,
        transforms=transforms,
        browser=baseline_model.browser,
    )


def score_strategy(
    dataset: Dataset,
    baseline_model: MaskModel,
    strategy: SpoofStrategy,
    policy: Policy = DEFAULT_POLICY,
) -> StrategyScore:
    """Metrics after masking with the model plus the strategy's spoof transforms.

    Every record needs a parseable positive screen resolution; the baseline
    model is expected to mask every attribute the strategy does not spoof,
    as a full-standardization model does.
    """
    if len(dataset) == 0:
        raise DataError("cannot score a strategy on an empty dataset")
    ws, hs = _record_dimensions(dataset)
    masked = apply_mask(dataset, _strategy_model(baseline_model, strategy), policy)
    report = trackability(masked.fingerprints())

    n = len(dataset)
    losses = []
    ratios = []
    for w, h in zip(ws.tolist(), hs.tolist()):
        wp, hp = spoof(strategy, w, h)
        unused = w * h - min(w, wp) * min(h, hp)
        losses.append(unused)
        ratios.append(unused / (w * h))
    return StrategyScore(
        entropy_bits=report.entropy_bits,
        pct_le_1=report.pct_le_1,
        pct_le_10=report.pct_le_10,
        abs_loss=math.fsum(losses) / n,
        pct_loss=math.fsum(ratios) / n,
    )


QuantaRange = tuple[tuple[int, int], tuple[int, int]]  # ((qw_lo, qw_hi), (qh_lo, qh_hi))


def enumerate_strategies(
    caps: Sequence[tuple[int, int]],
    quanta_range: QuantaRange,
    exclude: Iterable[tuple[int, int]] = (),
) -> list[SpoofStrategy]:
    """Candidate list: caps outer, then quant_w, then quant_h (row-major)."""
    (qw_lo, qw_hi), (qh_lo, qh_hi) = quanta_range
    if qw_lo < 1 or qh_lo < 1 or qw_hi < qw_lo or qh_hi < qh_lo:
        raise ConfigurationError("quanta ranges must be non-empty and >= 1")
    excluded = set(exclude)
    out = []
    for cap_w, cap_h in caps:
        for qw in range(qw_lo, qw_hi + 1):
            for qh in range(qh_lo, qh_hi + 1):
                if (qw, qh) in excluded:
                    continue
                out.append(SpoofStrategy(cap_w=cap_w, cap_h=cap_h, quant_w=qw, quant_h=qh))
    return out


def _collapses_to_resolution(dataset: Dataset, model: MaskModel, policy: Policy) -> bool:
    """True when masking leaves only the spoofed attributes distinguishing records."""
    for attr in model.transforms:
        if attr not in SPOOFED_ATTRIBUTES:
            return False
    masked = effective_masked_attributes(model, policy)
    leftovers = dataset.attribute_names() - set(SPOOFED_ATTRIBUTES) - masked
    return not leftovers


def sweep(
    dataset: Dataset,
    baseline_model: MaskModel,
    caps: Sequence[tuple[int, int]],
    quanta_range: QuantaRange,
    exclude: Iterable[tuple[int, int]] = (),
    policy: Policy = DEFAULT_POLICY,
) -> list[tuple[SpoofStrategy, StrategyScore]]:
    """Score every (cap, quantum) combination, in deterministic order.

    When the model masks everything except the spoofed attributes, records
    collapse onto their spoofed pairs and the scoring runs in a vectorized
    kernel; otherwise each candidate goes through the generic path.
    """
    if len(dataset) == 0:
        raise DataError("cannot sweep an empty dataset")
    strategies = enumerate_strategies(caps, quanta_range, exclude)
    if not _collapses_to_resolution(dataset, baseline_model, policy):
        return [
            (s, score_strategy(dataset, baseline_model, s, policy)) for s in strategies
        ]
    ws, hs = _record_dimensions(dataset)
    candidates = np.array([s.as_candidate() for s in strategies], dtype=np.int64)
    scores = _kernels.score_grid(ws, hs, candidates)
    return [
        (
            s,
            StrategyScore(
                entropy_bits=float(row[0]),
                pct_le_1=float(row[1]),
                pct_le_10=float(row[2]),
                abs_loss=float(row[3]),
                pct_loss=float(row[4]),
            ),
        )
        for s, row in zip(strategies, scores)
    ]


def pareto_improvements(
    results: Iterable[tuple[SpoofStrategy, StrategyScore]],
    reference: StrategyScore,
) -> list[tuple[SpoofStrategy, StrategyScore]]:
    """Strategies strictly better than the reference in every column."""
    return [(s, score) for s, score in results if score.strictly_improves_on(reference)]
