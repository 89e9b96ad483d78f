"""Counterfactual mask application and per-tool trackability comparison.

Applying a mask model to a dataset rewrites every record's fingerprint:
attributes with a masked verdict (and, under the default policy, attributes
with an inconclusive verdict) are replaced by the reserved masked sentinel,
or by a registered transform's output; unmasked attributes and attributes
the model says nothing about pass through untouched. A masked attribute is
set on every record, whether or not the record observed it, so a total mask
collapses the whole dataset into a single anonymity set.

Treating inconclusive attributes as masked deliberately overestimates a
tool's powers; the opposite policy exists to measure that overestimate.
"""

from __future__ import annotations

import io
import csv
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Mapping, Union

from fpeval.dataset import Dataset
from fpeval.errors import ConfigurationError, DataError
from fpeval.fingerprint import MASKED, AttributeValue, Fingerprint, coerce_value
from fpeval.maskinfer import MaskModel
from fpeval.metrics import METRICS, Metric, TrackabilityReport, trackability


@dataclass(frozen=True)
class FullMask:
    """Replace the value with the reserved masked sentinel."""


@dataclass(frozen=True)
class MapFunction:
    """Replace the value with fn(original fingerprint).

    The function sees the whole pre-mask fingerprint so that derived
    attributes (e.g. available screen size) can be computed from siblings.
    It must be deterministic.
    """

    fn: Callable[[Fingerprint], AttributeValue]


ValueTransform = Union[FullMask, MapFunction]

Policy = Literal["inconclusive_as_masked", "inconclusive_as_unmasked"]
POLICIES: tuple[Policy, ...] = ("inconclusive_as_masked", "inconclusive_as_unmasked")
DEFAULT_POLICY: Policy = "inconclusive_as_masked"


def effective_masked_attributes(model: MaskModel, policy: Policy) -> frozenset[str]:
    masked = model.masked_attributes()
    if policy == "inconclusive_as_masked":
        masked = masked | model.inconclusive_attributes()
    elif policy != "inconclusive_as_unmasked":
        raise ConfigurationError(f"unknown policy: {policy!r}")
    return masked


def apply_mask(
    dataset: Dataset,
    model: MaskModel,
    policy: Policy = DEFAULT_POLICY,
) -> Dataset:
    """Rewrite every fingerprint according to the model under the policy.

    Record count, order, and ingestion metadata are preserved; the screen
    mirrors are recomputed from the rewritten fingerprints.
    """
    masked = effective_masked_attributes(model, policy)
    for attr, transform in model.transforms.items():
        if attr not in masked:
            raise ConfigurationError(
                f"transform registered on non-masked attribute {attr!r}"
            )
        if not isinstance(transform, (FullMask, MapFunction)):
            raise ConfigurationError(
                f"transform for {attr!r} must be FullMask or MapFunction"
            )
    extra_order = sorted(masked)

    rewritten = []
    for record in dataset:
        fp = record.fingerprint
        replacements: dict[str, AttributeValue] = {}
        for name in fp.names():
            if name in masked:
                replacements[name] = _masked_value(model, name, fp)
        for name in extra_order:
            if name not in fp:
                replacements[name] = _masked_value(model, name, fp)
        rewritten.append(record.with_fingerprint(fp.with_replacements(replacements)))
    return Dataset(records=tuple(rewritten), provenance=dataset.provenance)


def _masked_value(model: MaskModel, attr: str, fingerprint: Fingerprint) -> AttributeValue:
    transform = model.transforms.get(attr)
    if transform is None or isinstance(transform, FullMask):
        return MASKED
    return coerce_value(transform.fn(fingerprint))


@dataclass(frozen=True)
class HybridReport:
    """Before/after trackability for one tool (or one group of tools)."""

    pet: str
    before: TrackabilityReport
    after: TrackabilityReport
    eff: Mapping[Metric, float]
    masked_attrs: tuple[str, ...]
    inconclusive_attrs: tuple[str, ...]
    unmasked_attrs: tuple[str, ...]

    def to_json_obj(self) -> dict[str, object]:
        return {
            "pet": self.pet,
            "before": self.before.to_json_obj(),
            "after": self.after.to_json_obj(),
            "eff": dict(self.eff),
            "masked_attrs": list(self.masked_attrs),
            "inconclusive_attrs": list(self.inconclusive_attrs),
            "unmasked_attrs": list(self.unmasked_attrs),
        }


def evaluate_pet(
    dataset: Dataset,
    model: MaskModel,
    policy: Policy = DEFAULT_POLICY,
) -> HybridReport:
    if len(dataset) == 0:
        raise DataError("cannot evaluate a tool on an empty dataset")
    before = trackability(dataset.fingerprints())
    after = trackability(apply_mask(dataset, model, policy).fingerprints())
    eff = {m: before.value(m) - after.value(m) for m in METRICS}
    return HybridReport(
        pet=model.pet,
        before=before,
        after=after,
        eff=eff,
        masked_attrs=tuple(sorted(model.masked_attributes())),
        inconclusive_attrs=tuple(sorted(model.inconclusive_attributes())),
        unmasked_attrs=tuple(sorted(model.unmasked_attributes())),
    )


def evaluate_all(
    dataset: Dataset,
    models: Iterable[MaskModel],
    policy: Policy = DEFAULT_POLICY,
    browser: str | None = None,
) -> list[HybridReport]:
    """Evaluate every model and rank rows by descending after-entropy.

    Models with byte-equal verdict maps share one row whose name lists all
    of them. When a browser label is given, models stamped with a different
    browser are rejected.
    """
    grouped: dict[str, tuple[MaskModel, list[str]]] = {}
    for model in models:
        if browser is not None and model.browser is not None and model.browser != browser:
            raise ConfigurationError(
                f"model {model.pet!r} targets browser {model.browser!r}, "
                f"but the dataset split is {browser!r}"
            )
        signature = model.verdict_signature()
        if signature in grouped:
            grouped[signature][1].append(model.pet)
        else:
            grouped[signature] = (model, [model.pet])
    rows = []
    for model, pets in grouped.values():
        report = evaluate_pet(dataset, model, policy)
        if len(pets) > 1:
            report = HybridReport(
                pet=", ".join(sorted(pets)),
                before=report.before,
                after=report.after,
                eff=report.eff,
                masked_attrs=report.masked_attrs,
                inconclusive_attrs=report.inconclusive_attrs,
                unmasked_attrs=report.unmasked_attrs,
            )
        rows.append(report)
    rows.sort(key=lambda r: (-r.after.entropy_bits, r.pet))
    return rows


def report_table_csv(rows: Iterable[HybridReport]) -> str:
    """The after-metrics table: one row per tool group, full float precision."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["pet", "entropy_bits", "pct_le_1", "pct_le_10"])
    for row in rows:
        writer.writerow(
            [
                row.pet,
                repr(row.after.entropy_bits),
                repr(row.after.pct_le_1),
                repr(row.after.pct_le_10),
            ]
        )
    return out.getvalue()


def report_table_json(rows: Iterable[HybridReport]) -> str:
    return json.dumps([r.to_json_obj() for r in rows], indent=2, sort_keys=True) + "\n"
