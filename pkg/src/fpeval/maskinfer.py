"""Mask-model inference from paired baseline/tool observation logs.

For each (tool, attribute) pair the classifier walks a fixed decision order:

1. the attribute already varies on some baseline platform (across the epochs
   of any boundary) -> inconclusive, variation testing impossible;
2. the attribute varies on some tool-equipped platform -> masked by variation;
3. the attribute's value differs between a platform and its tool-equipped
   twin -> masked by standardization (a value missing on one side counts as
   a difference);
4. otherwise, a statistical test decides between "unmasked" and
   "inconclusive": with k distinct baseline values observed across the paired
   platforms, the probability of seeing no changed value while at least a
   fraction `impact_fraction` of all values is standardized is at most
   (1 - impact_fraction) ** k; when that bound is <= alpha, impactful
   standardization is rejected and the attribute is labeled unmasked with
   confidence alpha.

With the defaults (impact_fraction 0.75, alpha 0.1) the unmasked label
requires k >= 2, since 0.25 > 0.1 but 0.25**2 = 0.0625 <= 0.1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Literal, Mapping

from fpeval.errors import (
    AttributeNotObservedError,
    FormatError,
    FpevalError,
    InsufficientDataError,
)
from fpeval.fingerprint import (
    AttributeValue,
    Fingerprint,
    render_value,
)

BoundaryKind = Literal["reload", "domain", "session"]
BOUNDARY_KINDS: tuple[BoundaryKind, ...] = ("reload", "domain", "session")

BASELINE_SUBJECT = "baseline"

VerdictStatus = Literal[
    "masked_vary",
    "masked_standardize",
    "unmasked",
    "inconclusive_baseline_varies",
    "inconclusive_insufficient_diversity",
]
VERDICT_STATUSES: tuple[VerdictStatus, ...] = (
    "masked_vary",
    "masked_standardize",
    "unmasked",
    "inconclusive_baseline_varies",
    "inconclusive_insufficient_diversity",
)
MASKED_STATUSES = ("masked_vary", "masked_standardize")
INCONCLUSIVE_STATUSES = (
    "inconclusive_baseline_varies",
    "inconclusive_insufficient_diversity",
)


def pet_subject(pet: str) -> str:
    return f"pet:{pet}"


@dataclass(frozen=True)
class StatParams:
    """Parameters of the standardization test.

    impact_fraction: the fraction of values a standardization must affect to
    count as impactful. alpha: the rejection threshold on the probability of
    having missed such a standardization.
    """

    impact_fraction: float = 0.75
    alpha: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 < self.impact_fraction < 1.0:
            raise FormatError("impact_fraction must be in (0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise FormatError("alpha must be in (0, 1)")


DEFAULT_PARAMS = StatParams()


def standardization_ruled_out(distinct_baseline_values: int, params: StatParams) -> bool:
    """True when k tested values make impactful standardization unlikely.

    The chance of seeing zero changed values while a fraction f is being
    standardized is at most (1 - f) ** k, one miss per independently tested
    value; the claim is rejected when that bound falls to alpha or below.
    """
    return (1.0 - params.impact_fraction) ** distinct_baseline_values <= params.alpha


def min_distinct_values_for_unmasked(params: StatParams) -> int:
    """Smallest k for which the test can emit the unmasked label."""
    k = 1
    while not standardization_ruled_out(k, params):
        k += 1
    return k


@dataclass(frozen=True)
class Observation:
    """One fingerprint captured on one platform at one epoch of one boundary."""

    platform_id: str
    subject: str  # "baseline" or "pet:<name>"
    boundary: BoundaryKind
    epoch: int
    fingerprint: Fingerprint


class ObservationLog:
    """Immutable collection of observations with grouping helpers."""

    def __init__(self, observations: Iterable[Observation]):
        self._observations = tuple(observations)
        groups: dict[tuple[str, str, str], list[Observation]] = {}
        for obs in self._observations:
            if obs.boundary not in BOUNDARY_KINDS:
                raise FormatError(f"unknown boundary kind: {obs.boundary!r}")
            groups.setdefault((obs.subject, obs.platform_id, obs.boundary), []).append(obs)
        for bucket in groups.values():
            bucket.sort(key=lambda o: o.epoch)
        self._groups = groups

    def __len__(self) -> int:
        return len(self._observations)

    def __iter__(self) -> Iterator[Observation]:
        return iter(self._observations)

    @property
    def observations(self) -> tuple[Observation, ...]:
        return self._observations

    def subjects(self) -> set[str]:
        return {o.subject for o in self._observations}

    def platforms(self, subject: str) -> set[str]:
        return {p for (s, p, _b) in self._groups if s == subject}

    def boundary_groups(self, subject: str) -> list[tuple[str, str, list[Observation]]]:
        """(platform, boundary, epoch-ordered observations) for one subject."""
        return [
            (p, b, list(bucket))
            for (s, p, b), bucket in sorted(self._groups.items())
            if s == subject
        ]

    def attribute_names(self, subjects: Iterable[str] | None = None) -> list[str]:
        wanted = set(subjects) if subjects is not None else None
        names: set[str] = set()
        for obs in self._observations:
            if wanted is None or obs.subject in wanted:
                names.update(obs.fingerprint.names())
        return sorted(names)

    def values_by_platform(self, subject: str, attr: str) -> dict[str, set[AttributeValue]]:
        out: dict[str, set[AttributeValue]] = {}
        for obs in self._observations:
            if obs.subject == subject:
                out.setdefault(obs.platform_id, set()).add(obs.fingerprint.get(attr))
        return out


Citation = tuple[str, str, str]  # (platform, "boundary:epoch", rendered value)


def _cite(obs: Observation, attr: str) -> Citation:
    return (obs.platform_id, f"{obs.boundary}:{obs.epoch}", render_value(obs.fingerprint.get(attr)))


@dataclass(frozen=True)
class Verdict:
    """Classification of one attribute under one tool."""

    status: VerdictStatus
    confidence: float | None = None
    reason: str | None = None
    evidence: tuple[Citation, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.status not in VERDICT_STATUSES:
            raise FormatError(f"unknown verdict status: {self.status!r}")
        if self.status == "unmasked" and self.confidence is None:
            raise FormatError("an unmasked verdict must carry its confidence alpha")

    @property
    def is_masked(self) -> bool:
        return self.status in MASKED_STATUSES

    @property
    def is_inconclusive(self) -> bool:
        return self.status in INCONCLUSIVE_STATUSES


@dataclass(frozen=True)
class MaskModel:
    """Per-attribute verdicts for one tool, plus optional value transforms.

    Transforms (see fpeval.hybrid) may only be attached to attributes whose
    verdict is a masked variant; they let handcrafted models spoof a value
    instead of blanking it.
    """

    pet: str
    params: StatParams
    verdicts: Mapping[str, Verdict]
    transforms: Mapping[str, object] = field(default_factory=dict)
    browser: str | None = None

    def __post_init__(self) -> None:
        for attr in self.transforms:
            verdict = self.verdicts.get(attr)
            if verdict is None or not verdict.is_masked:
                raise FormatError(
                    f"transform registered on attribute {attr!r} whose verdict "
                    "is not a masked variant"
                )

    def masked_attributes(self) -> frozenset[str]:
        return frozenset(a for a, v in self.verdicts.items() if v.is_masked)

    def inconclusive_attributes(self) -> frozenset[str]:
        return frozenset(a for a, v in self.verdicts.items() if v.is_inconclusive)

    def unmasked_attributes(self) -> frozenset[str]:
        return frozenset(a for a, v in self.verdicts.items() if v.status == "unmasked")

    def with_transforms(self, transforms: Mapping[str, object]) -> "MaskModel":
        merged = dict(self.transforms)
        merged.update(transforms)
        return MaskModel(
            pet=self.pet,
            params=self.params,
            verdicts=self.verdicts,
            transforms=merged,
            browser=self.browser,
        )

    def verdict_signature(self) -> str:
        """Canonical rendering of the verdict map, used to merge identical rows."""
        payload = {
            attr: {"status": v.status, "confidence": v.confidence}
            for attr, v in self.verdicts.items()
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# classification


def _varies(groups: list[tuple[str, str, list[Observation]]], attr: str):
    """First (platform, boundary) whose epochs show >= 2 distinct values."""
    for platform, boundary, bucket in groups:
        seen: dict[AttributeValue, Observation] = {}
        for obs in bucket:
            seen.setdefault(obs.fingerprint.get(attr), obs)
            if len(seen) >= 2:
                return platform, boundary, [_cite(o, attr) for o in bucket]
    return None


def baseline_varies(log: ObservationLog, attr: str) -> bool:
    """True iff some baseline platform shows >= 2 distinct values for attr.

    Values that differ across platforms do not count; only change across the
    epochs of a single boundary on a single platform is variation. Groups
    with fewer than two epochs cannot exhibit variation and are effectively
    skipped; see variation_coverage for reporting them.
    """
    if attr not in log.attribute_names():
        raise AttributeNotObservedError(f"attribute {attr!r} never appears in the log")
    return _varies(log.boundary_groups(BASELINE_SUBJECT), attr) is not None


def variation_coverage(log: ObservationLog) -> list[dict[str, object]]:
    """Boundary groups with a single epoch, where variation testing is skipped."""
    skipped = []
    for subject in sorted(log.subjects()):
        for platform, boundary, bucket in log.boundary_groups(subject):
            if len(bucket) < 2:
                skipped.append(
                    {
                        "subject": subject,
                        "platform": platform,
                        "boundary": boundary,
                        "epochs": len(bucket),
                    }
                )
    return skipped


def classify(
    log: ObservationLog,
    pet: str,
    attr: str,
    params: StatParams = DEFAULT_PARAMS,
) -> Verdict:
    subject = pet_subject(pet)
    if attr not in log.attribute_names(subjects=(BASELINE_SUBJECT, subject)):
        raise AttributeNotObservedError(
            f"attribute {attr!r} never appears in the baseline or {pet!r} observations"
        )
    paired = log.platforms(BASELINE_SUBJECT) & log.platforms(subject)
    if not paired:
        raise InsufficientDataError(
            f"no platform carries both baseline and {pet!r} observations"
        )

    baseline_variation = _varies(log.boundary_groups(BASELINE_SUBJECT), attr)
    if baseline_variation is not None:
        platform, boundary, citations = baseline_variation
        return Verdict(
            status="inconclusive_baseline_varies",
            reason=f"baseline platform {platform!r} varies across {boundary} epochs",
            evidence=tuple(citations),
        )

    pet_variation = _varies(log.boundary_groups(subject), attr)
    if pet_variation is not None:
        platform, boundary, citations = pet_variation
        return Verdict(
            status="masked_vary",
            reason=f"platform {platform!r} varies across {boundary} epochs with the tool",
            evidence=tuple(citations),
        )

    baseline_values = log.values_by_platform(BASELINE_SUBJECT, attr)
    pet_values = log.values_by_platform(subject, attr)
    for platform in sorted(paired):
        if baseline_values[platform] != pet_values[platform]:
            return Verdict(
                status="masked_standardize",
                reason=(
                    f"platform {platform!r} reports "
                    f"{sorted(map(render_value, pet_values[platform]))} with the tool "
                    f"but {sorted(map(render_value, baseline_values[platform]))} without"
                ),
            )

    distinct = set()
    for platform in paired:
        distinct.update(baseline_values[platform])
    k = len(distinct)
    if standardization_ruled_out(k, params):
        return Verdict(
            status="unmasked",
            confidence=params.alpha,
            reason=f"{k} distinct tested value(s) rule out impactful standardization",
        )
    needed = min_distinct_values_for_unmasked(params)
    return Verdict(
        status="inconclusive_insufficient_diversity",
        reason=(
            f"only {k} distinct tested value(s); at least {needed} are needed "
            f"at impact_fraction={params.impact_fraction} alpha={params.alpha}"
        ),
    )


def infer_model(
    log: ObservationLog,
    pet: str,
    params: StatParams = DEFAULT_PARAMS,
) -> MaskModel:
    """Classify every attribute appearing in the baseline or tool observations.

    Per-attribute failures become inconclusive verdicts carrying the error
    text instead of aborting the whole model.
    """
    verdicts: dict[str, Verdict] = {}
    for attr in log.attribute_names(subjects=(BASELINE_SUBJECT, pet_subject(pet))):
        try:
            verdicts[attr] = classify(log, pet, attr, params)
        except FpevalError as exc:
            verdicts[attr] = Verdict(
                status="inconclusive_insufficient_diversity",
                reason=f"classification failed: {exc}",
            )
    return MaskModel(pet=pet, params=params, verdicts=verdicts)


# ---------------------------------------------------------------------------
# pre-order ranking


@dataclass(frozen=True)
class PreorderRanking:
    """Dominance relation over tools by masked-attribute-set inclusion."""

    dominates: tuple[tuple[str, str], ...]  # (upper, lower), reflexive
    equivalence_classes: tuple[tuple[str, ...], ...]
    masked_counts: Mapping[str, int]

    def to_json_obj(self) -> dict[str, object]:
        return {
            "dominates": [list(pair) for pair in self.dominates],
            "equivalence_classes": [list(cls) for cls in self.equivalence_classes],
            "masked_counts": dict(self.masked_counts),
        }


def rank_preorder(models: Iterable[MaskModel]) -> PreorderRanking:
    """Tool A sits above tool B iff A masks every attribute B masks.

    The emitted relation is reflexive and transitive; tools with equal masked
    sets form one equivalence class.
    """
    masked_sets = {m.pet: m.masked_attributes() for m in models}
    pets = sorted(masked_sets)
    pairs = [
        (a, b)
        for a in pets
        for b in pets
        if masked_sets[a] >= masked_sets[b]
    ]
    by_set: dict[frozenset[str], list[str]] = {}
    for pet in pets:
        by_set.setdefault(masked_sets[pet], []).append(pet)
    classes = sorted(
        (tuple(sorted(group)) for group in by_set.values()),
        key=lambda cls: (-len(masked_sets[cls[0]]), cls),
    )
    counts = {pet: len(masked_sets[pet]) for pet in pets}
    return PreorderRanking(
        dominates=tuple(pairs),
        equivalence_classes=tuple(classes),
        masked_counts=counts,
    )


# ---------------------------------------------------------------------------
# file formats


def render_observation_log(log: ObservationLog) -> str:
    from fpeval.dataset import _encode_json_value  # shared value encoding

    lines = []
    for obs in log:
        obj = {
            "platform": obs.platform_id,
            "subject": obs.subject,
            "boundary": obs.boundary,
            "epoch": obs.epoch,
            "attrs": {n: _encode_json_value(v) for n, v in obs.fingerprint.items()},
        }
        lines.append(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def save_observation_log(log: ObservationLog, path: str | Path) -> None:
    Path(path).write_text(render_observation_log(log), encoding="utf-8")


def load_observation_log(path: str | Path) -> ObservationLog:
    from fpeval.dataset import _decode_json_value, _reject_duplicate_keys

    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not valid UTF-8 at byte offset {exc.start}") from None
    observations = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line, object_pairs_hook=_reject_duplicate_keys)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {line_no}: invalid JSON: {exc.msg}") from None
        try:
            platform = obj["platform"]
            subject = obj["subject"]
            boundary = obj["boundary"]
            epoch = int(obj["epoch"])
            attrs = obj["attrs"]
        except (KeyError, TypeError, ValueError):
            raise FormatError(
                f"line {line_no}: observation needs platform/subject/boundary/epoch/attrs"
            ) from None
        if not isinstance(attrs, dict):
            raise FormatError(f"line {line_no}: attrs must be an object")
        if subject != BASELINE_SUBJECT and not subject.startswith("pet:"):
            raise FormatError(f"line {line_no}: subject must be 'baseline' or 'pet:<name>'")
        fingerprint = Fingerprint(
            [(n, _decode_json_value(v)) for n, v in attrs.items()]
        )
        observations.append(
            Observation(
                platform_id=str(platform),
                subject=subject,
                boundary=boundary,
                epoch=epoch,
                fingerprint=fingerprint,
            )
        )
    return ObservationLog(observations)


def render_mask_model(model: MaskModel) -> str:
    obj: dict[str, object] = {
        "pet": model.pet,
        "params": {"f": model.params.impact_fraction, "alpha": model.params.alpha},
        "verdicts": {
            attr: _verdict_to_json(v) for attr, v in sorted(model.verdicts.items())
        },
    }
    if model.browser is not None:
        obj["browser"] = model.browser
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def save_mask_model(model: MaskModel, path: str | Path) -> None:
    Path(path).write_text(render_mask_model(model), encoding="utf-8")


def _verdict_to_json(verdict: Verdict) -> dict[str, object]:
    out: dict[str, object] = {"status": verdict.status}
    if verdict.confidence is not None:
        out["confidence"] = verdict.confidence
    if verdict.reason is not None:
        out["reason"] = verdict.reason
    return out


def load_mask_model(path: str | Path) -> MaskModel:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc.msg}") from None
    return mask_model_from_json_obj(obj, source=str(path))


def mask_model_from_json_obj(obj: object, source: str = "<model>") -> MaskModel:
    if not isinstance(obj, dict) or "pet" not in obj or "verdicts" not in obj:
        raise FormatError(f"{source}: a mask model needs 'pet' and 'verdicts'")
    params_obj = obj.get("params", {})
    if not isinstance(params_obj, dict):
        raise FormatError(f"{source}: params must be an object")
    params = StatParams(
        impact_fraction=float(params_obj.get("f", DEFAULT_PARAMS.impact_fraction)),
        alpha=float(params_obj.get("alpha", DEFAULT_PARAMS.alpha)),
    )
    verdicts_obj = obj["verdicts"]
    if not isinstance(verdicts_obj, dict):
        raise FormatError(f"{source}: verdicts must be an object")
    verdicts: dict[str, Verdict] = {}
    for attr, entry in verdicts_obj.items():
        if not isinstance(entry, dict) or "status" not in entry:
            raise FormatError(f"{source}: verdict for {attr!r} needs a status")
        confidence = entry.get("confidence")
        verdicts[attr] = Verdict(
            status=entry["status"],
            confidence=None if confidence is None else float(confidence),
            reason=entry.get("reason"),
        )
    browser = obj.get("browser")
    if browser is not None and not isinstance(browser, str):
        raise FormatError(f"{source}: browser must be a string")
    return MaskModel(
        pet=str(obj["pet"]),
        params=params,
        verdicts=verdicts,
        browser=browser,
    )
