"""Seedable synthetic corpora and observation logs with ground truth.

The corpus generator draws records from per-attribute categorical
distributions, a joint screen-resolution pool, and a browser mix, and plants
configurable fractions of js-disabled and bad-resolution rows. The log
generator does the reverse of classification: given a requested verdict per
attribute it builds an observation log on which inference provably
reproduces exactly that verdict. Both are pure functions of their spec and
seed; neither aims at statistical fidelity to any real-world collection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from fpeval.dataset import (
    Dataset,
    Record,
    SCREEN_HEIGHT_ATTRIBUTE,
    SCREEN_WIDTH_ATTRIBUTE,
    USER_AGENT_ATTRIBUTE,
)
from fpeval.errors import SpecError
from fpeval.fingerprint import Fingerprint
from fpeval.maskinfer import (
    BASELINE_SUBJECT,
    BOUNDARY_KINDS,
    DEFAULT_PARAMS,
    BoundaryKind,
    Observation,
    ObservationLog,
    StatParams,
    VERDICT_STATUSES,
    min_distinct_values_for_unmasked,
    pet_subject,
)

_WEIGHT_TOLERANCE = 1e-9

_UA_TEMPLATES = {
    ("chrome", "windows"): "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/63.0.3239.84 Safari/537.36",
    ("chrome", "mac"): "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_13_2) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/63.0.3239.84 Safari/537.36",
    ("chrome", "linux"): "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/63.0.3239.84 Safari/537.36",
    ("firefox", "windows"): "Mozilla/5.0 (Windows NT 10.0; Win64; x64; rv:56.0) Gecko/20100101 Firefox/56.0",
    ("firefox", "mac"): "Mozilla/5.0 (Macintosh; Intel Mac OS X 10.13; rv:56.0) Gecko/20100101 Firefox/56.0",
    ("firefox", "linux"): "Mozilla/5.0 (X11; Linux x86_64; rv:56.0) Gecko/20100101 Firefox/56.0",
    ("other", "windows"): "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/63.0.3239.84 Safari/537.36 Edge/16.16299",
    ("other", "mac"): "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_13_2) AppleWebKit/605.1.15 (KHTML, like Gecko) Version/11.0 Safari/605.1.15",
    ("other", "linux"): "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/63.0.3239.84 Safari/537.36 OPR/49.0.2725.47",
}

_RESERVED_ATTRIBUTES = (USER_AGENT_ATTRIBUTE, SCREEN_WIDTH_ATTRIBUTE, SCREEN_HEIGHT_ATTRIBUTE)

_DESKTOP_OSES = ("windows", "mac", "linux")


def _check_weights(weights: Sequence[float], what: str) -> None:
    if any(w <= 0 for w in weights):
        raise SpecError(f"{what}: weights must be positive")
    if abs(sum(weights) - 1.0) > _WEIGHT_TOLERANCE:
        raise SpecError(f"{what}: weights must sum to 1, got {sum(weights)!r}")


@dataclass(frozen=True)
class AttributeSpec:
    """Categorical distribution over the values of one attribute."""

    values: tuple[str | int, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise SpecError("an attribute spec needs at least one value")
        if len(self.values) != len(self.weights):
            raise SpecError("values and weights must have the same length")
        _check_weights(self.weights, "attribute spec")

    @classmethod
    def uniform(cls, values: Sequence[str | int]) -> "AttributeSpec":
        n = len(values)
        return cls(values=tuple(values), weights=tuple([1.0 / n] * n))


_DEFAULT_RESOLUTIONS: tuple[tuple[int, int], ...] = (
    (1920, 1080),
    (1366, 768),
    (1440, 900),
    (1280, 720),
    (1600, 900),
    (2560, 1440),
    (1280, 1024),
    (1680, 1050),
    (3840, 2160),
    (1360, 768),
)
_DEFAULT_RESOLUTION_WEIGHTS = (0.32, 0.18, 0.11, 0.07, 0.07, 0.07, 0.05, 0.05, 0.03, 0.05)


@dataclass(frozen=True)
class CorpusSpec:
    """Everything needed to generate one synthetic corpus deterministically."""

    n: int
    seed: int
    attributes: Mapping[str, AttributeSpec] = field(default_factory=dict)
    resolutions: tuple[tuple[int, int], ...] = _DEFAULT_RESOLUTIONS
    resolution_weights: tuple[float, ...] = _DEFAULT_RESOLUTION_WEIGHTS
    browser_mix: Mapping[str, float] = field(
        default_factory=lambda: {"chrome": 0.5, "firefox": 0.5}
    )
    os_mix: Mapping[str, float] = field(
        default_factory=lambda: {"windows": 1 / 3, "mac": 1 / 3, "linux": 1 / 3}
    )
    js_disabled_fraction: float = 0.0
    bad_resolution_fraction: float = 0.0
    cookies: int | None = None
    cookieless_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise SpecError("n must be >= 0")
        if self.seed < 0:
            raise SpecError("seed must be >= 0")
        for attr in self.attributes:
            if attr in _RESERVED_ATTRIBUTES:
                raise SpecError(
                    f"attribute {attr!r} is generated from the browser mix and "
                    "resolution pool; do not spec it directly"
                )
        if len(self.resolutions) != len(self.resolution_weights):
            raise SpecError("resolutions and resolution_weights must have the same length")
        _check_weights(self.resolution_weights, "resolution pool")
        if not self.browser_mix:
            raise SpecError("browser_mix must not be empty")
        if set(self.browser_mix) - {"chrome", "firefox", "other"}:
            raise SpecError("browser_mix keys must be chrome/firefox/other")
        _check_weights(list(self.browser_mix.values()), "browser mix")
        if not self.os_mix:
            raise SpecError("os_mix must not be empty")
        if set(self.os_mix) - set(_DESKTOP_OSES):
            raise SpecError("os_mix keys must be windows/mac/linux")
        _check_weights(list(self.os_mix.values()), "os mix")
        for name, frac in (
            ("js_disabled_fraction", self.js_disabled_fraction),
            ("bad_resolution_fraction", self.bad_resolution_fraction),
            ("cookieless_fraction", self.cookieless_fraction),
        ):
            if not 0.0 <= frac <= 1.0:
                raise SpecError(f"{name} must be in [0, 1]")
        if self.js_disabled_fraction + self.bad_resolution_fraction > 1.0:
            raise SpecError("planted js-disabled and bad-resolution fractions overlap")
        if self.cookies is not None and self.cookies < 1:
            raise SpecError("cookies must be >= 1 when given")


@dataclass(frozen=True)
class RecordTruth:
    """Labels the generator knows about one record."""

    browser: str
    os: str
    js_disabled: bool
    bad_resolution: bool
    cookie_id: str | None


@dataclass(frozen=True)
class CorpusGroundTruth:
    records: tuple[RecordTruth, ...]

    def expected_sanitize_drops(self) -> dict[str, int]:
        """Drop counts under the sanitize rule order (js, resolution, os)."""
        drops = {"js-disabled": 0, "illegitimate-resolution": 0, "non-desktop-os": 0}
        for r in self.records:
            if r.js_disabled:
                drops["js-disabled"] += 1
            elif r.bad_resolution:
                drops["illegitimate-resolution"] += 1
            elif r.os not in _DESKTOP_OSES:
                drops["non-desktop-os"] += 1
        return drops

    def expected_dedupe_count(self) -> int:
        return len({r.cookie_id for r in self.records if r.cookie_id is not None})

    def browser_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.records:
            counts[r.browser] = counts.get(r.browser, 0) + 1
        return counts

    def to_json_obj(self) -> dict[str, object]:
        return {
            "records": [
                {
                    "browser": r.browser,
                    "os": r.os,
                    "js_disabled": r.js_disabled,
                    "bad_resolution": r.bad_resolution,
                    "cookie_id": r.cookie_id,
                }
                for r in self.records
            ]
        }


def generate_corpus(spec: CorpusSpec) -> tuple[Dataset, CorpusGroundTruth]:
    """Deterministic corpus plus the labels needed to predict pipeline output.

    Draw order is fixed (browser, os, resolution, attributes in sorted name
    order, planted flags, cookies) so a given spec always yields the same
    bytes.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n

    browsers = list(spec.browser_mix)
    browser_idx = rng.choice(len(browsers), size=n, p=list(spec.browser_mix.values()))
    oses = list(spec.os_mix)
    os_idx = rng.choice(len(oses), size=n, p=list(spec.os_mix.values()))
    res_idx = rng.choice(len(spec.resolutions), size=n, p=list(spec.resolution_weights))

    attr_names = sorted(spec.attributes)
    attr_draws: dict[str, np.ndarray] = {}
    for name in attr_names:
        aspec = spec.attributes[name]
        attr_draws[name] = rng.choice(len(aspec.values), size=n, p=list(aspec.weights))

    js_count = int(round(spec.js_disabled_fraction * n))
    bad_count = int(round(spec.bad_resolution_fraction * n))
    flagged = rng.choice(n, size=min(n, js_count + bad_count), replace=False)
    js_rows = set(flagged[:js_count].tolist())
    bad_rows = set(flagged[js_count:].tolist())

    cookieless_count = int(round(spec.cookieless_fraction * n))
    cookieless_rows = set(rng.choice(n, size=cookieless_count, replace=False).tolist())
    if spec.cookies is not None:
        cookie_idx = rng.integers(0, spec.cookies, size=n)

    records = []
    truths = []
    for i in range(n):
        browser = browsers[browser_idx[i]]
        os = oses[os_idx[i]]
        width, height = spec.resolutions[res_idx[i]]
        bad = i in bad_rows
        attrs: list[tuple[str, object]] = [
            (USER_AGENT_ATTRIBUTE, _UA_TEMPLATES[(browser, os)]),
            (SCREEN_WIDTH_ATTRIBUTE, "0" if bad else width),
            (SCREEN_HEIGHT_ATTRIBUTE, height),
        ]
        for name in attr_names:
            aspec = spec.attributes[name]
            attrs.append((name, aspec.values[attr_draws[name][i]]))
        if i in cookieless_rows:
            cookie: str | None = None
        elif spec.cookies is not None:
            cookie = f"c{cookie_idx[i]:06d}"
        else:
            cookie = f"c{i:06d}"
        js_disabled = i in js_rows
        records.append(
            Record.from_fingerprint(
                Fingerprint(attrs), cookie_id=cookie, js_enabled=not js_disabled
            )
        )
        truths.append(
            RecordTruth(
                browser=browser,
                os=os,
                js_disabled=js_disabled,
                bad_resolution=bad,
                cookie_id=cookie,
            )
        )
    dataset = Dataset(records=tuple(records), provenance=f"syngen(seed={spec.seed})")
    return dataset, CorpusGroundTruth(records=tuple(truths))


# ---------------------------------------------------------------------------
# corpus spec file format


def corpus_spec_to_json_obj(spec: CorpusSpec) -> dict[str, object]:
    return {
        "n": spec.n,
        "seed": spec.seed,
        "browser_mix": dict(spec.browser_mix),
        "os_mix": dict(spec.os_mix),
        "js_disabled_fraction": spec.js_disabled_fraction,
        "bad_resolution_fraction": spec.bad_resolution_fraction,
        "cookies": spec.cookies,
        "cookieless_fraction": spec.cookieless_fraction,
        "resolutions": {
            f"{w}x{h}": weight
            for (w, h), weight in zip(spec.resolutions, spec.resolution_weights)
        },
        "attributes": {
            name: {"values": list(aspec.values), "weights": list(aspec.weights)}
            for name, aspec in spec.attributes.items()
        },
    }


def corpus_spec_from_json_obj(obj: dict[str, object], source: str = "<spec>") -> CorpusSpec:
    try:
        resolutions = []
        weights = []
        for key, weight in obj.get("resolutions", {}).items():
            w, h = key.split("x")
            resolutions.append((int(w), int(h)))
            weights.append(float(weight))
        attributes = {
            name: AttributeSpec(
                values=tuple(entry["values"]), weights=tuple(entry["weights"])
            )
            for name, entry in obj.get("attributes", {}).items()
        }
        return CorpusSpec(
            n=int(obj["n"]),
            seed=int(obj["seed"]),
            attributes=attributes,
            resolutions=tuple(resolutions) or _DEFAULT_RESOLUTIONS,
            resolution_weights=tuple(weights) or _DEFAULT_RESOLUTION_WEIGHTS,
            browser_mix=dict(obj.get("browser_mix", {"chrome": 0.5, "firefox": 0.5})),
            os_mix=dict(
                obj.get("os_mix", {"windows": 1 / 3, "mac": 1 / 3, "linux": 1 / 3})
            ),
            js_disabled_fraction=float(obj.get("js_disabled_fraction", 0.0)),
            bad_resolution_fraction=float(obj.get("bad_resolution_fraction", 0.0)),
            cookies=None if obj.get("cookies") is None else int(obj["cookies"]),
            cookieless_fraction=float(obj.get("cookieless_fraction", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"{source}: malformed corpus spec: {exc}") from None


def load_corpus_spec(path: str | Path) -> CorpusSpec:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return corpus_spec_from_json_obj(obj, source=str(path))


def save_corpus_spec(spec: CorpusSpec, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(corpus_spec_to_json_obj(spec), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# presets

PRESETS = ("firefox-like", "chrome-like")


def preset_corpus_spec(name: str, n: int, seed: int) -> CorpusSpec:
    """Bundled synthetic corpus shapes; values are invented, not measured."""
    common = {
        "timezone": AttributeSpec(
            values=(-480, -420, -360, -300, -240, -120, 0, 60, 120, 180, 330, 540),
            weights=(0.15, 0.08, 0.07, 0.14, 0.06, 0.04, 0.12, 0.16, 0.08, 0.04, 0.03, 0.03),
        ),
        "language": AttributeSpec(
            values=("en-US", "en-GB", "de", "fr", "es", "ru", "pt-BR", "zh-CN", "ja", "pl"),
            weights=(0.34, 0.08, 0.11, 0.09, 0.08, 0.09, 0.06, 0.06, 0.05, 0.04),
        ),
        "h.Accept-Language": AttributeSpec(
            values=(
                "en-US,en;q=0.5",
                "en-GB,en;q=0.5",
                "de-DE,de;q=0.5",
                "fr-FR,fr;q=0.5",
                "es-ES,es;q=0.5",
                "ru-RU,ru;q=0.5",
                "pt-BR,pt;q=0.5",
                "zh-CN,zh;q=0.5",
            ),
            weights=(0.38, 0.09, 0.12, 0.1, 0.09, 0.1, 0.06, 0.06),
        ),
        "platform": AttributeSpec(
            values=("Win32", "MacIntel", "Linux x86_64"), weights=(0.55, 0.25, 0.2)
        ),
        "canvas fingerprint": AttributeSpec.uniform(
            tuple(f"canvas-{i:04d}" for i in range(400))
        ),
        "javascript fonts": AttributeSpec.uniform(
            tuple(f"fonts-{i:03d}" for i in range(60))
        ),
        "webGL.Vendor": AttributeSpec(
            values=("Intel Inc.", "NVIDIA Corporation", "AMD", "Google Inc."),
            weights=(0.42, 0.3, 0.18, 0.1),
        ),
        "webGL.Renderer": AttributeSpec.uniform(
            tuple(f"renderer-{i:02d}" for i in range(14))
        ),
        "screen.Depth": AttributeSpec(values=(24, 16, 30), weights=(0.9, 0.07, 0.03)),
        "cookies enabled": AttributeSpec(values=("true",), weights=(1.0,)),
    }
    if name == "firefox-like":
        attributes = dict(common)
        attributes["cpu class"] = AttributeSpec(
            values=("unknown", "x86", "x64"), weights=(0.5, 0.2, 0.3)
        )
        attributes["buildID"] = AttributeSpec.uniform(
            tuple(int(f"201710{i:02d}165158") for i in range(1, 9))
        )
        attributes["plugins"] = AttributeSpec(values=("none",), weights=(1.0,))
        mix = {"firefox": 1.0}
    elif name == "chrome-like":
        attributes = dict(common)
        attributes["cpu class"] = AttributeSpec(values=("unknown",), weights=(1.0,))
        attributes["buildID"] = AttributeSpec(values=("Undefined",), weights=(1.0,))
        attributes["plugins"] = AttributeSpec.uniform(
            tuple(f"plugins-{c}" for c in "abcdef")
        )
        mix = {"chrome": 1.0}
    else:
        raise SpecError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return CorpusSpec(n=n, seed=seed, attributes=attributes, browser_mix=mix)


# ---------------------------------------------------------------------------
# observation-log generation


@dataclass(frozen=True)
class LogGroundTruth:
    """Requested verdicts, which inference on the generated log must reproduce."""

    verdicts: Mapping[str, Mapping[str, str]]  # pet -> attr -> status

    def to_json_obj(self) -> dict[str, object]:
        return {"verdicts": {pet: dict(v) for pet, v in self.verdicts.items()}}


def generate_log(
    pets: Sequence[tuple[str, Mapping[str, str]]],
    platforms: int,
    epochs_per_boundary: int,
    seed: int,
    params: StatParams = DEFAULT_PARAMS,
    boundaries: Sequence[BoundaryKind] = ("reload", "domain"),
) -> tuple[ObservationLog, LogGroundTruth]:
    """Build a log whose inferred verdicts equal the requested ones exactly.

    Construction rules per attribute: a baseline-varies request makes the
    baseline itself change across epochs; an unmasked request spreads the
    minimum number of distinct baseline values across platforms for the test
    to fire; an insufficient-diversity request pins a single baseline value;
    masked requests perturb only the tool side (varying it across epochs or
    standardizing it to a fresh constant).
    """
    if platforms < 1:
        raise SpecError("need at least one platform")
    if epochs_per_boundary < 2:
        raise SpecError("variation testing needs at least two epochs per boundary")
    if not boundaries:
        raise SpecError("need at least one boundary kind")
    for boundary in boundaries:
        if boundary not in BOUNDARY_KINDS:
            raise SpecError(f"unknown boundary kind: {boundary!r}")
    if not pets:
        raise SpecError("need at least one tool")

    k_unmasked = min_distinct_values_for_unmasked(params)

    # Per-attribute baseline plan, merged across tools and checked for conflicts.
    baseline_varying: set[str] = set()
    wants_many_values: set[str] = set()  # unmasked: k must reach the test threshold
    wants_single_value: set[str] = set()  # insufficient diversity: k pinned to 1
    all_attrs: set[str] = set()
    for pet, verdict_map in pets:
        for attr, status in verdict_map.items():
            if status not in VERDICT_STATUSES:
                raise SpecError(f"unknown verdict status {status!r} for {attr!r}")
            all_attrs.add(attr)
            if status == "inconclusive_baseline_varies":
                baseline_varying.add(attr)
            elif status == "unmasked":
                wants_many_values.add(attr)
            elif status == "inconclusive_insufficient_diversity":
                if k_unmasked <= 1:
                    raise SpecError(
                        f"{attr!r}: an insufficient-diversity outcome is unreachable "
                        f"because a single tested value already satisfies the test "
                        f"at impact_fraction={params.impact_fraction} "
                        f"alpha={params.alpha}"
                    )
                wants_single_value.add(attr)
    for attr in sorted(wants_many_values & wants_single_value):
        raise SpecError(
            f"{attr!r}: conflicting requests need both one and {k_unmasked} "
            "distinct baseline values"
        )
    for attr in sorted(baseline_varying):
        for pet, verdict_map in pets:
            status = verdict_map.get(attr)
            if status is not None and status != "inconclusive_baseline_varies":
                raise SpecError(
                    f"{attr!r}: one tool requests a varying baseline, which forces "
                    "every other tool's verdict for that attribute to "
                    "inconclusive_baseline_varies"
                )
    for attr in sorted(wants_many_values):
        if k_unmasked > platforms:
            raise SpecError(
                f"{attr!r}: the unmasked outcome needs at least {k_unmasked} distinct "
                f"baseline values, hence at least {k_unmasked} platforms; got {platforms}"
            )
    needs_k = {attr: k_unmasked for attr in wants_many_values}

    rng = np.random.default_rng(seed)
    salts = {attr: f"{rng.integers(0, 1 << 30):08x}" for attr in sorted(all_attrs)}

    def baseline_value(attr: str, platform: int, boundary: str, epoch: int) -> str:
        salt = salts[attr]
        if attr in baseline_varying and platform == 0:
            return f"{attr}#{salt}/base-{boundary}{epoch}"
        k = needs_k.get(attr, 1)
        return f"{attr}#{salt}/v{min(platform, k - 1)}"

    def pet_value(
        pet: str, status: str | None, attr: str, platform: int, boundary: str, epoch: int
    ) -> str:
        if status == "masked_standardize":
            return f"{attr}#{salts[attr]}/std-{pet}"
        if status == "masked_vary" and platform == 0:
            return f"{attr}#{salts[attr]}/tool-{pet}-{boundary}{epoch}"
        return baseline_value(attr, platform, boundary, epoch)

    observations = []
    attrs_sorted = sorted(all_attrs)
    for platform in range(platforms):
        platform_id = f"platform-{platform:02d}"
        for boundary in boundaries:
            for epoch in range(epochs_per_boundary):
                baseline_fp = Fingerprint(
                    [
                        (attr, baseline_value(attr, platform, boundary, epoch))
                        for attr in attrs_sorted
                    ]
                )
                observations.append(
                    Observation(
                        platform_id=platform_id,
                        subject=BASELINE_SUBJECT,
                        boundary=boundary,
                        epoch=epoch,
                        fingerprint=baseline_fp,
                    )
                )
                for pet, verdict_map in pets:
                    fp = Fingerprint(
                        [
                            (
                                attr,
                                pet_value(
                                    pet, verdict_map.get(attr), attr, platform, boundary, epoch
                                ),
                            )
                            for attr in attrs_sorted
                        ]
                    )
                    observations.append(
                        Observation(
                            platform_id=platform_id,
                            subject=pet_subject(pet),
                            boundary=boundary,
                            epoch=epoch,
                            fingerprint=fp,
                        )
                    )
    truth = LogGroundTruth(
        verdicts={pet: dict(verdict_map) for pet, verdict_map in pets}
    )
    return ObservationLog(observations), truth
