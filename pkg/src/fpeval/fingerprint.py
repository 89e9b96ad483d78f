"""Fingerprint value model and its canonical, injective serialization.

An attribute value is one of: a text string, an integer, the MISSING
singleton (attribute not observed), or the MASKED sentinel (value withheld
by a privacy tool). MISSING is distinct from the empty string and from the
integer 0; MASKED is reserved and can never be produced by ingestion of
ordinary values, which is what makes it collision-free.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator, Mapping, Union

from fpeval.errors import FormatError


class _Missing:
    """Singleton marking an attribute that was not observed."""

    __slots__ = ()
    _instance: "_Missing | None" = None

    def __new__(cls) -> "_Missing":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"


class _Masked:
    """Singleton sentinel for a value replaced by full masking."""

    __slots__ = ()
    _instance: "_Masked | None" = None

    def __new__(cls) -> "_Masked":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MASKED"


MISSING = _Missing()
MASKED = _Masked()

AttributeValue = Union[str, int, _Missing, _Masked]


def coerce_value(value: object) -> AttributeValue:
    """Coerce a raw value (e.g. parsed JSON) into an AttributeValue.

    Strings and ints pass through; None becomes MISSING; bools and floats
    are folded into text so that equality stays structural; container
    values are flattened to their compact JSON rendering.
    """
    if value is MISSING or value is MASKED:
        return value
    if value is None:
        return MISSING
    if isinstance(value, bool):  # bool is a subclass of int; check first
        return "true" if value else "false"
    if isinstance(value, (str, int)):
        return value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    raise FormatError(f"unsupported attribute value type: {type(value).__name__}")


def render_value(value: AttributeValue) -> str:
    """Human-readable rendering used in evidence citations and diagnostics."""
    if value is MISSING:
        return "<missing>"
    if value is MASKED:
        return "<masked>"
    return str(value)


class Fingerprint:
    """Immutable ordered map of attribute name to attribute value.

    Attributes explicitly set to MISSING are dropped, so "not present" and
    "present as MISSING" are the same state. Equality and hashing go through
    the canonical serialization, which sorts attributes by name and tags each
    value with its kind; two fingerprints are equal iff their canonical
    serializations are byte-equal.
    """

    __slots__ = ("_attrs", "_canonical")

    def __init__(
        self,
        attrs: Mapping[str, object] | Iterable[tuple[str, object]] = (),
    ):
        items = attrs.items() if isinstance(attrs, Mapping) else attrs
        normalized: dict[str, AttributeValue] = {}
        for name, raw in items:
            if not isinstance(name, str) or not name:
                raise FormatError(f"attribute name must be a non-empty string, got {name!r}")
            if name in normalized:
                raise FormatError(f"duplicate attribute name: {name!r}")
            value = coerce_value(raw)
            if value is MISSING:
                continue
            normalized[name] = value
        self._attrs = normalized
        self._canonical: str | None = None

    def get(self, name: str) -> AttributeValue:
        return self._attrs.get(name, MISSING)

    def names(self) -> tuple[str, ...]:
        return tuple(self._attrs)

    def items(self) -> Iterator[tuple[str, AttributeValue]]:
        return iter(self._attrs.items())

    def __contains__(self, name: str) -> bool:
        return name in self._attrs

    def __len__(self) -> int:
        return len(self._attrs)

    def canonical(self) -> str:
        if self._canonical is None:
            entries = []
            for name in sorted(self._attrs):
                value = self._attrs[name]
                if value is MASKED:
                    entries.append([name, "x"])
                elif isinstance(value, str):
                    entries.append([name, "t", value])
                else:
                    entries.append([name, "i", value])
            self._canonical = json.dumps(entries, ensure_ascii=False, separators=(",", ":"))
        return self._canonical

    def with_replacements(self, replacements: Mapping[str, AttributeValue]) -> "Fingerprint":
        """New fingerprint with the given values replacing or extending this one.

        Existing attributes keep their position; new ones are appended in the
        iteration order of `replacements`.
        """
        merged: dict[str, object] = dict(self._attrs)
        merged.update(replacements)
        return Fingerprint(merged)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={render_value(v)}" for n, v in self._attrs.items())
        return f"Fingerprint({inner})"


def int_value(value: AttributeValue) -> int | None:
    """The integer behind a value, or None when it does not parse as one."""
    if isinstance(value, bool) or value is MISSING or value is MASKED:
        return None
    if isinstance(value, int):
        return value
    text = value.strip()
    if not text:
        return None
    sign = text[1:] if text[0] == "-" else text
    if not sign.isdigit():
        return None
    return int(text)
