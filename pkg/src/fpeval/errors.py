"""Exception hierarchy shared across the package."""

from __future__ import annotations


class FpevalError(Exception):
    """Base class for every error this package raises on purpose."""


class FormatError(FpevalError, ValueError):
    """A file or value does not conform to one of the documented formats."""


class DataError(FpevalError, ValueError):
    """An operation received data outside its domain (e.g. an empty dataset)."""


class AttributeNotObservedError(FpevalError, LookupError):
    """The requested attribute never appears in the observation log."""


class InsufficientDataError(FpevalError, ValueError):
    """The observation log lacks the paired platforms needed to classify."""


class ConfigurationError(FpevalError, ValueError):
    """Inconsistent caller-supplied configuration (models, transforms, flags)."""


class SampleTooLargeError(FpevalError, ValueError):
    """Requested sample size exceeds the dataset; the evaluation is skipped."""


class MissingResolutionError(FpevalError, ValueError):
    """Records lack a parseable screen resolution; indices are listed."""

    def __init__(self, record_indices: list[int]):
        self.record_indices = list(record_indices)
        shown = ", ".join(str(i) for i in self.record_indices[:10])
        more = "" if len(self.record_indices) <= 10 else ", ..."
        super().__init__(
            f"{len(self.record_indices)} record(s) lack a parseable positive "
            f"screen resolution: indices [{shown}{more}]"
        )


class SpecError(FpevalError, ValueError):
    """A generator spec is invalid or unsatisfiable."""
