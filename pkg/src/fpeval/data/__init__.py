"""Bundled mask-model artifacts."""

from __future__ import annotations

import json
from importlib import resources

from fpeval.errors import ConfigurationError
from fpeval.maskinfer import MaskModel, mask_model_from_json_obj

_BUILTIN_MODELS = {
    # Handcrafted full-standardization model with screen attributes meant to
    # be driven by a spoofing strategy (see fpeval.resolution).
    "tor-firefox": "tor_mask_firefox.json",
}


def builtin_model_names() -> tuple[str, ...]:
    return tuple(sorted(_BUILTIN_MODELS))


def load_builtin_model(name: str) -> MaskModel:
    try:
        filename = _BUILTIN_MODELS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown builtin model {name!r}; available: {', '.join(builtin_model_names())}"
        ) from None
    text = resources.files(__package__).joinpath(filename).read_text(encoding="utf-8")
    return mask_model_from_json_obj(json.loads(text), source=f"builtin:{name}")
