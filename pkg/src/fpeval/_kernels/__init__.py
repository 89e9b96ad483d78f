"""Kernel backend selection.

The sweep scoring kernel exists twice: a Cython extension built at install
time and a pure-numpy fallback. The compiled one is used when importable;
setting FPEVAL_KERNEL=python or FPEVAL_KERNEL=compiled forces a backend.
"""

from __future__ import annotations

import os

import numpy as np

from fpeval._kernels import fallback as _fallback

try:
    from fpeval._kernels import _sweepcore as _compiled
except ImportError:  # extension not built; the fallback covers everything
    _compiled = None


def active_backend() -> str:
    forced = os.environ.get("FPEVAL_KERNEL", "").strip().lower()
    if forced in ("python", "fallback"):
        return "python"
    if forced == "compiled":
        if _compiled is None:
            raise RuntimeError(
                "FPEVAL_KERNEL=compiled but the extension is not built; "
                "reinstall the package or unset the variable"
            )
        return "compiled"
    if forced:
        raise RuntimeError(f"unknown FPEVAL_KERNEL value: {forced!r}")
    return "compiled" if _compiled is not None else "python"


def score_grid(ws, hs, candidates) -> np.ndarray:
    """Score candidate (cap_w, cap_h, quant_w, quant_h) strategies.

    Returns one row (entropy_bits, pct_le_1, pct_le_10, abs_loss, pct_loss)
    per candidate, computed over the spoofed-resolution anonymity sets.
    """
    ws = np.ascontiguousarray(ws, dtype=np.int64)
    hs = np.ascontiguousarray(hs, dtype=np.int64)
    candidates = np.ascontiguousarray(candidates, dtype=np.int64)
    if candidates.ndim != 2 or candidates.shape[1] != 4:
        raise ValueError("candidates must have shape (ncand, 4)")
    if active_backend() == "compiled":
        return _compiled.score_grid(ws, hs, candidates)
    return _fallback.score_grid(ws, hs, candidates)
