"""Pure-numpy scoring kernel, used when the compiled extension is absent.

Semantics are identical to the compiled kernel: for each candidate strategy
(cap_w, cap_h, quant_w, quant_h), spoof every record's (w, h), group records
by spoofed pair, and emit (entropy_bits, pct_le_1, pct_le_10, abs_loss,
pct_loss). Spoofing per axis is v' = min(cap, max(v // q, 1) * q); per-record
loss is w*h - min(w, w')*min(h, h'), never negative.
"""

from __future__ import annotations

import numpy as np


def score_grid(ws: np.ndarray, hs: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    ws = np.ascontiguousarray(ws, dtype=np.int64)
    hs = np.ascontiguousarray(hs, dtype=np.int64)
    candidates = np.ascontiguousarray(candidates, dtype=np.int64)
    n = ws.shape[0]
    if n == 0:
        raise ValueError("score_grid needs at least one record")
    if np.any(ws < 1) or np.any(hs < 1):
        raise ValueError("screen dimensions must be >= 1")
    out = np.empty((candidates.shape[0], 5), dtype=np.float64)
    wh = ws * hs
    for idx in range(candidates.shape[0]):
        cap_w, cap_h, qw, qh = (int(v) for v in candidates[idx])
        if qw < 1 or qh < 1 or cap_w < qw or cap_h < qh:
            raise ValueError("candidate quanta must be >= 1 and <= the caps")
        mw = np.maximum(ws // qw, 1)
        mh = np.maximum(hs // qh, 1)
        wp = np.minimum(mw * qw, cap_w)
        hp = np.minimum(mh * qh, cap_h)

        ncw = -(-cap_w // qw)  # number of reachable spoofed widths
        nch = -(-cap_h // qh)
        codes = (np.minimum(mw, ncw) - 1) * nch + (np.minimum(mh, nch) - 1)
        counts = np.unique(codes, return_counts=True)[1]

        p = counts / n
        entropy = float(-(p * np.log2(p)).sum()) + 0.0
        le1 = float(counts[counts <= 1].sum()) / n
        le10 = float(counts[counts <= 10].sum()) / n

        loss = wh - np.minimum(wp, ws) * np.minimum(hp, hs)
        abs_loss = float(loss.sum()) / n
        pct_loss = float((loss / wh).sum()) / n

        out[idx, 0] = entropy
        out[idx, 1] = le1
        out[idx, 2] = le10
        out[idx, 3] = abs_loss
        out[idx, 4] = pct_loss
    return out
