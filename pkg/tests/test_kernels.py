from __future__ import annotations

import numpy as np
import pytest

from fpeval import _kernels
from fpeval._kernels import fallback


def random_inputs(seed: int, n: int = 400):
    rng = np.random.default_rng(seed)
    ws = rng.integers(1, 4000, size=n).astype(np.int64)
    hs = rng.integers(1, 3000, size=n).astype(np.int64)
    candidates = np.column_stack(
        [
            rng.integers(500, 2000, size=30),
            rng.integers(500, 2000, size=30),
            rng.integers(1, 400, size=30),
            rng.integers(1, 300, size=30),
        ]
    ).astype(np.int64)
    return ws, hs, candidates


def test_backend_selection_env(monkeypatch):
    monkeypatch.setenv("FPEVAL_KERNEL", "python")
    assert _kernels.active_backend() == "python"
    monkeypatch.setenv("FPEVAL_KERNEL", "bogus")
    with pytest.raises(RuntimeError):
        _kernels.active_backend()
    monkeypatch.delenv("FPEVAL_KERNEL")
    assert _kernels.active_backend() in ("compiled", "python")


@pytest.mark.skipif(_kernels._compiled is None, reason="extension not built")
def test_compiled_matches_fallback():
    for seed in range(5):
        ws, hs, candidates = random_inputs(seed)
        compiled = _kernels._compiled.score_grid(ws, hs, candidates)
        pure = fallback.score_grid(ws, hs, candidates)
        np.testing.assert_allclose(compiled, pure, rtol=1e-12, atol=1e-12)
        # integer-exact columns agree bitwise
        np.testing.assert_array_equal(compiled[:, 1], pure[:, 1])
        np.testing.assert_array_equal(compiled[:, 2], pure[:, 2])
        np.testing.assert_array_equal(compiled[:, 3], pure[:, 3])


def test_single_record():
    ws = np.array([150], dtype=np.int64)
    hs = np.array([50], dtype=np.int64)
    candidates = np.array([[1000, 1000, 200, 100]], dtype=np.int64)
    out = _kernels.score_grid(ws, hs, candidates)
    # sub-quantum record spoofs up to (200, 100); loss floors at zero
    assert out[0, 0] == 0.0  # one set -> zero bits
    assert out[0, 1] == 1.0
    assert out[0, 2] == 1.0
    assert out[0, 3] == 0.0
    assert out[0, 4] == 0.0


def test_empty_input_rejected():
    empty = np.array([], dtype=np.int64)
    candidates = np.array([[1000, 1000, 200, 100]], dtype=np.int64)
    with pytest.raises(ValueError):
        _kernels.score_grid(empty, empty, candidates)


def test_bad_candidate_rejected():
    ws = np.array([100], dtype=np.int64)
    hs = np.array([100], dtype=np.int64)
    bad = np.array([[100, 100, 200, 1]], dtype=np.int64)  # quantum > cap
    with pytest.raises(ValueError):
        _kernels.score_grid(ws, hs, bad)
