from __future__ import annotations

import pytest

from fpeval.errors import AttributeNotObservedError, FormatError, InsufficientDataError
from fpeval.maskinfer import (
    MaskModel,
    StatParams,
    Verdict,
    baseline_varies,
    classify,
    infer_model,
    load_mask_model,
    load_observation_log,
    rank_preorder,
    save_mask_model,
    save_observation_log,
    standardization_ruled_out,
)

from conftest import build_log, constant_pair_log


def k_value_log(k: int, platforms: int = 6, pet: str = "tool") -> "ObservationLog":
    """Baseline spread over k distinct values; tool mirrors the baseline."""
    baseline = {
        f"p{i}": {"attr": f"v{min(i, k - 1)}"} for i in range(platforms)
    }
    return constant_pair_log(baseline, {pet: baseline})


def test_standardization_rule_defaults():
    params = StatParams()
    assert not standardization_ruled_out(1, params)  # 0.25 > 0.1
    assert standardization_ruled_out(2, params)  # 0.0625 <= 0.1


def test_baseline_varies_cross_platform_difference_is_not_variation():
    log = constant_pair_log(
        {"p0": {"attr": "a"}, "p1": {"attr": "b"}},
        {"t": {"p0": {"attr": "a"}, "p1": {"attr": "b"}}},
    )
    assert not baseline_varies(log, "attr")


def test_baseline_varies_within_reload_epochs():
    log = build_log(
        [
            ("p0", "baseline", "reload", 0, {"attr": "v"}),
            ("p0", "baseline", "reload", 1, {"attr": "v"}),
            ("p0", "baseline", "reload", 2, {"attr": "w"}),
        ]
    )
    assert baseline_varies(log, "attr")


def test_baseline_varies_unknown_attribute():
    log = k_value_log(1)
    with pytest.raises(AttributeNotObservedError):
        baseline_varies(log, "nope")


def test_classify_k1_inconclusive_k2_unmasked():
    v1 = classify(k_value_log(1), "tool", "attr")
    assert v1.status == "inconclusive_insufficient_diversity"
    v2 = classify(k_value_log(2), "tool", "attr")
    assert v2.status == "unmasked"
    assert v2.confidence == 0.1


def test_classify_truth_table_f_half():
    params = StatParams(impact_fraction=0.5, alpha=0.1)
    for k in range(1, 4):
        assert classify(k_value_log(k), "tool", "attr", params).status == (
            "inconclusive_insufficient_diversity"
        )
    for k in range(4, 8):
        assert classify(k_value_log(k), "tool", "attr", params).status == "unmasked"


def test_classify_masked_vary_precedence_over_standardization():
    # tool varies on p0 AND standardizes on p1; variation wins
    log = build_log(
        [
            ("p0", "baseline", "reload", 0, {"attr": "v"}),
            ("p0", "baseline", "reload", 1, {"attr": "v"}),
            ("p1", "baseline", "reload", 0, {"attr": "w"}),
            ("p1", "baseline", "reload", 1, {"attr": "w"}),
            ("p0", "pet:t", "reload", 0, {"attr": "x"}),
            ("p0", "pet:t", "reload", 1, {"attr": "y"}),
            ("p1", "pet:t", "reload", 0, {"attr": "std"}),
            ("p1", "pet:t", "reload", 1, {"attr": "std"}),
        ]
    )
    assert classify(log, "t", "attr").status == "masked_vary"


def test_classify_baseline_variation_beats_everything():
    log = build_log(
        [
            ("p0", "baseline", "reload", 0, {"attr": "v"}),
            ("p0", "baseline", "reload", 1, {"attr": "w"}),
            ("p0", "pet:t", "reload", 0, {"attr": "x"}),
            ("p0", "pet:t", "reload", 1, {"attr": "y"}),
        ]
    )
    assert classify(log, "t", "attr").status == "inconclusive_baseline_varies"


def test_classify_partial_standardization_single_platform():
    baseline = {f"p{i}": {"attr": f"v{i}"} for i in range(6)}
    pet = {f"p{i}": {"attr": f"v{i}"} for i in range(6)}
    pet["p3"] = {"attr": "spoofed"}
    log = constant_pair_log(baseline, {"t": pet})
    verdict = classify(log, "t", "attr")
    assert verdict.status == "masked_standardize"
    assert "p3" in (verdict.reason or "")


def test_classify_missing_on_pet_side_is_standardization():
    baseline = {"p0": {"attr": "v", "other": "x"}, "p1": {"attr": "v", "other": "x"}}
    pet = {"p0": {"other": "x"}, "p1": {"other": "x"}}  # attr suppressed
    log = constant_pair_log(baseline, {"t": pet})
    assert classify(log, "t", "attr").status == "masked_standardize"


def test_classify_no_paired_platforms():
    log = build_log(
        [
            ("p0", "baseline", "reload", 0, {"attr": "v"}),
            ("p0", "baseline", "reload", 1, {"attr": "v"}),
            ("p1", "pet:t", "reload", 0, {"attr": "v"}),
            ("p1", "pet:t", "reload", 1, {"attr": "v"}),
        ]
    )
    with pytest.raises(InsufficientDataError):
        classify(log, "t", "attr")


def test_classify_monotone_in_new_distinct_values():
    params = StatParams()
    for k in range(2, 8):
        assert classify(k_value_log(k), "tool", "attr", params).status == "unmasked"


def test_infer_model_null_tool_all_unmasked():
    baseline = {
        "p0": {"a": "x0", "b": "y0"},
        "p1": {"a": "x1", "b": "y1"},
    }
    log = constant_pair_log(baseline, {"null": baseline})
    model = infer_model(log, "null")
    assert set(model.verdicts) == {"a", "b"}
    assert all(v.status == "unmasked" for v in model.verdicts.values())
    assert all(v.confidence == 0.1 for v in model.verdicts.values())


def test_infer_model_contains_errors_per_attribute():
    log = build_log(
        [
            ("p0", "baseline", "reload", 0, {"a": "v"}),
            ("p0", "baseline", "reload", 1, {"a": "v"}),
            ("p1", "pet:t", "reload", 0, {"a": "v"}),
            ("p1", "pet:t", "reload", 1, {"a": "v"}),
        ]
    )
    model = infer_model(log, "t")
    assert model.verdicts["a"].status == "inconclusive_insufficient_diversity"
    assert "classification failed" in (model.verdicts["a"].reason or "")


def test_unmasked_verdict_requires_confidence():
    with pytest.raises(FormatError):
        Verdict(status="unmasked")


def test_rank_preorder_subset_and_antichain():
    def model(pet: str, masked: list[str], universe: list[str]) -> MaskModel:
        verdicts = {
            a: Verdict(status="masked_standardize")
            if a in masked
            else Verdict(status="unmasked", confidence=0.1)
            for a in universe
        }
        return MaskModel(pet=pet, params=StatParams(), verdicts=verdicts)

    universe = ["a", "b"]
    ranking = rank_preorder(
        [model("big", ["a", "b"], universe), model("small", ["a"], universe)]
    )
    assert ("big", "small") in ranking.dominates
    assert ("small", "big") not in ranking.dominates
    assert ranking.masked_counts == {"big": 2, "small": 1}

    ranking = rank_preorder([model("x", ["a"], universe), model("y", ["b"], universe)])
    pairs = set(ranking.dominates)
    assert ("x", "y") not in pairs and ("y", "x") not in pairs
    assert ("x", "x") in pairs and ("y", "y") in pairs  # reflexive


def test_rank_preorder_equivalence_classes():
    def model(pet: str, masked: list[str]) -> MaskModel:
        verdicts = {a: Verdict(status="masked_vary") for a in masked}
        return MaskModel(pet=pet, params=StatParams(), verdicts=verdicts)

    ranking = rank_preorder([model("x", ["a"]), model("y", ["a"]), model("z", [])])
    assert ("x", "y") in ranking.equivalence_classes
    assert ("z",) in ranking.equivalence_classes


def test_rank_preorder_transitive():
    def model(pet: str, masked: list[str]) -> MaskModel:
        verdicts = {a: Verdict(status="masked_vary") for a in masked}
        return MaskModel(pet=pet, params=StatParams(), verdicts=verdicts)

    ranking = rank_preorder(
        [model("a", ["x", "y", "z"]), model("b", ["x", "y"]), model("c", ["x"])]
    )
    pairs = set(ranking.dominates)
    for upper, lower in list(pairs):
        for other_upper, other_lower in list(pairs):
            if lower == other_upper:
                assert (upper, other_lower) in pairs


def test_model_file_round_trip(tmp_path):
    verdicts = {
        "a": Verdict(status="masked_vary", reason="saw it move"),
        "b": Verdict(status="unmasked", confidence=0.1),
        "c": Verdict(status="inconclusive_insufficient_diversity", reason="k=1"),
    }
    model = MaskModel(
        pet="tool", params=StatParams(0.5, 0.05), verdicts=verdicts, browser="firefox"
    )
    path = tmp_path / "m.json"
    save_mask_model(model, path)
    loaded = load_mask_model(path)
    assert loaded.pet == "tool"
    assert loaded.browser == "firefox"
    assert loaded.params == StatParams(0.5, 0.05)
    assert {a: v.status for a, v in loaded.verdicts.items()} == {
        a: v.status for a, v in verdicts.items()
    }


def test_log_file_round_trip_and_inference_determinism(tmp_path):
    log = k_value_log(3)
    path = tmp_path / "log.jsonl"
    save_observation_log(log, path)
    reloaded = load_observation_log(path)
    first = infer_model(reloaded, "tool")
    second = infer_model(load_observation_log(path), "tool")
    assert {a: v.status for a, v in first.verdicts.items()} == {
        a: v.status for a, v in second.verdicts.items()
    }
    assert first.verdict_signature() == second.verdict_signature()


def test_planted_noise_flags_only_that_attribute():
    from fpeval.syngen import generate_log

    log, _ = generate_log(
        pets=[
            (
                "tool",
                {
                    "noisy": "inconclusive_baseline_varies",
                    "quiet_a": "unmasked",
                    "quiet_b": "masked_standardize",
                },
            )
        ],
        platforms=3,
        epochs_per_boundary=3,
        seed=8,
    )
    assert baseline_varies(log, "noisy")
    assert not baseline_varies(log, "quiet_a")
    assert not baseline_varies(log, "quiet_b")
