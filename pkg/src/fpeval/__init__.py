"""Evaluation toolkit for anti-fingerprinting privacy tools.

Infers per-attribute mask models from paired observation logs, applies them
counterfactually to fingerprint datasets, computes anonymity and
trackability metrics, runs popularity-adjusted subsampling, and searches the
design space of screen-resolution spoofing strategies.
"""

from fpeval.dataset import (
    Dataset,
    Record,
    SanitizeReport,
    dedupe_by_cookie,
    load_dataset,
    sanitize,
    save_dataset,
    split_by_browser,
)
from fpeval.fingerprint import MASKED, MISSING, Fingerprint
from fpeval.hybrid import (
    FullMask,
    HybridReport,
    MapFunction,
    apply_mask,
    evaluate_all,
    evaluate_pet,
)
from fpeval.maskinfer import (
    MaskModel,
    Observation,
    ObservationLog,
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
)
from fpeval.metrics import (
    AnonymitySetDistribution,
    TrackabilityReport,
    anonymity_sets,
    effectiveness,
    entropy,
    pct_le,
    trackability,
)
from fpeval.popsample import (
    PopularityEntry,
    SampledEstimate,
    load_popularity_table,
    popularity_evaluate,
)
from fpeval.resolution import (
    SpoofStrategy,
    StrategyScore,
    TOR_STRATEGY,
    pareto_improvements,
    score_strategy,
    spoof,
    strategy_sets,
    sweep,
)
from fpeval.syngen import (
    AttributeSpec,
    CorpusSpec,
    generate_corpus,
    generate_log,
    preset_corpus_spec,
)

__version__ = "0.1.0"

__all__ = [
    "AnonymitySetDistribution",
    "AttributeSpec",
    "CorpusSpec",
    "Dataset",
    "Fingerprint",
    "FullMask",
    "HybridReport",
    "MASKED",
    "MISSING",
    "MapFunction",
    "MaskModel",
    "Observation",
    "ObservationLog",
    "PopularityEntry",
    "Record",
    "SampledEstimate",
    "SanitizeReport",
    "SpoofStrategy",
    "StatParams",
    "StrategyScore",
    "TOR_STRATEGY",
    "TrackabilityReport",
    "Verdict",
    "anonymity_sets",
    "apply_mask",
    "baseline_varies",
    "classify",
    "dedupe_by_cookie",
    "effectiveness",
    "entropy",
    "evaluate_all",
    "evaluate_pet",
    "generate_corpus",
    "generate_log",
    "infer_model",
    "load_dataset",
    "load_mask_model",
    "load_observation_log",
    "load_popularity_table",
    "pareto_improvements",
    "pct_le",
    "popularity_evaluate",
    "preset_corpus_spec",
    "rank_preorder",
    "sanitize",
    "save_dataset",
    "save_mask_model",
    "save_observation_log",
    "score_strategy",
    "split_by_browser",
    "spoof",
    "strategy_sets",
    "sweep",
    "trackability",
]
