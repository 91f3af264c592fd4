"""Detect, quantify and neutralize superficial single-token cues in
two-alternative choice datasets."""

from .corpus import (
    ALT1,
    ALT2,
    QUESTIONS,
    Dataset,
    Instance,
    MirrorPairing,
    SplitAssignment,
    infer_mirror_pairing,
    infer_self_pairing,
    load_dataset,
    parse_copa_xml,
    parse_jsonl,
    serialize,
    split_train_valid,
    subsample_pairs,
)
from .cues import (
    BalanceReport,
    BalanceViolation,
    CueAuditReport,
    GuidelineReport,
    GuidelineThresholds,
    TokenStats,
    compute_cue_stats,
    guideline_check,
    verify_balance,
)
from .errors import (
    CorpusFormatError,
    CuecheckError,
    MirrorAmbiguityError,
    TrainingDivergedError,
    ValidationError,
)
from .frozen import (
    EmbeddingSet,
    FrozenModel,
    FrozenReport,
    FrozenSelection,
    evaluate_frozen,
    load_embeddings,
    predict_frozen,
    save_embeddings,
    train_frozen,
)
from .pmi import (
    CooccurrenceTable,
    PmiDecision,
    build_cooccurrence,
    build_cooccurrence_sharded,
    default_stopwords,
    floor_value,
    load_stopwords,
    load_table,
    merge_tables,
    pmi,
    pmi_solve,
    save_table,
)
from .scorer import (
    BuiltSequence,
    ScorerHyper,
    ScorerModel,
    SensitivityDelta,
    SensitivityResult,
    TokenSensitivity,
    build_sequence,
    cue_sensitivity,
    grad_check,
    init_model,
    input_gradients,
    load_model,
    position_scores,
    predict_scorer,
    save_model,
    score,
    sensitivity,
    sensitivity_delta,
    train_scorer,
)
from .solvers import (
    Choice,
    EasyHardSplit,
    FrequencyTable,
    ObliviousHyper,
    ObliviousModel,
    PredictionSet,
    easy_hard_split,
    fit_direction,
    merge_prediction_sets,
    predict,
    predict_dataset,
    train_oblivious,
    wordfreq_solve,
)
from .stats import (
    AccuracyReport,
    ARTestResult,
    RatingsMatrix,
    accuracy,
    approx_randomization_test,
    fleiss_kappa,
    format_accuracy,
)
from .tokenizer import DEFAULT_CONFIG, TokenizerConfig, token_set, tokenize

__version__ = "0.1.0"

__all__ = [
    "ALT1",
    "ALT2",
    "ARTestResult",
    "AccuracyReport",
    "BalanceReport",
    "BalanceViolation",
    "BuiltSequence",
    "Choice",
    "CooccurrenceTable",
    "CorpusFormatError",
    "CueAuditReport",
    "CuecheckError",
    "DEFAULT_CONFIG",
    "Dataset",
    "EasyHardSplit",
    "EmbeddingSet",
    "FrequencyTable",
    "FrozenModel",
    "FrozenReport",
    "FrozenSelection",
    "GuidelineReport",
    "GuidelineThresholds",
    "Instance",
    "MirrorAmbiguityError",
    "MirrorPairing",
    "ObliviousHyper",
    "ObliviousModel",
    "PmiDecision",
    "PredictionSet",
    "QUESTIONS",
    "RatingsMatrix",
    "ScorerHyper",
    "ScorerModel",
    "SensitivityDelta",
    "SensitivityResult",
    "SplitAssignment",
    "TokenSensitivity",
    "TokenStats",
    "TokenizerConfig",
    "TrainingDivergedError",
    "ValidationError",
    "accuracy",
    "approx_randomization_test",
    "build_cooccurrence",
    "build_cooccurrence_sharded",
    "build_sequence",
    "compute_cue_stats",
    "cue_sensitivity",
    "default_stopwords",
    "easy_hard_split",
    "evaluate_frozen",
    "fit_direction",
    "fleiss_kappa",
    "floor_value",
    "format_accuracy",
    "grad_check",
    "guideline_check",
    "infer_mirror_pairing",
    "infer_self_pairing",
    "init_model",
    "input_gradients",
    "load_dataset",
    "load_embeddings",
    "load_model",
    "load_stopwords",
    "load_table",
    "merge_prediction_sets",
    "merge_tables",
    "parse_copa_xml",
    "parse_jsonl",
    "pmi",
    "pmi_solve",
    "position_scores",
    "predict",
    "predict_dataset",
    "predict_frozen",
    "predict_scorer",
    "save_embeddings",
    "save_model",
    "save_table",
    "score",
    "sensitivity",
    "sensitivity_delta",
    "serialize",
    "split_train_valid",
    "subsample_pairs",
    "token_set",
    "tokenize",
    "train_frozen",
    "train_oblivious",
    "train_scorer",
    "verify_balance",
    "wordfreq_solve",
]
