"""Bipartite record linkage between two duplicate-free datafiles.

The package links the records of two files under the constraint that every
record refers to at most one record of the other file.  Two estimation
routes are provided: a mixture-model baseline fitted by EM with a three-way
link / review / non-link decision rule, and a Bayesian route that samples
bipartite matchings from their posterior and turns the posterior into point
estimates through additive loss functions with an optional rejection
(clerical review) decision.
"""

from .core import (
    DataFile,
    FieldSchema,
    FilePair,
    LabelingError,
    MatchingLabeling,
    MatchingMatrix,
    labeling_to_matrix,
    load_datafile,
    write_datafile,
    matrix_to_labeling,
    overlap_size,
)
from .comparison import (
    BlockingSpec,
    ComparatorSpec,
    ComparisonConfigError,
    ComparisonData,
    MISSING_LEVEL,
    build_comparison_data,
    candidate_pair_count,
    compare_field,
    modified_levenshtein,
    normalized_levenshtein,
)
from .fs import (
    EMFit,
    FSDecisions,
    FSRuleConfig,
    PhiParams,
    WeightMatrix,
    composite_weight,
    em_fit,
    fs_decision_rule,
    mle_matching,
    weight_matrix,
)
from .bayes import (
    ExactPosterior,
    PosteriorSummary,
    PriorConfig,
    SufficientStats,
    exact_posterior,
    marginal_log_posterior,
    prior_log_pmf,
    run_gibbs,
    sample_label,
    sample_phi,
)
from .estimators import (
    CrossTab,
    LinkageEstimate,
    LossConfig,
    LossRegimeError,
    NON_LINK,
    REJECT,
    bayes_estimate_general,
    bayes_full,
    bayes_partial,
    crosstab,
    expected_loss,
    total_expected_loss,
)
from .evaluation import (
    EvalReport,
    OverlapSummary,
    geweke_z,
    overlap_summary,
    score_full,
    score_partial,
)
from .synth import CorruptionKind, GeneratorConfig, corrupt_value, generate_pair

__version__ = "0.1.0"

__all__ = [
    "BlockingSpec",
    "ComparatorSpec",
    "ComparisonConfigError",
    "ComparisonData",
    "CorruptionKind",
    "CrossTab",
    "DataFile",
    "EMFit",
    "EvalReport",
    "ExactPosterior",
    "FSDecisions",
    "FSRuleConfig",
    "FieldSchema",
    "FilePair",
    "GeneratorConfig",
    "LabelingError",
    "LinkageEstimate",
    "LossConfig",
    "LossRegimeError",
    "MISSING_LEVEL",
    "MatchingLabeling",
    "MatchingMatrix",
    "NON_LINK",
    "OverlapSummary",
    "PhiParams",
    "PosteriorSummary",
    "PriorConfig",
    "REJECT",
    "SufficientStats",
    "WeightMatrix",
    "bayes_estimate_general",
    "bayes_full",
    "bayes_partial",
    "build_comparison_data",
    "candidate_pair_count",
    "compare_field",
    "composite_weight",
    "corrupt_value",
    "crosstab",
    "em_fit",
    "exact_posterior",
    "expected_loss",
    "fs_decision_rule",
    "generate_pair",
    "geweke_z",
    "labeling_to_matrix",
    "load_datafile",
    "marginal_log_posterior",
    "matrix_to_labeling",
    "mle_matching",
    "modified_levenshtein",
    "normalized_levenshtein",
    "overlap_size",
    "overlap_summary",
    "prior_log_pmf",
    "run_gibbs",
    "sample_label",
    "sample_phi",
    "score_full",
    "score_partial",
    "total_expected_loss",
    "weight_matrix",
    "write_datafile",
]
