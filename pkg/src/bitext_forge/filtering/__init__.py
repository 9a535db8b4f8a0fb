"""Ten-feature sentence-pair filtering."""

from bitext_forge.filtering.config import FilterConfig
from bitext_forge.filtering.engine import (
    FEATURE_IDS,
    BatchResult,
    FilterEngine,
    FilterVerdict,
    apply_filters,
    check_features,
    compute_features,
)
from bitext_forge.filtering.features import (
    PairFeatures,
    SideFeatures,
    levenshtein,
    mismatched_numbers,
    poisson_length_logprob,
    side_features,
    split_words,
)
from bitext_forge.filtering.whitelist import CharWhitelist, build_whitelists, union_whitelist, whitelist_for

__all__ = [
    "FEATURE_IDS",
    "BatchResult",
    "CharWhitelist",
    "FilterConfig",
    "FilterEngine",
    "FilterVerdict",
    "PairFeatures",
    "SideFeatures",
    "apply_filters",
    "build_whitelists",
    "check_features",
    "compute_features",
    "levenshtein",
    "mismatched_numbers",
    "poisson_length_logprob",
    "side_features",
    "split_words",
    "union_whitelist",
    "whitelist_for",
]
