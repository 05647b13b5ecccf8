"""lexshift: detect and causally attribute shifts in word usage over time."""

from .corpus import (
    Document,
    FrequencySeries,
    PreprocessConfig,
    build_frequency_series,
    preprocess,
    preprocess_text,
)
from .didreg import DidDataset, DidPosterior, PriorSpec, build_design, sample_posterior, summarize
from .embeddings import EmbeddingStore
from .gptscore import (
    ContrastiveCell,
    GptScore,
    SaturationError,
    compute_lor,
    doc_probability,
    gpt_score,
    log_odds,
    vocabulary_filter,
)
from .simharness import AdoptionScenario, WordSpec, evaluate_pipeline, simulate_series
from .stemming import porter_stem
from .syncontrol import (
    DonorPool,
    PlaceboOutcome,
    SyntheticFit,
    fit_weights,
    in_time_placebo,
    mspe_ratio,
    placebo_test,
    select_donors_random,
    select_donors_synonym,
    select_donors_untreated,
)

__version__ = "0.1.0"
