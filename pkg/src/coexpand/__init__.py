"""Co-expansion of typed entity sets over corpus-level embeddings.

The pipeline has four file-separated stages: occurrence indexing over a
corpus, per-occurrence embedding (an external program), aggregation into
one embedding per entity, and iterative multi-set expansion with
precision@K evaluation against gold labels.
"""

from .corpus_io import (
    CandidateEntity,
    EntityCatalog,
    GoldLabels,
    SeedSet,
    SeedSpec,
    build_catalog,
    canonicalize,
    iter_corpus,
    load_candidates,
    load_gold,
    load_seeds,
)
from .engine import (
    EntitySet,
    ExpansionState,
    matched_set,
    run_coexpansion,
    score_against_sets,
    select_topk,
    set_similarity,
)
from .errors import DataError, UsageError
from .evaluation import EvalReport, precision_at_k
from .indexer import MultiPatternMatcher, index_corpus, split_sentences
from .store import EmbeddingStore, aggregate, build_store, cosine
from .synth import generate_synthetic_fixtures

__all__ = [
    "CandidateEntity",
    "DataError",
    "EmbeddingStore",
    "EntityCatalog",
    "EntitySet",
    "EvalReport",
    "ExpansionState",
    "GoldLabels",
    "MultiPatternMatcher",
    "SeedSet",
    "SeedSpec",
    "UsageError",
    "aggregate",
    "build_catalog",
    "build_store",
    "canonicalize",
    "cosine",
    "generate_synthetic_fixtures",
    "index_corpus",
    "iter_corpus",
    "load_candidates",
    "load_gold",
    "load_seeds",
    "matched_set",
    "precision_at_k",
    "run_coexpansion",
    "score_against_sets",
    "select_topk",
    "set_similarity",
    "split_sentences",
]

__version__ = "0.1.0"
