"""dale-forge: corpus-to-template toolkit for denoising-style augmentation.

The pipeline, end to end: count within-sentence n-grams and keep the
strongest collocations by discounted association score; pick the most
informative sentences of each document with PageRank under a token budget;
corrupt documents into masked templates (span-level for pretraining,
label-conditioned for fine-tuning); and drive a generation backend for R
rounds per instance, stitching windowed outputs and scoring the result
set's diversity.
"""

from .config import PipelineConfig, config_hash, load_config, save_config
from .corpus import Corpus, Document, Sentence, Token, load_corpus, save_corpus, tokenize
from .embed import (
    EmbeddingProvider,
    EmbeddingVector,
    FileBackedProvider,
    HashedBowProvider,
    RemoteProvider,
    blend,
    cosine,
)
from .pmi import (
    SpanCandidate,
    SpanSet,
    build_span_set,
    compute_cutoff,
    count_ngrams,
    discount,
    pmi_score,
)
from .contextsel import SelectionResult, SimilarityGraph, build_similarity_graph, pagerank, select_context
from .masker import (
    ScoredSpan,
    Template,
    WindowSpec,
    label_text,
    mask_finetune,
    mask_pretrain,
    rank_spans,
    sliding_windows,
)
from .augment import (
    AugmentationSet,
    EchoBackend,
    GenerationBackend,
    QualityReport,
    RemoteBackend,
    diversity_metrics,
    emit_training_file,
    generate_augmentations,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "config_hash",
    "load_config",
    "save_config",
    "Corpus",
    "Document",
    "Sentence",
    "Token",
    "load_corpus",
    "save_corpus",
    "tokenize",
    "EmbeddingProvider",
    "EmbeddingVector",
    "FileBackedProvider",
    "HashedBowProvider",
    "RemoteProvider",
    "blend",
    "cosine",
    "SpanCandidate",
    "SpanSet",
    "build_span_set",
    "compute_cutoff",
    "count_ngrams",
    "discount",
    "pmi_score",
    "SelectionResult",
    "SimilarityGraph",
    "build_similarity_graph",
    "pagerank",
    "select_context",
    "ScoredSpan",
    "Template",
    "WindowSpec",
    "label_text",
    "mask_finetune",
    "mask_pretrain",
    "rank_spans",
    "sliding_windows",
    "AugmentationSet",
    "EchoBackend",
    "GenerationBackend",
    "QualityReport",
    "RemoteBackend",
    "diversity_metrics",
    "emit_training_file",
    "generate_augmentations",
]
