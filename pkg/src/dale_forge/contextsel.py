"""Context selection for long documents.

Sentences are ranked by PageRank over a similarity graph: edge (i, j) is
the cosine between sentence i's embedding and a blend of sentence j's
embedding with the whole-document embedding, so sentences that agree with
both their peers and the document as a whole collect mass. The top-ranked
sentences are kept greedily within the output token budget and re-emitted
in the document's original order.

The whole step is gated: a Gaussian draw must clear a threshold, otherwise
the fallback is plain leading-sentence truncation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .corpus import Document, Token
from .embed import EmbeddingProvider, EmbeddingVector, blend, cosine
from .errors import InvalidConfig, NonConvergenceWarning


@dataclass(frozen=True)
class SimilarityGraph:
    """Dense pairwise sentence scores; diagonal is zero (no self-loops)."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True)
class SelectionResult:
    kept_sentence_indices: tuple[int, ...]
    token_count: int
    applied: bool


def sentence_text(tokens: tuple[Token, ...] | list[Token]) -> str:
    return " ".join(t.text for t in tokens)


def build_similarity_graph(
    doc: Document, provider: EmbeddingProvider, lam: float
) -> SimilarityGraph:
    """weight(i, j) = cosine(e_i, lam * e_j + (1 - lam) * e_doc), clamped at 0.

    The blend makes the graph asymmetric by construction. Negative cosines
    are clamped to zero so downstream PageRank sees nonnegative transition
    weights.
    """
    if not doc.sentences:
        raise InvalidConfig("doc", "cannot build a similarity graph for an empty document")
    sent_vecs = provider.embed_many([sentence_text(s.tokens) for s in doc.sentences])
    doc_vec = provider.embed_text(doc.text)
    n = len(sent_vecs)
    weights = np.zeros((n, n), dtype=np.float64)
    blended = [blend(v, doc_vec, lam) for v in sent_vecs]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            weights[i, j] = max(0.0, cosine(sent_vecs[i], blended[j]))
    return SimilarityGraph(weights=weights)


def pagerank(
    graph: SimilarityGraph,
    damping: float = 0.85,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> list[float]:
    """Weighted PageRank by power iteration.

    Rows are normalized into transition probabilities; all-zero (dangling)
    rows redistribute uniformly. Iterates ``r <- (1-d)/n + d * P^T r`` from
    the uniform vector until the L1 change drops below ``tol``. If
    ``max_iter`` is hit first, a NonConvergenceWarning is emitted and the
    last iterate is returned. Scores are nonnegative and sum to 1.
    """
    if not 0 < damping < 1:
        raise InvalidConfig("damping", "must be in (0, 1)")
    n = graph.n
    if n == 0:
        raise InvalidConfig("graph", "empty graph")
    if n == 1:
        return [1.0]
    w = np.array(graph.weights, dtype=np.float64)
    np.fill_diagonal(w, 0.0)
    if np.any(w < 0):
        raise InvalidConfig("graph", "weights must be nonnegative")
    row_sums = w.sum(axis=1)
    transition = np.full((n, n), 1.0 / n)
    nonzero = row_sums > 0
    transition[nonzero] = w[nonzero] / row_sums[nonzero, None]

    rank = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    for _ in range(max_iter):
        updated = base + damping * (transition.T @ rank)
        if np.abs(updated - rank).sum() < tol:
            rank = updated
            break
        rank = updated
    else:
        warnings.warn(
            f"PageRank did not reach tol={tol} within {max_iter} iterations",
            NonConvergenceWarning,
        )
    return [float(x) for x in rank]


def select_context(
    doc: Document,
    scores: list[float],
    budget_tokens: int,
    rng: np.random.Generator,
    mu: float,
    sigma2: float,
    beta: float,
) -> SelectionResult:
    """Keep the highest-scoring sentences that fit the budget, in document order.

    One draw from N(mu, sigma2) decides whether ranked selection applies at
    all; at or below ``beta`` the result is the longest leading run of
    sentences that fits the budget instead. When selection applies,
    sentences are taken in descending score order, each skipped if it would
    overflow the budget, and kept indices are reported ascending.
    """
    if budget_tokens < 1:
        raise InvalidConfig("budget_tokens", "must be >= 1")
    if len(scores) != len(doc.sentences):
        raise InvalidConfig("scores", "one score per sentence required")
    lengths = [len(s.tokens) for s in doc.sentences]

    eps = float(rng.normal(mu, float(np.sqrt(sigma2))))
    if eps <= beta:
        kept: list[int] = []
        used = 0
        for i, ln in enumerate(lengths):
            if used + ln > budget_tokens:
                break
            kept.append(i)
            used += ln
        return SelectionResult(kept_sentence_indices=tuple(kept), token_count=used, applied=False)

    order = np.argsort(np.negative(np.asarray(scores, dtype=np.float64)), kind="stable")
    kept = []
    used = 0
    for i in order:
        ln = lengths[int(i)]
        if used + ln > budget_tokens:
            continue
        kept.append(int(i))
        used += ln
    kept.sort()
    return SelectionResult(kept_sentence_indices=tuple(kept), token_count=used, applied=True)


def selected_tokens(doc: Document, result: SelectionResult) -> list[Token]:
    """Materialize the selected sentences as one token list, document order."""
    out: list[Token] = []
    for idx in result.kept_sentence_indices:
        out.extend(doc.sentences[idx].tokens)
    return out
