"""Independent reference implementations used to cross-check the library.

These deliberately take the dumbest correct path: exhaustive enumeration
for segmentation scoring and a dense eigenvector solve for PageRank, so
they share no code path with the implementations they check.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_force_pmi(key: tuple[str, ...], probs: dict[tuple[str, ...], float]) -> float:
    """Enumerate every contiguous segmentation into >= 2 parts explicitly."""
    n = len(key)
    best = math.inf
    positions = list(range(1, n))
    for r in range(1, n):
        for cuts in itertools.combinations(positions, r):
            bounds = (0, *cuts, n)
            parts = [key[bounds[i] : bounds[i + 1]] for i in range(len(bounds) - 1)]
            denom = math.prod(probs[p] for p in parts)
            best = min(best, math.log(probs[key] / denom))
    return best


def eigen_pagerank(weights: np.ndarray, damping: float) -> np.ndarray:
    """Stationary distribution of the Google matrix via a dense eigensolve."""
    w = np.array(weights, dtype=np.float64)
    n = w.shape[0]
    np.fill_diagonal(w, 0.0)
    row_sums = w.sum(axis=1)
    transition = np.full((n, n), 1.0 / n)
    nz = row_sums > 0
    transition[nz] = w[nz] / row_sums[nz, None]
    google = damping * transition + (1.0 - damping) / n
    eigvals, eigvecs = np.linalg.eig(google.T)
    idx = int(np.argmin(np.abs(eigvals - 1.0)))
    vec = np.real(eigvecs[:, idx])
    vec = np.abs(vec)
    return vec / vec.sum()


def random_corpus_text(rng: np.random.Generator, max_tokens: int, vocab_size: int = 8) -> str:
    """Whitespace-joined tokens forming a few sentences, <= max_tokens total."""
    vocab = [f"w{i}" for i in range(vocab_size)]
    total = int(rng.integers(2, max_tokens + 1))
    parts: list[str] = []
    start_of_sentence = True
    while len(parts) < total:
        word = vocab[int(rng.integers(0, vocab_size))]
        parts.append(word.capitalize() if start_of_sentence else word)
        start_of_sentence = False
        # close a sentence now and then, leaving room for one more word
        if len(parts) < total - 1 and rng.random() < 0.1:
            parts.append(".")
            start_of_sentence = True
    return " ".join(parts)
