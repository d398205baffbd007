"""Correlated span extraction from n-gram statistics.

An n-gram's association score is the minimum, over all ways of cutting it
into two or more contiguous parts, of ``log(p(ngram) / prod(p(part)))``.
Probabilities are per-length window frequencies: a length-k segment's
probability is its count divided by the number of length-k windows in the
corpus, so every probability stays in (0, 1].

Rare n-grams (often one-off entities) are suppressed by multiplying the
score by ``log f / (log c + log f)``, where c is a per-length frequency
cutoff taken as a percentile of that length's frequency distribution. The
multiplier is 0 at f=1, exactly 1/2 at f=c, and increases monotonically
with f.

Reference cutoffs observed on public legal corpora at their chosen
percentiles, for n = 3..7 (reproducible only with those corpora on disk;
kept here as documentation, not asserted by tests):

    MAUD @ 75th percentile ............................ 57, 43, 38, 36, 34
    Reddit r/legaladvice(+offtopic) @ 75th ............ 6, 3, 2, 1, 1
    U.S. Board of Veterans' Appeals @ 95th ............ 20, 10, 6, 5, 4
    U.S. Supreme Court Oral Arguments @ 95th .......... 27, 19, 12, 8, 5
    Edgar Contracts @ 95th ............................ 13, 9, 7, 6, 5
    Caselaw @ 95th .................................... 10, 5, 3, 3, 2
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .config import PipelineConfig
from .corpus import Corpus
from .errors import DegenerateProbability, EmptyDistribution, InvalidConfig, IoError, MissingStat, ParseError

NgramKey = tuple[str, ...]


@dataclass(frozen=True)
class NgramStats:
    key: NgramKey
    frequency: int
    probability: float


@dataclass(frozen=True)
class SpanCandidate:
    key: NgramKey
    pmi: float
    discounted_pmi: float
    frequency: int


@dataclass(frozen=True)
class SpanSet:
    """Selected spans, most preferred first, plus the per-length cutoffs used."""

    spans: tuple[SpanCandidate, ...]
    cutoffs_used: dict[int, int]

    def keys(self) -> set[NgramKey]:
        return {s.key for s in self.spans}

    def __len__(self) -> int:
        return len(self.spans)


def _sentence_token_lists(corpus: Corpus, lowercase: bool) -> Iterable[list[str]]:
    for doc in corpus.documents:
        for sent in doc.sentences:
            texts = [t.text for t in sent.tokens]
            yield [t.lower() for t in texts] if lowercase else texts


def count_windows(corpus: Corpus, q: int, min_n: int = 1, lowercase: bool = False) -> Counter:
    """Count every contiguous within-sentence window of length min_n..q.

    Counts are additive across shards: counting disjoint sub-corpora and
    summing the counters equals counting the whole corpus.
    """
    if q < 2:
        raise InvalidConfig("q", "span length ceiling must be >= 2")
    counts: Counter = Counter()
    for tokens in _sentence_token_lists(corpus, lowercase):
        ln = len(tokens)
        for n in range(min_n, q + 1):
            for start in range(ln - n + 1):
                counts[tuple(tokens[start : start + n])] += 1
    return counts


def count_ngrams(corpus: Corpus, q: int, lowercase: bool = False) -> dict[NgramKey, int]:
    """Frequencies of all within-sentence n-grams with 2 <= n <= q."""
    return dict(count_windows(corpus, q, min_n=2, lowercase=lowercase))


def merge_counts(*shards: Mapping[NgramKey, int]) -> Counter:
    """Sum per-shard counts; exact equivalent of single-pass counting."""
    merged: Counter = Counter()
    for shard in shards:
        merged.update(shard)
    return merged


def window_totals(corpus: Corpus, q: int) -> dict[int, int]:
    """N_k = number of length-k within-sentence windows, for k = 1..q."""
    totals = {k: 0 for k in range(1, q + 1)}
    for doc in corpus.documents:
        for sent in doc.sentences:
            ln = len(sent.tokens)
            for k in range(1, q + 1):
                totals[k] += max(0, ln - k + 1)
    return totals


def window_probabilities(
    counts: Mapping[NgramKey, int], totals: Mapping[int, int]
) -> dict[NgramKey, float]:
    """Per-length normalization: p(segment) = count / N_len(segment)."""
    probs: dict[NgramKey, float] = {}
    for key, freq in counts.items():
        total = totals.get(len(key), 0)
        if total <= 0:
            raise DegenerateProbability(f"no windows of length {len(key)} were counted")
        probs[key] = freq / total
    return probs


def _log_prob(key: NgramKey, stats: Mapping[NgramKey, float]) -> float:
    try:
        p = stats[key]
    except KeyError:
        raise MissingStat(f"no probability for segment {' '.join(key)!r}") from None
    if p <= 0:
        raise DegenerateProbability(f"probability of {' '.join(key)!r} is {p}")
    return math.log(p)


def pmi_score(key: NgramKey, stats: Mapping[NgramKey, float]) -> float:
    """Minimum log-ratio of the span probability to any multi-part factorization.

    ``stats`` must map every contiguous sub-segment of ``key`` (unigrams
    included) to a probability. Computed as ``log p(key)`` minus the maximum,
    over contiguous segmentations into at least two parts, of the summed part
    log-probabilities; the maximum is found by dynamic programming over split
    points.
    """
    n = len(key)
    if n < 2:
        raise InvalidConfig("key", "PMI is defined for n-grams of length >= 2")
    lp = {}
    for i in range(n):
        for j in range(i + 1, n + 1):
            lp[(i, j)] = _log_prob(key[i:j], stats)

    # best[i] = max over segmentations of key[i:] into >= 1 parts of the
    # summed part log-probabilities.
    best = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        best[i] = max(lp[(i, j)] + best[j] for j in range(i + 1, n + 1))
    # Force >= 2 parts: choose the first part explicitly.
    best_multi = max(lp[(0, j)] + best[j] for j in range(1, n))
    return lp[(0, n)] - best_multi


def discount(pmi: float, frequency: int, c: int) -> float:
    """Rare-span penalty: ``pmi * log f / (log c + log f)``; zero at f = 1."""
    if c < 2:
        raise InvalidConfig("c", "frequency cutoff must be >= 2")
    if frequency < 1:
        raise InvalidConfig("frequency", "must be >= 1")
    log_f = math.log(frequency)
    return pmi * (log_f / (math.log(c) + log_f))


def compute_cutoff(freq_distribution: Iterable[int], pc: float) -> int:
    """Nearest-rank pc-th percentile of the frequencies, floored at 2."""
    freqs = sorted(freq_distribution)
    if not freqs:
        raise EmptyDistribution("cannot take a percentile of an empty distribution")
    if not 0 <= pc <= 100:
        raise InvalidConfig("pc_percentile", "must be in [0, 100]")
    rank = max(1, math.ceil(pc / 100.0 * len(freqs)))
    return max(2, freqs[rank - 1])


def build_span_set(
    corpus: Corpus, config: PipelineConfig, counts: Mapping[NgramKey, int] | None = None
) -> SpanSet:
    """Score every within-sentence n-gram and keep the top j% by discounted score.

    Candidates of each length share a frequency cutoff computed from that
    length's own distribution at ``pc_percentile``. All lengths are pooled
    before ranking. Direction ``highest`` (default) prefers strong
    collocations; ``lowest`` prefers the opposite end of the scale. Ties
    break by higher frequency, then lexicographic key.

    ``counts`` may carry precomputed window counts (unigrams included), e.g.
    merged from shards counted in parallel.
    """
    if not corpus.documents:
        raise InvalidConfig("corpus", "cannot build a span set from an empty corpus")
    if counts is None:
        counts = count_windows(corpus, config.q, min_n=1, lowercase=config.lowercase)
    totals = window_totals(corpus, config.q)
    probs = window_probabilities(counts, totals)

    cutoffs: dict[int, int] = {}
    by_length: dict[int, list[NgramKey]] = {}
    for key in counts:
        if len(key) >= 2:
            by_length.setdefault(len(key), []).append(key)
    for n, keys in by_length.items():
        cutoffs[n] = compute_cutoff((counts[k] for k in keys), config.pc_percentile)

    candidates: list[SpanCandidate] = []
    for n, keys in by_length.items():
        c = cutoffs[n]
        for key in keys:
            raw = pmi_score(key, probs)
            freq = counts[key]
            candidates.append(
                SpanCandidate(key=key, pmi=raw, discounted_pmi=discount(raw, freq, c), frequency=freq)
            )

    reverse = config.ranking_direction == "highest"
    candidates.sort(key=lambda s: (-s.discounted_pmi if reverse else s.discounted_pmi, -s.frequency, s.key))
    keep = math.ceil(config.j_percent / 100.0 * len(candidates))
    return SpanSet(spans=tuple(candidates[:keep]), cutoffs_used=dict(sorted(cutoffs.items())))


def save_span_set(span_set: SpanSet, path: str | Path) -> None:
    """One span per JSON line: {"tokens": [...], "freq": N, "pmi": x, "dpmi": y}."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for span in span_set.spans:
                fh.write(
                    json.dumps(
                        {
                            "tokens": list(span.key),
                            "freq": span.frequency,
                            "pmi": span.pmi,
                            "dpmi": span.discounted_pmi,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    except OSError as exc:
        raise IoError(f"cannot write span set {path}: {exc}") from exc


def load_span_set(path: str | Path) -> SpanSet:
    """Inverse of save_span_set; cutoffs are not stored per line and load empty."""
    spans: list[SpanCandidate] = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read span set {path}: {exc}") from exc
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc
        try:
            spans.append(
                SpanCandidate(
                    key=tuple(record["tokens"]),
                    pmi=float(record["pmi"]),
                    discounted_pmi=float(record["dpmi"]),
                    frequency=int(record["freq"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad span record: {exc}", line=line_no) from exc
    return SpanSet(spans=tuple(spans), cutoffs_used={})
