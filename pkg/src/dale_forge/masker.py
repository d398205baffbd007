"""Template construction by selective masking.

Two masking modes share one template shape:

* pretrain — occurrences of corpus-level correlated spans are ranked by
  ``cosine(span, document) / length_norm`` (shorter spans score higher),
  overlaps are resolved greedily by rank, the best occurrences are
  preserved up to a token budget, and everything else in the span set is
  collapsed to mask sentinels. A gated random draw may keep one token of a
  masked run as a reconstruction hint.
* finetune — every n-gram of the instance is scored against a blend of the
  document embedding and the label-text embedding; the top non-overlapping
  n-grams are kept up to the budget and all remaining tokens are masked.

Long templates are cut into windows no wider than the decoder budget, each
window after the first carrying a tail of the previous window's non-mask
tokens bracketed by <context> and </context>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .corpus import Document
from .embed import EmbeddingProvider, EmbeddingVector, blend, cosine
from .errors import InvalidConfig, MissingLabel, OutOfBounds, UnknownTask
from .pmi import SpanSet

LABEL_TASKS = ("multiclass", "multilabel", "ner", "mcq", "rr", "dli")
MAX_WINDOW_TOKENS = 1024
CONTEXT_OPEN = "<context>"
CONTEXT_CLOSE = "</context>"


@dataclass(frozen=True)
class ScoredSpan:
    start_token: int
    end_token: int
    surface: tuple[str, ...]
    importance: float
    length_norm: float


@dataclass(frozen=True)
class WindowSpec:
    """One decoder window: a fresh template slice plus optional carried context."""

    start_token: int
    end_token: int
    context_tokens: tuple[str, ...] = ()
    context_delimited: bool = False


@dataclass(frozen=True)
class Template:
    doc_id: str
    masked_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    mask_spans: tuple[tuple[int, int], ...]
    windows: tuple[WindowSpec, ...]

    @property
    def template_text(self) -> str:
        return " ".join(self.masked_tokens)

    @property
    def target_text(self) -> str:
        return " ".join(self.target_tokens)


def reconstruct(template: Template, mask_token: str = "<mask>") -> list[str]:
    """Substitute every mask's target span back in; must equal the target."""
    out: list[str] = []
    span_iter = iter(template.mask_spans)
    for tok in template.masked_tokens:
        if tok == mask_token:
            start, end = next(span_iter)
            out.extend(template.target_tokens[start:end])
        else:
            out.append(tok)
    return out


def rank_spans(
    doc_tokens: list[str],
    spans_in_doc: list[tuple[int, int]],
    doc_embedding: EmbeddingVector,
    provider: EmbeddingProvider,
) -> list[ScoredSpan]:
    """Score span occurrences by document affinity over normalized length.

    length_norm is the span length divided by the longest candidate length
    in this document, so equal cosines rank shorter spans higher. Ties
    break by earlier start.
    """
    if not spans_in_doc:
        raise InvalidConfig("spans_in_doc", "at least one span is required")
    n = len(doc_tokens)
    for start, end in spans_in_doc:
        if not 0 <= start < end <= n:
            raise OutOfBounds(f"span ({start}, {end}) outside document of {n} tokens")
    max_len = max(end - start for start, end in spans_in_doc)
    cos_cache: dict[str, float] = {}
    scored: list[ScoredSpan] = []
    for start, end in spans_in_doc:
        surface = tuple(doc_tokens[start:end])
        text = " ".join(surface)
        if text not in cos_cache:
            cos_cache[text] = cosine(provider.embed_text(text), doc_embedding)
        length_norm = (end - start) / max_len
        scored.append(
            ScoredSpan(
                start_token=start,
                end_token=end,
                surface=surface,
                importance=cos_cache[text] / length_norm,
                length_norm=length_norm,
            )
        )
    scored.sort(key=lambda s: (-s.importance, s.start_token, s.end_token))
    return scored


def find_occurrences(
    doc_tokens: list[str], span_set: SpanSet, lowercase: bool = False
) -> list[tuple[int, int]]:
    """All positions where a span-set n-gram occurs in the token list."""
    keys = span_set.keys()
    if not keys:
        return []
    texts = [t.lower() for t in doc_tokens] if lowercase else list(doc_tokens)
    lengths = sorted({len(k) for k in keys})
    occurrences: list[tuple[int, int]] = []
    for n in lengths:
        for start in range(len(texts) - n + 1):
            if tuple(texts[start : start + n]) in keys:
                occurrences.append((start, start + n))
    occurrences.sort()
    return occurrences


def _greedy_chain(ranked: list[tuple[int, int]], n_tokens: int) -> list[tuple[int, int]]:
    """Drop every span that overlaps a better-ranked survivor."""
    taken = np.zeros(n_tokens, dtype=bool)
    chain: list[tuple[int, int]] = []
    for start, end in ranked:
        if taken[start:end].any():
            continue
        chain.append((start, end))
        taken[start:end] = True
    return chain


def _preserve_prefix(chain: list[tuple[int, int]], budget_tokens: float) -> list[tuple[int, int]]:
    """Rank-ordered prefix of the chain whose total length fits the budget.

    Stops at the first span that would overflow; a prefix rule keeps the
    preserved token set monotone in the budget.
    """
    preserved: list[tuple[int, int]] = []
    used = 0
    for start, end in chain:
        if used + (end - start) > budget_tokens:
            break
        preserved.append((start, end))
        used += end - start
    return preserved


def _merge_touching(spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for start, end in sorted(spans):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def _assemble(
    doc_id: str,
    target: list[str],
    mask_spans: list[tuple[int, int]],
    config: PipelineConfig,
) -> Template:
    if any(tok == config.mask_token for tok in target):
        raise InvalidConfig("mask_token", "sentinel collides with a document token")
    masked: list[str] = []
    pos = 0
    for start, end in mask_spans:
        masked.extend(target[pos:start])
        masked.append(config.mask_token)
        pos = end
    masked.extend(target[pos:])
    windows = sliding_windows(masked, config.window, config.context_len, config.mask_token)
    return Template(
        doc_id=doc_id,
        masked_tokens=tuple(masked),
        target_tokens=tuple(target),
        mask_spans=tuple(mask_spans),
        windows=tuple(windows),
    )


def _apply_hints(
    runs: list[tuple[int, int]], rng: np.random.Generator, config: PipelineConfig
) -> list[tuple[int, int]]:
    """Gate each masked run on a Gaussian draw; winners keep one random token."""
    sigma = float(np.sqrt(config.mask_sigma2))
    final: list[tuple[int, int]] = []
    for start, end in runs:
        gamma = float(rng.normal(config.mask_mu, sigma))
        if gamma > config.mask_alpha:
            hint = int(rng.integers(start, end))
            if hint > start:
                final.append((start, hint))
            if hint + 1 < end:
                final.append((hint + 1, end))
        else:
            final.append((start, end))
    return final


def mask_pretrain(
    doc_tokens: list[str],
    span_set: SpanSet,
    provider: EmbeddingProvider,
    rng: np.random.Generator,
    config: PipelineConfig,
    doc_id: str = "",
) -> Template:
    """Corrupt a document by masking correlated-span occurrences.

    The highest-ranked occurrences are preserved until the next one would
    push the preserved total past ``preserve_budget`` of the document
    length; every other surviving occurrence becomes one mask sentinel.
    Touching masks merge (unless disabled), and each merged run may keep a
    single hint token. Text outside span occurrences is never masked.
    """
    if not doc_tokens:
        raise InvalidConfig("doc_tokens", "cannot mask an empty document")
    target = list(doc_tokens)
    occurrences = find_occurrences(target, span_set, lowercase=config.lowercase)
    if not occurrences:
        return _assemble(doc_id, target, [], config)

    doc_embedding = provider.embed_text(" ".join(target))
    ranked = rank_spans(target, occurrences, doc_embedding, provider)
    chain = _greedy_chain([(s.start_token, s.end_token) for s in ranked], len(target))
    preserved = set(_preserve_prefix(chain, config.preserve_budget * len(target)))
    to_mask = [span for span in chain if span not in preserved]

    if config.merge_pretrain_masks:
        runs = _merge_touching(to_mask)
    else:
        runs = sorted(to_mask)
    final_spans = _apply_hints(runs, rng, config)
    return _assemble(doc_id, target, final_spans, config)


def mask_finetune(
    doc: Document,
    provider: EmbeddingProvider,
    lambda_ft: float,
    preserve_budget: float,
    config: PipelineConfig,
) -> Template:
    """Label-conditioned masking for fine-tuning instances.

    Every within-sentence n-gram (length 1..q) is scored by cosine against
    ``lambda_ft * embed(document) + (1 - lambda_ft) * embed(label_text)``.
    The top non-overlapping n-grams are kept up to the budget; every token
    outside a kept n-gram is masked and consecutive masks merge into one.
    """
    if doc.label_text is None:
        raise MissingLabel(f"document {doc.id!r} has no label text")
    target = doc.token_texts
    if not target:
        raise InvalidConfig("doc", "cannot mask an empty document")

    anchor = blend(
        provider.embed_text(doc.text), provider.embed_text(doc.label_text), lambda_ft
    )
    score_cache: dict[str, float] = {}
    scored: list[tuple[float, int, int]] = []
    base = 0
    for sent in doc.sentences:
        length = len(sent.tokens)
        for n in range(1, config.q + 1):
            for start in range(length - n + 1):
                lo = base + start
                hi = lo + n
                text = " ".join(target[lo:hi])
                if text not in score_cache:
                    score_cache[text] = cosine(provider.embed_text(text), anchor)
                scored.append((score_cache[text], lo, hi))
        base += length
    scored.sort(key=lambda item: (-item[0], item[1], item[2] - item[1]))

    chain = _greedy_chain([(lo, hi) for _, lo, hi in scored], len(target))
    preserved = _preserve_prefix(chain, preserve_budget * len(target))

    covered = np.zeros(len(target), dtype=bool)
    for start, end in preserved:
        covered[start:end] = True
    runs: list[tuple[int, int]] = []
    i = 0
    while i < len(target):
        if not covered[i]:
            j = i
            while j < len(target) and not covered[j]:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return _assemble(doc.id, target, runs, config)


def label_text(task: str, record: dict) -> str:
    """Render an instance's gold annotation as conditioning text.

    Field conventions per task: multiclass and rr read "label", multilabel
    reads "labels" (joined by single spaces in dataset order), ner reads
    "entities" as (text, type) pairs rendered "X is a T" and joined by
    " [SEP] ", mcq reads "answer", dli reads "hypothesis".
    """
    if task not in LABEL_TASKS:
        raise UnknownTask(f"unknown task {task!r}; expected one of {LABEL_TASKS}")

    def need(field: str):
        if field not in record or record[field] is None:
            raise MissingLabel(f"task {task!r} requires field {field!r}")
        return record[field]

    if task in ("multiclass", "rr"):
        return str(need("label"))
    if task == "mcq":
        return str(need("answer"))
    if task == "dli":
        return str(need("hypothesis"))
    if task == "multilabel":
        labels = need("labels")
        if not isinstance(labels, (list, tuple)):
            raise MissingLabel('"labels" must be a list of strings')
        return " ".join(str(l) for l in labels)
    # ner
    entities = need("entities")
    if not isinstance(entities, (list, tuple)):
        raise MissingLabel('"entities" must be a list of (text, type) pairs')
    parts = []
    for ent in entities:
        if isinstance(ent, dict):
            text, etype = ent.get("text"), ent.get("label")
        else:
            text, etype = ent[0], ent[1]
        if text is None or etype is None:
            raise MissingLabel("each entity needs a text and a label")
        parts.append(f"{text} is a {etype}")
    return " [SEP] ".join(parts)


def _tail_non_mask(tokens: list[str], k: int, mask_token: str) -> list[str]:
    if k <= 0:
        return []
    tail: list[str] = []
    for tok in reversed(tokens):
        if tok == mask_token:
            continue
        tail.append(tok)
        if len(tail) == k:
            break
    tail.reverse()
    return tail


def sliding_windows(
    template_tokens: list[str],
    window: int,
    context_len: int,
    mask_token: str = "<mask>",
) -> list[WindowSpec]:
    """Tile a template into decoder-sized windows with carried context.

    The first window is the leading ``window`` tokens. Every later window
    starts with up to ``context_len`` non-mask tokens from the previous
    window's fresh slice, wrapped in context delimiters, then fills the
    remaining capacity with fresh tokens. Fresh slices tile the template
    exactly once.
    """
    if window < 1 or window > MAX_WINDOW_TOKENS:
        raise InvalidConfig("window", f"must be in [1, {MAX_WINDOW_TOKENS}]")
    if context_len < 0 or context_len + 2 >= window:
        raise InvalidConfig("context_len", "context plus delimiters must fit inside the window")
    n = len(template_tokens)
    if n == 0:
        return []
    windows = [WindowSpec(start_token=0, end_token=min(window, n))]
    pos = windows[0].end_token
    while pos < n:
        prev = windows[-1]
        context = _tail_non_mask(
            list(template_tokens[prev.start_token : prev.end_token]), context_len, mask_token
        )
        capacity = window - len(context) - 2
        if capacity < 1:
            raise InvalidConfig("context_len", "carried context leaves no room for fresh tokens")
        end = min(pos + capacity, n)
        windows.append(
            WindowSpec(
                start_token=pos,
                end_token=end,
                context_tokens=tuple(context),
                context_delimited=True,
            )
        )
        pos = end
    return windows


def window_text(template_tokens: list[str] | tuple[str, ...], spec: WindowSpec) -> str:
    """Materialize one window as the string sent to a generation backend."""
    tokens: list[str] = []
    if spec.context_delimited:
        tokens.append(CONTEXT_OPEN)
        tokens.extend(spec.context_tokens)
        tokens.append(CONTEXT_CLOSE)
    tokens.extend(template_tokens[spec.start_token : spec.end_token])
    return " ".join(tokens)
