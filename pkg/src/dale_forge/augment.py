"""Generation-time orchestration: rounds, window stitching, quality metrics.

Each round corrupts the source instance into a fresh fine-tune-style
template, sends every window to a generation backend with round-specific
seeds, strips the carried-context prefix from each window's output, and
concatenates the fresh parts into one augmentation. The echo backend makes
the whole loop runnable offline: it returns its input with every mask
sentinel deleted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import requests

from .config import PipelineConfig
from .corpus import Corpus, Document
from .embed import EmbeddingProvider, HashedBowProvider
from .errors import (
    BackendError,
    InvalidConfig,
    IoError,
    MalformedOutput,
    MissingLabel,
    ProtocolError,
    UnknownSource,
)
from .masker import Template, mask_finetune, window_text
from .seeding import derive_seed


@dataclass(frozen=True)
class AugmentationSet:
    source_id: str
    augmentations: tuple[str, ...]
    label_text: str


@dataclass(frozen=True)
class QualityReport:
    diversity: float
    length_diversity: float
    perplexity: float | None = None


class GenerationBackend:
    """One template in, one generated string out."""

    kind = "abstract"

    def generate(self, template: str, num_beams: int, temperature: float, seed: int) -> str:
        raise NotImplementedError


class EchoBackend(GenerationBackend):
    """Deterministic stub: the template with every mask sentinel deleted."""

    kind = "echo"

    def __init__(self, mask_token: str = "<mask>"):
        self.mask_token = mask_token

    def generate(self, template: str, num_beams: int, temperature: float, seed: int) -> str:
        return " ".join(tok for tok in template.split() if tok != self.mask_token)


class RemoteBackend(GenerationBackend):
    """Client for the /generate wire protocol."""

    kind = "remote"

    def __init__(self, endpoint: str, timeout: float = 120.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def generate(self, template: str, num_beams: int, temperature: float, seed: int) -> str:
        payload = {
            "template": template,
            "num_beams": num_beams,
            "temperature": temperature,
            "seed": seed,
        }
        try:
            resp = self._session.post(
                f"{self.endpoint}/generate", json=payload, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise BackendError(f"POST /generate failed: {exc}") from exc
        if resp.status_code != 200:
            raise BackendError(f"/generate returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return str(resp.json()["output"])
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendError(f"malformed /generate response: {exc}") from exc


def strip_context_prefix(output: str) -> str:
    """Drop a leading <context> ... </context> block from a window's output.

    An unterminated block counts entirely as context (nothing fresh).
    """
    tokens = output.split()
    if tokens and tokens[0] == "<context>":
        if "</context>" not in tokens:
            return ""
        tokens = tokens[tokens.index("</context>") + 1 :]
    return " ".join(tokens)


def generate_one(
    template: Template,
    backend: GenerationBackend,
    config: PipelineConfig,
    seed: int,
) -> str:
    """Run every window of a template through the backend and stitch the parts."""
    parts: list[str] = []
    for w_index, spec in enumerate(template.windows):
        prompt = window_text(template.masked_tokens, spec)
        output = backend.generate(
            prompt,
            num_beams=config.num_beams,
            temperature=config.temperature,
            seed=derive_seed(seed, "window", w_index),
        )
        if prompt and not output:
            raise MalformedOutput(
                f"backend returned empty output for non-empty window {w_index} of {template.doc_id!r}"
            )
        stripped = strip_context_prefix(output)
        if stripped:
            parts.append(stripped)
    return " ".join(parts)


def generate_augmentations(
    doc: Document,
    backend: GenerationBackend,
    masker_config: PipelineConfig,
    R: int,
    rng_seed: int,
    provider: EmbeddingProvider | None = None,
) -> AugmentationSet:
    """Produce R augmentations for one labeled document.

    The template is rebuilt per round (round-seeded) unless the config pins
    ``fixed_template``; the backend always receives round-specific seeds so
    sampling-based generators diversify across rounds. The source label is
    copied onto the result verbatim.
    """
    if R < 1:
        raise InvalidConfig("R", "at least one augmentation round is required")
    if doc.label_text is None:
        raise MissingLabel(f"document {doc.id!r} has no label text")
    provider = provider or HashedBowProvider(masker_config.embed_dim)

    fixed: Template | None = None
    if masker_config.fixed_template:
        fixed = mask_finetune(
            doc,
            provider,
            masker_config.lambda_finetune,
            masker_config.preserve_budget,
            masker_config,
        )
    rounds: list[str] = []
    for r in range(R):
        template = fixed if fixed is not None else mask_finetune(
            doc,
            provider,
            masker_config.lambda_finetune,
            masker_config.preserve_budget,
            masker_config,
        )
        round_seed = derive_seed(rng_seed, doc.id, "round", r)
        rounds.append(generate_one(template, backend, masker_config, round_seed))
    return AugmentationSet(
        source_id=doc.id, augmentations=tuple(rounds), label_text=doc.label_text
    )


def diversity_metrics(
    source: list[str],
    augs: list[list[str]],
    scorer: Callable[[str], float] | None = None,
) -> QualityReport:
    """Vocabulary novelty and length drift of augmentations against their source.

    diversity — mean count of token types present in an augmentation but
    absent from the source. length_diversity — mean absolute token-count
    difference. perplexity is filled only when a scorer is supplied.
    """
    if not augs:
        raise InvalidConfig("augs", "at least one augmentation is required")
    source_vocab = set(source)
    new_counts = [len(set(aug) - source_vocab) for aug in augs]
    length_deltas = [abs(len(aug) - len(source)) for aug in augs]
    perplexity = None
    if scorer is not None:
        perplexity = float(
            sum(scorer(" ".join(aug)) for aug in augs) / len(augs)
        )
    return QualityReport(
        diversity=sum(new_counts) / len(augs),
        length_diversity=sum(length_deltas) / len(augs),
        perplexity=perplexity,
    )


def remote_scorer(endpoint: str, timeout: float = 60.0) -> Callable[[str], float]:
    """Perplexity scorer over the /score wire protocol."""
    session = requests.Session()
    endpoint = endpoint.rstrip("/")

    def score(text: str) -> float:
        try:
            resp = session.post(f"{endpoint}/score", json={"text": text}, timeout=timeout)
        except requests.RequestException as exc:
            raise BackendError(f"POST /score failed: {exc}") from exc
        if resp.status_code != 200:
            raise BackendError(f"/score returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return float(resp.json()["perplexity"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed /score response: {exc}") from exc

    return score


def emit_training_file(
    gold: Corpus, aug_sets: list[AugmentationSet], path: str | Path, emit_tokens: bool = False
) -> tuple[int, int]:
    """Write gold records followed by augmentations tagged origin="dale".

    Every augmentation record carries its source's label verbatim plus a
    "source_id" back-reference. Returns (gold_count, aug_count).
    """
    ids = {doc.id for doc in gold.documents}
    for aug_set in aug_sets:
        if aug_set.source_id not in ids:
            raise UnknownSource(f"augmentation source {aug_set.source_id!r} not in gold corpus")
    gold_count = 0
    aug_count = 0
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for doc in gold.documents:
                record: dict = {"id": doc.id, "text": doc.text}
                if doc.label_text is not None:
                    record["label"] = doc.label_text
                if emit_tokens:
                    record["tokens"] = doc.token_texts
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                gold_count += 1
            for aug_set in aug_sets:
                for r, text in enumerate(aug_set.augmentations, start=1):
                    record = {
                        "id": f"{aug_set.source_id}-aug{r}",
                        "text": text,
                        "label": aug_set.label_text,
                        "origin": "dale",
                        "source_id": aug_set.source_id,
                    }
                    if emit_tokens:
                        record["tokens"] = text.split()
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                    aug_count += 1
    except OSError as exc:
        raise IoError(f"cannot write training file {path}: {exc}") from exc
    return gold_count, aug_count
