"""Model backends behind the three endpoints.

Each backend family has a cheap deterministic built-in so the service runs
with no weights on disk, plus a transformers-backed variant selected by
passing a checkpoint id. Built-ins are seeded-deterministic: identical
inputs (and seed, for generation) produce identical outputs across
processes.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter

import numpy as np

MASK_TOKEN = "<mask>"
CONTEXT_OPEN = "<context>"
CONTEXT_CLOSE = "</context>"

# vocabulary for the built-in mask filler; intentionally distinctive words so
# infills register as novel tokens in downstream diversity measurements
FILL_VOCAB = (
    "notwithstanding consideration hereinafter covenant forthwith thereunder "
    "pursuant aforesaid stipulation heretofore indemnification severability "
    "recital estoppel novation abeyance surety appurtenant"
).split()

# reference text for the built-in unigram scorer
_REFERENCE_TEXT = (
    "this agreement shall be governed by the laws of the state and each party "
    "shall remain bound by the terms set forth herein until terminated the "
    "parties agree that all payments are due upon notice and that any dispute "
    "shall be resolved by a court of competent jurisdiction"
)


def _stable_seed(*parts: str | int) -> int:
    digest = hashlib.blake2b("\x1f".join(str(p) for p in parts).encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


class HashedEncoder:
    """L2-normalized hashed bag-of-words; dim comes from the model id."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim

    def encode(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            vector = np.zeros(self.dim, dtype=np.float64)
            for token in text.lower().split():
                digest = hashlib.blake2b(token.encode(), digest_size=8).digest()
                vector[int.from_bytes(digest, "big") % self.dim] += 1.0
            norm = np.linalg.norm(vector)
            if norm > 0:
                vector /= norm
            out.append([float(x) for x in vector])
        return out


class TransformersEncoder:
    """Mean-pooled last hidden state of any transformers checkpoint."""

    def __init__(self, model_id: str, device: str = "cpu"):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModel.from_pretrained(model_id).to(device).eval()
        self.device = device
        self.dim = int(self.model.config.hidden_size)

    def encode(self, texts: list[str]) -> list[list[float]]:
        torch = self._torch
        with torch.no_grad():
            batch = self.tokenizer(
                texts, padding=True, truncation=True, return_tensors="pt"
            ).to(self.device)
            hidden = self.model(**batch).last_hidden_state
            mask = batch["attention_mask"].unsqueeze(-1)
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)
        return [[float(x) for x in row] for row in pooled.cpu()]


class SeededFillGenerator:
    """Replaces each mask sentinel with 1-3 sampled filler words.

    The sample stream is seeded by (seed, template), so identical requests
    reproduce bit-identical outputs while different seeds diversify.
    Carried-context framing is echoed back untouched; temperature widens
    the per-mask word count spread, beam count is accepted for protocol
    compatibility.
    """

    def generate(self, template: str, num_beams: int, temperature: float, seed: int) -> str:
        rng = np.random.default_rng(_stable_seed(seed, template))
        max_words = 1 + min(4, max(1, round(2 * temperature)))
        out: list[str] = []
        for token in template.split():
            if token == MASK_TOKEN:
                count = int(rng.integers(1, max_words + 1))
                for _ in range(count):
                    out.append(FILL_VOCAB[int(rng.integers(0, len(FILL_VOCAB)))])
            else:
                out.append(token)
        return " ".join(out)


class TransformersGenerator:
    """Seq2seq generation with beam search and seeded multinomial sampling."""

    def __init__(self, model_id: str, device: str = "cpu"):
        import torch
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(model_id).to(device).eval()
        self.device = device

    def generate(self, template: str, num_beams: int, temperature: float, seed: int) -> str:
        torch = self._torch
        torch.manual_seed(seed)
        inputs = self.tokenizer(template, return_tensors="pt", truncation=True).to(self.device)
        with torch.no_grad():
            output = self.model.generate(
                **inputs,
                num_beams=num_beams,
                do_sample=True,
                temperature=temperature,
                max_new_tokens=1024,
            )
        return self.tokenizer.decode(output[0], skip_special_tokens=True)


class UnigramScorer:
    """exp(mean token negative log-likelihood) under a smoothed unigram LM."""

    def __init__(self, reference_text: str = _REFERENCE_TEXT):
        tokens = reference_text.lower().split()
        self.counts = Counter(tokens)
        self.total = len(tokens)
        self.vocab = len(self.counts)

    def perplexity(self, text: str) -> float:
        tokens = text.lower().split()
        if not tokens:
            return float(self.total + self.vocab + 1)
        nll = 0.0
        for token in tokens:
            p = (self.counts.get(token, 0) + 1) / (self.total + self.vocab + 1)
            nll -= math.log(p)
        return math.exp(nll / len(tokens))


class TransformersScorer:
    """Perplexity under a causal LM checkpoint."""

    def __init__(self, model_id: str, device: str = "cpu"):
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id).to(device).eval()
        self.device = device

    def perplexity(self, text: str) -> float:
        torch = self._torch
        inputs = self.tokenizer(text, return_tensors="pt", truncation=True).to(self.device)
        with torch.no_grad():
            loss = self.model(**inputs, labels=inputs["input_ids"]).loss
        return float(torch.exp(loss))


def build_encoder(model_id: str, device: str):
    if model_id.startswith("hashed:"):
        return HashedEncoder(int(model_id.split(":", 1)[1] or 512))
    return TransformersEncoder(model_id, device)


def build_generator(model_id: str, device: str):
    if model_id.startswith("sampler:"):
        return SeededFillGenerator()
    return TransformersGenerator(model_id, device)


def build_scorer(model_id: str | None, device: str):
    if model_id is None:
        return None
    if model_id.startswith("unigram:"):
        return UnigramScorer()
    return TransformersScorer(model_id, device)
