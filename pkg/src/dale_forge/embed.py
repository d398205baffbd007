"""Embedding providers and vector arithmetic.

Three interchangeable providers sit behind one interface:

* ``HashedBowProvider`` — offline default. Tokens are hashed into a
  fixed-width bucket count vector, L2-normalized. Deterministic across
  processes, order-insensitive, and cheap; preserves lexical-overlap
  ordering, which is all the ranking logic needs.
* ``FileBackedProvider`` — exact-key lookup in a JSON-lines vector store.
* ``RemoteProvider`` — POST /embed against an encoder service, batched.

All providers are deterministic functions of their input text, and every
provider in one run shares one dimension.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import requests

from .corpus import tokenize
from .errors import (
    DimMismatch,
    EmptyText,
    IoError,
    KeyNotFound,
    ParseError,
    ProtocolError,
    TransportError,
    ZeroVector,
)
from .seeding import stable_bucket


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length real vector; values are always finite."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("embedding must be a non-empty 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding contains NaN or Inf")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.size)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """a.b / (|a||b|), clamped into [-1, 1] against rounding overshoot."""
    if a.dim != b.dim:
        raise DimMismatch(f"cosine over dims {a.dim} and {b.dim}")
    na = np.linalg.norm(a.values)
    nb = np.linalg.norm(b.values)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine is undefined for a zero vector")
    return float(np.clip(np.dot(a.values, b.values) / (na * nb), -1.0, 1.0))


def blend(x: EmbeddingVector, y: EmbeddingVector, lam: float) -> EmbeddingVector:
    """Elementwise ``lam * x + (1 - lam) * y``."""
    if x.dim != y.dim:
        raise DimMismatch(f"blend over dims {x.dim} and {y.dim}")
    return EmbeddingVector(lam * x.values + (1.0 - lam) * y.values)


class EmbeddingProvider:
    """Deterministic text -> vector function; subclasses set ``dim``."""

    dim: int

    def embed_text(self, text: str) -> EmbeddingVector:
        raise NotImplementedError

    def embed_many(self, texts: list[str]) -> list[EmbeddingVector]:
        return [self.embed_text(t) for t in texts]


def _require_text(text: str) -> str:
    if not text or not text.strip():
        raise EmptyText("cannot embed empty text")
    return text


class HashedBowProvider(EmbeddingProvider):
    """Hashed bag-of-words with L2 normalization.

    Tokens are lowercased before hashing so similarity does not hinge on
    capitalization. Scalar multiples collapse: "a a" and "a" embed
    identically.
    """

    def __init__(self, dim: int = 512):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self._vector = lru_cache(maxsize=65536)(self._vector_uncached)

    def _vector_uncached(self, text: str) -> tuple[float, ...]:
        counts = np.zeros(self.dim, dtype=np.float64)
        for token in tokenize(text, lowercase=True):
            counts[stable_bucket(token.text, self.dim)] += 1.0
        norm = np.linalg.norm(counts)
        if norm > 0:
            counts /= norm
        return tuple(counts)

    def embed_text(self, text: str) -> EmbeddingVector:
        return EmbeddingVector(np.array(self._vector(_require_text(text))))


class FileBackedProvider(EmbeddingProvider):
    """Exact-key vector lookup from JSON-lines {"key": ..., "vector": [...]}."""

    def __init__(self, path: str | Path):
        self._table: dict[str, np.ndarray] = {}
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoError(f"cannot read vector store {path}: {exc}") from exc
        dim: int | None = None
        for line_no, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                key = record["key"]
                vector = np.asarray(record["vector"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad vector record: {exc}", line=line_no) from exc
            if dim is None:
                dim = int(vector.size)
            elif vector.size != dim:
                raise ParseError(f"vector dim {vector.size} != {dim}", line=line_no)
            self._table[str(key)] = vector
        if dim is None:
            raise ParseError(f"vector store {path} is empty")
        self.dim = dim

    def embed_text(self, text: str) -> EmbeddingVector:
        key = _require_text(text)
        try:
            return EmbeddingVector(self._table[key])
        except KeyError:
            raise KeyNotFound(f"no stored vector for key {key!r}") from None


class RemoteProvider(EmbeddingProvider):
    """Client for the /embed wire protocol.

    Requests are batched (up to ``max_batch`` texts each) and issued
    sequentially under a lock, which keeps in-flight requests within any
    configured bound. The advertised dimension is learned from the first
    response and enforced afterwards.
    """

    def __init__(self, endpoint: str, max_batch: int = 64, timeout: float = 30.0, max_in_flight: int = 4):
        self.endpoint = endpoint.rstrip("/")
        self.max_batch = max_batch
        self.timeout = timeout
        self.max_in_flight = max_in_flight
        self.dim = 0  # learned from the first response
        self._session = requests.Session()
        self._lock = threading.Lock()

    def _post_batch(self, texts: list[str]) -> list[np.ndarray]:
        try:
            resp = self._session.post(
                f"{self.endpoint}/embed", json={"texts": texts}, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"POST /embed failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProtocolError(f"/embed returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            body = resp.json()
            vectors = [np.asarray(v, dtype=np.float64) for v in body["vectors"]]
            dim = int(body["dim"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed /embed response: {exc}") from exc
        if len(vectors) != len(texts) or any(v.size != dim for v in vectors):
            raise ProtocolError("/embed response does not match the request shape")
        if self.dim == 0:
            self.dim = dim
        elif dim != self.dim:
            raise ProtocolError(f"/embed dim changed from {self.dim} to {dim}")
        return vectors

    def embed_many(self, texts: list[str]) -> list[EmbeddingVector]:
        for t in texts:
            _require_text(t)
        out: list[np.ndarray] = []
        with self._lock:
            for i in range(0, len(texts), self.max_batch):
                out.extend(self._post_batch(texts[i : i + self.max_batch]))
        return [EmbeddingVector(v) for v in out]

    def embed_text(self, text: str) -> EmbeddingVector:
        return self.embed_many([text])[0]
