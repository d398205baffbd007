"""Service configuration.

Model identities are configuration, not code. Built-in offline model ids
use a scheme prefix:

    hashed:<dim>   deterministic hashed bag-of-words encoder
    sampler:       seeded mask-filling generator
    unigram:       Laplace-smoothed unigram perplexity scorer

Any other id is treated as a transformers checkpoint and loaded lazily
(requires the optional [models] extra and the weights being available).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ServiceConfig:
    embed_model_id: str = "hashed:512"
    gen_model_id: str = "sampler:"
    score_model_id: str | None = "unigram:"
    port: int = 8763
    max_batch: int = 64
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if not 0 < self.port < 65536:
            raise ValueError("port must be a valid TCP port")
