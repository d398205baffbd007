"""Central, validated home for every pipeline hyperparameter.

A config is loaded from a flat ``key = value`` text file (TOML-style scalars:
ints, floats, booleans, double-quoted strings, ``#`` comments). Unspecified
keys keep their defaults, so an empty file reproduces the reference
hyperparameter setting exactly. CLI flags override file values, which
override defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .errors import InvalidConfig, IoError, ParseError

RANKING_DIRECTIONS = ("highest", "lowest")
_MASKED_RUN_GAUSSIAN = ("mask_mu", "mask_sigma2", "mask_alpha")


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob the pipeline reads, in one auditable place.

    Defaults reproduce the reference setting: spans up to 7 tokens, top 50%
    of candidates kept, 95th-percentile frequency cutoff, context/label
    blend weights 0.7/0.5, context gate N(0.5, 0.7) vs 0.3, hint gate
    N(0.4, 0.6) vs 0.4, 20% preserve budget, 1024-token output budget and
    window, 5 augmentation rounds.
    """

    q: int = 7
    j_percent: float = 50.0
    pc_percentile: float = 95.0
    ranking_direction: str = "highest"
    lambda_context: float = 0.7
    lambda_finetune: float = 0.5
    ctx_mu: float = 0.5
    ctx_sigma2: float = 0.7
    ctx_beta: float = 0.3
    mask_mu: float = 0.4
    mask_sigma2: float = 0.6
    mask_alpha: float = 0.4
    preserve_budget: float = 0.20
    output_budget_tokens: int = 1024
    window: int = 1024
    context_len: int = 64
    rounds: int = 5
    seed: int = 0
    embed_dim: int = 512
    mask_token: str = "<mask>"
    # operational switches
    lowercase: bool = False
    merge_pretrain_masks: bool = True
    fixed_template: bool = False
    damping: float = 0.85
    pagerank_tol: float = 1e-8
    pagerank_max_iter: int = 200
    num_beams: int = 4
    temperature: float = 1.0
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.q < 2:
            raise InvalidConfig("q", "span length ceiling must be >= 2")
        if not 0 < self.j_percent <= 100:
            raise InvalidConfig("j_percent", "must be in (0, 100]")
        if not 0 <= self.pc_percentile <= 100:
            raise InvalidConfig("pc_percentile", "must be in [0, 100]")
        if self.ranking_direction not in RANKING_DIRECTIONS:
            raise InvalidConfig("ranking_direction", f"must be one of {RANKING_DIRECTIONS}")
        for key in ("lambda_context", "lambda_finetune"):
            if not 0 <= getattr(self, key) <= 1:
                raise InvalidConfig(key, "must be in [0, 1]")
        for key in ("ctx_sigma2", "mask_sigma2"):
            if getattr(self, key) <= 0:
                raise InvalidConfig(key, "variance must be positive")
        if not 0 < self.preserve_budget <= 1:
            raise InvalidConfig("preserve_budget", "must be in (0, 1]")
        if self.output_budget_tokens < 1:
            raise InvalidConfig("output_budget_tokens", "must be >= 1")
        if self.window > self.output_budget_tokens:
            raise InvalidConfig("window", "must not exceed output_budget_tokens")
        if self.window < 1:
            raise InvalidConfig("window", "must be >= 1")
        if self.context_len < 0:
            raise InvalidConfig("context_len", "must be >= 0")
        if self.context_len + 2 >= self.window:
            raise InvalidConfig("context_len", "context plus delimiters must leave room in the window")
        if self.rounds < 1:
            raise InvalidConfig("rounds", "must be >= 1")
        if self.embed_dim < 1:
            raise InvalidConfig("embed_dim", "must be >= 1")
        if not self.mask_token:
            raise InvalidConfig("mask_token", "must be non-empty")
        if not 0 < self.damping < 1:
            raise InvalidConfig("damping", "must be in (0, 1)")
        if self.pagerank_tol <= 0:
            raise InvalidConfig("pagerank_tol", "must be positive")
        if self.pagerank_max_iter < 1:
            raise InvalidConfig("pagerank_max_iter", "must be >= 1")
        if self.num_beams < 1:
            raise InvalidConfig("num_beams", "must be >= 1")
        if self.temperature <= 0:
            raise InvalidConfig("temperature", "must be positive")
        if self.max_in_flight < 1:
            raise InvalidConfig("max_in_flight", "must be >= 1")

    def replace(self, **overrides: Any) -> "PipelineConfig":
        """New config with the given fields changed; revalidates everything."""
        return dataclasses.replace(self, **overrides)


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _parse_scalar(raw: str, line_no: int) -> Any:
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"cannot parse value {raw!r}", line=line_no)


def _coerce(key: str, value: Any) -> Any:
    """Allow ints where floats are declared; reject other type drift."""
    declared = _FIELD_TYPES[key]
    if declared == "float" and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if declared == "int" and (isinstance(value, bool) or not isinstance(value, int)):
        raise InvalidConfig(key, f"expected an integer, got {value!r}")
    if declared == "float" and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise InvalidConfig(key, f"expected a number, got {value!r}")
    if declared == "bool" and not isinstance(value, bool):
        raise InvalidConfig(key, f"expected true/false, got {value!r}")
    if declared == "str" and not isinstance(value, str):
        raise InvalidConfig(key, f"expected a quoted string, got {value!r}")
    return value


def load_config(path: str | Path, overrides: dict[str, Any] | None = None) -> PipelineConfig:
    """Load a flat key = value config file; unknown keys are rejected.

    ``overrides`` (typically CLI flags) are applied on top of file values.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    values: dict[str, Any] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value', got {stripped!r}", line=line_no)
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise InvalidConfig(key, "unknown config key")
        values[key] = _coerce(key, _parse_scalar(raw, line_no))
    if overrides:
        for key, value in overrides.items():
            if key not in _FIELD_TYPES:
                raise InvalidConfig(key, "unknown config key")
            values[key] = _coerce(key, value)
    return PipelineConfig(**values)


def save_config(config: PipelineConfig, path: str | Path) -> None:
    """Write every field as ``key = value``, one per line."""
    lines = []
    for f in fields(PipelineConfig):
        value = getattr(config, f.name)
        if isinstance(value, bool):
            rendered = "true" if value else "false"
        elif isinstance(value, str):
            rendered = f'"{value}"'
        else:
            rendered = repr(value)
        lines.append(f"{f.name} = {rendered}")
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write config {path}: {exc}") from exc


def config_hash(config: PipelineConfig) -> str:
    """Hex digest of the effective config, for run manifests."""
    canonical = json.dumps(dataclasses.asdict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
