"""FastAPI application exposing /embed, /generate, /score, /healthz.

Wire contracts:

    POST /embed    {"texts": [str, ...]} -> {"vectors": [[float, ...], ...], "dim": N}
    POST /generate {"template": str, "num_beams": int, "temperature": float,
                    "seed": int} -> {"output": str}
    POST /score    {"text": str} -> {"perplexity": float}
    GET  /healthz  -> {"status": "ok", "dim": N}

Malformed bodies answer 400, an empty text list answers 422, and every
endpoint answers 503 until the configured models finish loading. Identical
(template, seed) pairs return identical outputs.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .models import build_encoder, build_generator, build_scorer


class EmbedRequest(BaseModel):
    texts: list[str]


class GenerateRequest(BaseModel):
    template: str
    num_beams: int = 4
    temperature: float = 1.0
    seed: int = 0


class ScoreRequest(BaseModel):
    text: str


class _ModelHolder:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.ready = threading.Event()
        self.error: str | None = None
        self.encoder = None
        self.generator = None
        self.scorer = None

    def load(self) -> None:
        try:
            self.encoder = build_encoder(self.config.embed_model_id, self.config.device)
            self.generator = build_generator(self.config.gen_model_id, self.config.device)
            self.scorer = build_scorer(self.config.score_model_id, self.config.device)
        except Exception as exc:  # surface load failures on every request
            self.error = f"{type(exc).__name__}: {exc}"
        finally:
            self.ready.set()


def create_app(config: ServiceConfig | None = None, load_async: bool = False) -> FastAPI:
    """Build the service; ``load_async`` loads models in a background thread
    so the 503-while-loading window is observable."""
    config = config or ServiceConfig()
    app = FastAPI(title="modelsvc")
    holder = _ModelHolder(config)
    app.state.holder = holder
    if load_async:
        threading.Thread(target=holder.load, daemon=True).start()
    else:
        holder.load()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed body"})

    def _unavailable() -> JSONResponse | None:
        if not holder.ready.is_set():
            return JSONResponse(status_code=503, content={"error": "models are loading"})
        if holder.error is not None:
            return JSONResponse(status_code=503, content={"error": holder.error})
        return None

    @app.get("/healthz")
    async def healthz():
        unavailable = _unavailable()
        if unavailable is not None:
            return unavailable
        return {"status": "ok", "dim": holder.encoder.dim}

    @app.post("/embed")
    async def embed(body: EmbedRequest):
        unavailable = _unavailable()
        if unavailable is not None:
            return unavailable
        if not body.texts:
            return JSONResponse(status_code=422, content={"error": "empty text list"})
        vectors: list[list[float]] = []
        for start in range(0, len(body.texts), config.max_batch):
            vectors.extend(holder.encoder.encode(body.texts[start : start + config.max_batch]))
        return {"vectors": vectors, "dim": holder.encoder.dim}

    @app.post("/generate")
    async def generate(body: GenerateRequest):
        unavailable = _unavailable()
        if unavailable is not None:
            return unavailable
        output = holder.generator.generate(
            body.template, num_beams=body.num_beams, temperature=body.temperature, seed=body.seed
        )
        return {"output": output}

    @app.post("/score")
    async def score(body: ScoreRequest):
        unavailable = _unavailable()
        if unavailable is not None:
            return unavailable
        if holder.scorer is None:
            return JSONResponse(status_code=503, content={"error": "no scorer configured"})
        return {"perplexity": holder.scorer.perplexity(body.text)}

    return app
