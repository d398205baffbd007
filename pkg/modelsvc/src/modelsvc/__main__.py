"""Run the service: ``python -m modelsvc --port 8763``."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="modelsvc")
    parser.add_argument("--embed-model", default="hashed:512", help="encoder id (hashed:<dim> or checkpoint)")
    parser.add_argument("--gen-model", default="sampler:", help="generator id (sampler: or checkpoint)")
    parser.add_argument("--score-model", default="unigram:", help="scorer id (unigram:, checkpoint, or 'none')")
    parser.add_argument("--port", type=int, default=8763)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--max-batch", type=int, default=64)
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    config = ServiceConfig(
        embed_model_id=args.embed_model,
        gen_model_id=args.gen_model,
        score_model_id=None if args.score_model == "none" else args.score_model,
        port=args.port,
        max_batch=args.max_batch,
        device=args.device,
    )
    uvicorn.run(create_app(config), host=args.host, port=config.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
