"""Single entry point exposing the pipeline as subcommands.

Every subcommand reads the layered configuration (defaults <- --config file
<- flags), honors --seed for full-output determinism, writes JSON-lines
outputs, and drops a run manifest next to its primary output. Operational
failures print one machine-parseable JSON record to stderr and exit 1;
usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import augment as augment_mod
from . import contextsel, masker, pmi
from .config import PipelineConfig, config_hash, load_config
from .corpus import Corpus, Document, load_corpus
from .embed import HashedBowProvider, RemoteProvider
from .errors import DaleForgeError, InvalidConfig
from .seeding import derive_rng

SUBCOMMANDS = ("extract-spans", "select-context", "build-templates", "augment", "evaluate", "pipeline")
ENDPOINT_ENV = "DALE_FORGE_ENDPOINT"


@dataclass
class RunManifest:
    subcommand: str
    config_hash: str
    seed: int
    input_paths: list[str] = field(default_factory=list)
    output_paths: list[str] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)
    wall_time_ms: int = 0

    def write(self, primary_output: Path) -> Path:
        path = primary_output.with_name(primary_output.name + ".manifest.json")
        record = {
            "subcommand": self.subcommand,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "input_paths": self.input_paths,
            "output_paths": self.output_paths,
            **self.counters,
            "wall_time_ms": self.wall_time_ms,
        }
        path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
        return path


def _effective_config(args: argparse.Namespace) -> PipelineConfig:
    """defaults <- config file <- explicitly passed flags."""
    flag_map = {
        "q": "q",
        "j": "j_percent",
        "pc": "pc_percentile",
        "direction": "ranking_direction",
        "lambda_context": "lambda_context",
        "lambda_finetune": "lambda_finetune",
        "budget": "output_budget_tokens",
        "preserve_budget": "preserve_budget",
        "window": "window",
        "context_len": "context_len",
        "rounds": "rounds",
        "seed": "seed",
        "embed_dim": "embed_dim",
        "mask_token": "mask_token",
    }
    overrides = {}
    for flag, key in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "lowercase", False):
        overrides["lowercase"] = True
    if getattr(args, "no_merge_pretrain", False):
        overrides["merge_pretrain_masks"] = False
    if getattr(args, "fixed_template", False):
        overrides["fixed_template"] = True
    config_path = getattr(args, "config", None)
    if config_path:
        return load_config(config_path, overrides)
    return PipelineConfig(**overrides)


def _provider_for(config: PipelineConfig, endpoint: str | None):
    if endpoint:
        return RemoteProvider(endpoint, max_in_flight=config.max_in_flight)
    return HashedBowProvider(config.embed_dim)


def _backend_for(config: PipelineConfig, name: str, endpoint: str | None):
    if name == "echo":
        return augment_mod.EchoBackend(config.mask_token)
    if name == "remote":
        if not endpoint:
            raise InvalidConfig("endpoint", f"--backend remote needs --endpoint or ${ENDPOINT_ENV}")
        return augment_mod.RemoteBackend(endpoint)
    raise InvalidConfig("backend", f"unknown backend {name!r}")


def _count_shard(payload: tuple[Corpus, int, bool]) -> Counter:
    shard, q, lowercase = payload
    return pmi.count_windows(shard, q, min_n=1, lowercase=lowercase)


def _counts_maybe_parallel(corpus: Corpus, config: PipelineConfig, jobs: int) -> Counter:
    if jobs <= 1 or len(corpus.documents) < 2 * jobs:
        return pmi.count_windows(corpus, config.q, min_n=1, lowercase=config.lowercase)
    shards = [
        Corpus(documents=corpus.documents[i::jobs], name=f"{corpus.name}#{i}") for i in range(jobs)
    ]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        partials = list(pool.map(_count_shard, [(s, config.q, config.lowercase) for s in shards]))
    return pmi.merge_counts(*partials)


def _template_record(template: masker.Template) -> dict:
    return {
        "id": template.doc_id,
        "template": template.template_text,
        "target": template.target_text,
        "mask_spans": [[s, e] for s, e in template.mask_spans],
        "windows": [
            {"start": w.start_token, "end": w.end_token, "context": list(w.context_tokens)}
            for w in template.windows
        ],
    }


def _write_jsonl(path: Path, records) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def _pretrain_template(
    doc: Document, span_set: pmi.SpanSet, provider, config: PipelineConfig
) -> masker.Template | None:
    """Context selection followed by span masking; None if nothing fits the budget."""
    if not doc.sentences:
        return None
    graph = contextsel.build_similarity_graph(doc, provider, config.lambda_context)
    scores = contextsel.pagerank(
        graph, damping=config.damping, tol=config.pagerank_tol, max_iter=config.pagerank_max_iter
    )
    selection = contextsel.select_context(
        doc,
        scores,
        config.output_budget_tokens,
        derive_rng(config.seed, doc.id, "context"),
        config.ctx_mu,
        config.ctx_sigma2,
        config.ctx_beta,
    )
    tokens = [t.text for t in contextsel.selected_tokens(doc, selection)]
    if not tokens:
        return None
    return masker.mask_pretrain(
        tokens,
        span_set,
        provider,
        derive_rng(config.seed, doc.id, "mask"),
        config,
        doc_id=doc.id,
    )


def _cmd_extract_spans(args: argparse.Namespace) -> RunManifest:
    config = _effective_config(args)
    corpus = load_corpus(args.corpus)
    counts = _counts_maybe_parallel(corpus, config, args.jobs)
    span_set = pmi.build_span_set(corpus, config, counts=counts)
    pmi.save_span_set(span_set, args.out)
    return RunManifest(
        subcommand="extract-spans",
        config_hash=config_hash(config),
        seed=config.seed,
        input_paths=[str(args.corpus)],
        output_paths=[str(args.out)],
        counters={"span_set_size": len(span_set)},
    )


def _cmd_select_context(args: argparse.Namespace) -> RunManifest:
    config = _effective_config(args)
    corpus = load_corpus(args.corpus)
    provider = _provider_for(config, args.endpoint)
    records = []
    for doc in corpus.documents:
        if not doc.sentences:
            records.append({"id": doc.id, "kept": [], "applied": False})
            continue
        graph = contextsel.build_similarity_graph(doc, provider, config.lambda_context)
        scores = contextsel.pagerank(
            graph, damping=config.damping, tol=config.pagerank_tol, max_iter=config.pagerank_max_iter
        )
        selection = contextsel.select_context(
            doc,
            scores,
            config.output_budget_tokens,
            derive_rng(config.seed, doc.id, "context"),
            config.ctx_mu,
            config.ctx_sigma2,
            config.ctx_beta,
        )
        records.append(
            {"id": doc.id, "kept": list(selection.kept_sentence_indices), "applied": selection.applied}
        )
    count = _write_jsonl(Path(args.out), records)
    return RunManifest(
        subcommand="select-context",
        config_hash=config_hash(config),
        seed=config.seed,
        input_paths=[str(args.corpus)],
        output_paths=[str(args.out)],
        counters={"template_count": count},
    )


def _cmd_build_templates(args: argparse.Namespace) -> RunManifest:
    config = _effective_config(args)
    corpus = load_corpus(args.corpus)
    provider = _provider_for(config, args.endpoint)
    inputs = [str(args.corpus)]
    templates: list[masker.Template] = []
    if args.mode == "pretrain":
        if not args.spans:
            raise InvalidConfig("spans", "--mode pretrain requires --spans")
        span_set = pmi.load_span_set(args.spans)
        inputs.append(str(args.spans))
        for doc in corpus.documents:
            template = _pretrain_template(doc, span_set, provider, config)
            if template is not None:
                templates.append(template)
    else:
        if args.spans:
            inputs.append(str(args.spans))
        for doc in corpus.documents:
            if not doc.sentences:
                continue
            templates.append(
                masker.mask_finetune(
                    doc, provider, config.lambda_finetune, config.preserve_budget, config
                )
            )
    count = _write_jsonl(Path(args.out), (_template_record(t) for t in templates))
    return RunManifest(
        subcommand="build-templates",
        config_hash=config_hash(config),
        seed=config.seed,
        input_paths=inputs,
        output_paths=[str(args.out)],
        counters={"template_count": count},
    )


def _cmd_augment(args: argparse.Namespace) -> RunManifest:
    config = _effective_config(args)
    corpus = load_corpus(args.corpus)
    provider = _provider_for(config, None)  # masking always runs locally unless served
    backend = _backend_for(config, args.backend, args.endpoint)
    aug_sets = []
    for doc in corpus.documents:
        if doc.label_text is None or not doc.sentences:
            continue
        aug_sets.append(
            augment_mod.generate_augmentations(
                doc, backend, config, config.rounds, config.seed, provider
            )
        )
    gold_count, aug_count = augment_mod.emit_training_file(
        corpus, aug_sets, args.out, emit_tokens=args.emit_tokens
    )
    inputs = [str(args.corpus)] + ([str(args.spans)] if args.spans else [])
    return RunManifest(
        subcommand="augment",
        config_hash=config_hash(config),
        seed=config.seed,
        input_paths=inputs,
        output_paths=[str(args.out)],
        counters={"aug_count": aug_count, "gold_count": gold_count},
    )


def _cmd_evaluate(args: argparse.Namespace) -> RunManifest:
    config = _effective_config(args)
    source = load_corpus(args.source)
    scorer = augment_mod.remote_scorer(args.scorer_endpoint) if args.scorer_endpoint else None

    grouped: dict[str, list[str]] = {}
    aug_lines = Path(args.augs).read_text(encoding="utf-8").splitlines()
    for line in aug_lines:
        if not line.strip():
            continue
        record = json.loads(line)
        if record.get("origin") == "dale" and "source_id" in record:
            grouped.setdefault(record["source_id"], []).append(record["text"])

    per_doc = []
    for doc in source.documents:
        augs = grouped.get(doc.id)
        if not augs:
            continue
        report = augment_mod.diversity_metrics(
            doc.token_texts, [text.split() for text in augs], scorer
        )
        entry = {
            "id": doc.id,
            "diversity": report.diversity,
            "length_diversity": report.length_diversity,
        }
        if report.perplexity is not None:
            entry["perplexity"] = report.perplexity
        per_doc.append(entry)

    n = len(per_doc)
    summary = {
        "documents": len(source.documents),
        "augmented_sources": n,
        "mean_diversity": (sum(e["diversity"] for e in per_doc) / n) if n else 0.0,
        "mean_length_diversity": (sum(e["length_diversity"] for e in per_doc) / n) if n else 0.0,
        "per_doc": per_doc,
    }
    Path(args.report).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return RunManifest(
        subcommand="evaluate",
        config_hash=config_hash(config),
        seed=config.seed,
        input_paths=[str(args.source), str(args.augs)],
        output_paths=[str(args.report)],
        counters={"aug_count": sum(len(v) for v in grouped.values())},
    )


def _cmd_pipeline(args: argparse.Namespace) -> RunManifest:
    config = _effective_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(args.corpus)
    provider = _provider_for(config, None)
    backend = _backend_for(config, args.backend, args.endpoint)

    spans_path = out_dir / "spans.jsonl"
    templates_path = out_dir / "templates.jsonl"
    train_path = out_dir / "train_aug.jsonl"
    report_path = out_dir / "report.json"

    counts = _counts_maybe_parallel(corpus, config, args.jobs)
    span_set = pmi.build_span_set(corpus, config, counts=counts)
    pmi.save_span_set(span_set, spans_path)

    templates = []
    aug_sets = []
    for doc in corpus.documents:
        if doc.label_text is None or not doc.sentences:
            continue
        templates.append(
            masker.mask_finetune(doc, provider, config.lambda_finetune, config.preserve_budget, config)
        )
        aug_sets.append(
            augment_mod.generate_augmentations(doc, backend, config, config.rounds, config.seed, provider)
        )
    _write_jsonl(templates_path, (_template_record(t) for t in templates))
    gold_count, aug_count = augment_mod.emit_training_file(
        corpus, aug_sets, train_path, emit_tokens=args.emit_tokens
    )

    grouped = {a.source_id: a for a in aug_sets}
    per_doc = []
    for doc in corpus.documents:
        aug_set = grouped.get(doc.id)
        if aug_set is None:
            continue
        report = augment_mod.diversity_metrics(
            doc.token_texts, [text.split() for text in aug_set.augmentations]
        )
        per_doc.append(
            {"id": doc.id, "diversity": report.diversity, "length_diversity": report.length_diversity}
        )
    n = len(per_doc)
    report_path.write_text(
        json.dumps(
            {
                "documents": len(corpus.documents),
                "augmented_sources": n,
                "mean_diversity": (sum(e["diversity"] for e in per_doc) / n) if n else 0.0,
                "mean_length_diversity": (sum(e["length_diversity"] for e in per_doc) / n) if n else 0.0,
                "per_doc": per_doc,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return RunManifest(
        subcommand="pipeline",
        config_hash=config_hash(config),
        seed=config.seed,
        input_paths=[str(args.corpus)],
        output_paths=[str(train_path), str(spans_path), str(templates_path), str(report_path)],
        counters={
            "span_set_size": len(span_set),
            "template_count": len(templates),
            "aug_count": aug_count,
            "gold_count": gold_count,
        },
    )


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="global random seed")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes for counting")
    parser.add_argument("--lowercase", action="store_true", help="lowercase tokens for counting/matching")
    parser.add_argument("--embed-dim", dest="embed_dim", type=int, help="hashed bag-of-words dimension")
    parser.add_argument("--mask-token", dest="mask_token", help="mask sentinel literal")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dale-forge",
        description="Corpus-to-template toolkit: span extraction, context selection, masking templates, augmentation",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("extract-spans", help="score n-grams and keep the top j% by discounted score")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--j", type=float)
    p.add_argument("--pc", type=float)
    p.add_argument("--direction", choices=("highest", "lowest"))
    _add_config_flags(p)
    p.set_defaults(handler=_cmd_extract_spans)

    p = sub.add_parser("select-context", help="rank sentences and pick the best within the token budget")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int)
    p.add_argument("--lambda", dest="lambda_context", type=float)
    p.add_argument("--endpoint", default=os.environ.get(ENDPOINT_ENV))
    _add_config_flags(p)
    p.set_defaults(handler=_cmd_select_context)

    p = sub.add_parser("build-templates", help="emit masked templates for pretraining or fine-tuning")
    p.add_argument("--mode", choices=("pretrain", "finetune"), required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--spans")
    p.add_argument("--out", required=True)
    p.add_argument("--preserve-budget", dest="preserve_budget", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--context-len", dest="context_len", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--lambda", dest="lambda_context", type=float)
    p.add_argument("--lambda-finetune", dest="lambda_finetune", type=float)
    p.add_argument("--no-merge-pretrain", dest="no_merge_pretrain", action="store_true")
    p.add_argument("--endpoint", default=os.environ.get(ENDPOINT_ENV))
    _add_config_flags(p)
    p.set_defaults(handler=_cmd_build_templates)

    p = sub.add_parser("augment", help="generate R augmentations per labeled document")
    p.add_argument("--corpus", required=True)
    p.add_argument("--spans")
    p.add_argument("--out", required=True)
    p.add_argument("--rounds", type=int)
    p.add_argument("--backend", choices=("echo", "remote"), default="echo")
    p.add_argument("--endpoint", default=os.environ.get(ENDPOINT_ENV))
    p.add_argument("--preserve-budget", dest="preserve_budget", type=float)
    p.add_argument("--fixed-template", dest="fixed_template", action="store_true")
    p.add_argument("--emit-tokens", dest="emit_tokens", action="store_true")
    _add_config_flags(p)
    p.set_defaults(handler=_cmd_augment)

    p = sub.add_parser("evaluate", help="diversity metrics of an augmentation file against its sources")
    p.add_argument("--source", required=True)
    p.add_argument("--augs", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--scorer-endpoint", dest="scorer_endpoint")
    _add_config_flags(p)
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("pipeline", help="extract-spans, finetune templates, augment, evaluate in one run")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", dest="out_dir", default=".")
    p.add_argument("--backend", choices=("echo", "remote"), default="echo")
    p.add_argument("--endpoint", default=os.environ.get(ENDPOINT_ENV))
    p.add_argument("--rounds", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--j", type=float)
    p.add_argument("--pc", type=float)
    p.add_argument("--preserve-budget", dest="preserve_budget", type=float)
    p.add_argument("--fixed-template", dest="fixed_template", action="store_true")
    p.add_argument("--emit-tokens", dest="emit_tokens", action="store_true")
    _add_config_flags(p)
    p.set_defaults(handler=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        manifest = args.handler(args)
    except DaleForgeError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    manifest.wall_time_ms = int((time.monotonic() - started) * 1000)
    primary = Path(manifest.output_paths[0])
    manifest_path = manifest.write(primary)
    print(
        json.dumps(
            {"status": "ok", "subcommand": manifest.subcommand, "manifest": str(manifest_path)}
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
