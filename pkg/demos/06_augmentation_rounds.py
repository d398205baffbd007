#!/usr/bin/env python3
# Augmentation rounds against a backend. The echo backend (offline stub)
# deletes masks, so its outputs are compressed copies of the source; a
# real generation service fills masks with new text instead. Either way,
# the set is scored for token diversity and length drift.
#
# Point DALE_FORGE_ENDPOINT (or --endpoint) at a modelsvc instance to see
# non-trivial diversity; see modelsvc/README.md.

import dataclasses
import os

from dale_forge.augment import EchoBackend, RemoteBackend, diversity_metrics, generate_augmentations
from dale_forge.config import PipelineConfig
from dale_forge.corpus import document_from_text
from dale_forge.embed import HashedBowProvider

doc = dataclasses.replace(
    document_from_text(
        "d",
        "The supplier shall deliver goods on schedule and invoice monthly . "
        "Invoices unpaid after thirty days accrue interest at two percent . "
        "Either party may terminate for material breach upon written notice .",
    ),
    label_text="Payments",
)

config = PipelineConfig(embed_dim=256, preserve_budget=0.4, rounds=5)
provider = HashedBowProvider(config.embed_dim)

endpoint = os.environ.get("DALE_FORGE_ENDPOINT")
backend = RemoteBackend(endpoint) if endpoint else EchoBackend()
print(f"backend: {backend.kind}" + (f" ({endpoint})" if endpoint else " (offline stub)"))

result = generate_augmentations(doc, backend, config, R=config.rounds, rng_seed=7, provider=provider)
print(f"\nsource : {doc.text[:88]} ...")
for i, augmentation in enumerate(result.augmentations, start=1):
    print(f"round {i}: {augmentation[:88]} ...")

report = diversity_metrics(doc.token_texts, [a.split() for a in result.augmentations])
print(f"\ndiversity (new token types per round): {report.diversity}")
print(f"length diversity (|len delta| per round): {report.length_diversity}")
if backend.kind == "echo":
    assert report.diversity == 0, "echo never introduces new tokens"
    print("echo backend introduces nothing new, as expected; labels ride along:",
          result.label_text)
