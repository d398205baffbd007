#!/usr/bin/env python3
# Budgeted context selection: rank sentences with PageRank over a
# similarity graph, keep the best ones within a token budget, restore
# document order. A Gaussian gate decides whether ranked selection applies
# at all; when it fails, the fallback is plain prefix truncation.

import numpy as np

from dale_forge.contextsel import build_similarity_graph, pagerank, select_context, selected_tokens
from dale_forge.corpus import document_from_text
from dale_forge.embed import HashedBowProvider
from dale_forge.seeding import derive_rng

doc = document_from_text(
    "demo",
    "The court reviews claims about payment obligations and remedies . "
    "Payment obligations persist after termination of the agreement . "
    "A zebra wandered across the savanna at dawn . "
    "Remedies for breach include damages awarded by the court . "
    "The agreement defines payment schedules and termination rights .",
)

provider = HashedBowProvider(dim=256)
graph = build_similarity_graph(doc, provider, lam=0.7)
scores = pagerank(graph)

print("sentence scores (higher = more central to the document):")
for sentence, score in zip(doc.sentences, scores):
    head = " ".join(t.text for t in sentence.tokens[:6])
    print(f"  {score:.4f}  {head} ...")

# the off-topic zebra sentence should rank last
assert int(np.argmin(scores)) == 2

budget = 30  # tokens; tight enough to force choices
result = select_context(doc, scores, budget, derive_rng(7, doc.id), mu=0.5, sigma2=0.7, beta=0.3)
print(f"\ngate applied: {result.applied}")
print(f"kept sentences {result.kept_sentence_indices} using {result.token_count}/{budget} tokens")
print("selected text:", " ".join(t.text for t in selected_tokens(doc, result))[:90], "...")

# a draw that fails the gate falls back to the longest fitting prefix
class FailingGate:
    def normal(self, mu, sigma):
        return -1.0

fallback = select_context(doc, scores, budget, FailingGate(), 0.5, 0.7, 0.3)
print(f"\nfallback (gate failed): kept leading prefix {fallback.kept_sentence_indices}")
