#!/usr/bin/env python3
# Span-level masking for denoising pretraining: occurrences of corpus-level
# correlated spans are ranked, the best are preserved under the 20% budget,
# the rest collapse to mask sentinels, and a gated draw may keep one token
# of a masked run as a reconstruction hint.

from dale_forge.config import PipelineConfig
from dale_forge.corpus import Corpus, document_from_text
from dale_forge.embed import HashedBowProvider
from dale_forge.masker import mask_pretrain, reconstruct
from dale_forge.pmi import build_span_set
from dale_forge.seeding import derive_rng

boiler = "the company is validly existing and in good standing under applicable law ."
corpus = Corpus(
    documents=tuple(
        document_from_text(f"d{i}", " ".join([boiler] * 3 + ["Payment is due upon notice ."]))
        for i in range(12)
    )
)

config = PipelineConfig(q=4, j_percent=30.0, pc_percentile=50.0, embed_dim=256)
span_set = build_span_set(corpus, config)
print(f"span set: {len(span_set.spans)} spans, e.g.",
      [" ".join(s.key) for s in span_set.spans[:3]])

provider = HashedBowProvider(config.embed_dim)
doc_tokens = corpus.documents[0].token_texts
template = mask_pretrain(
    doc_tokens, span_set, provider, derive_rng(config.seed, "d0", "mask"), config, doc_id="d0"
)

print("\ntarget  :", " ".join(template.target_tokens))
print("template:", " ".join(template.masked_tokens))
print("mask spans (target coordinates):", template.mask_spans)

# every template aligns: substituting the target spans back into the mask
# positions reproduces the target exactly
assert reconstruct(template) == list(template.target_tokens)
print("\nalignment round trip: exact")

# hints: single surviving tokens between two masks anchor reconstruction
hints = [
    template.masked_tokens[i]
    for i in range(1, len(template.masked_tokens) - 1)
    if template.masked_tokens[i] != "<mask>"
    and template.masked_tokens[i - 1] == "<mask>"
    and template.masked_tokens[i + 1] == "<mask>"
]
print("hint tokens kept inside masked runs:", hints or "(none this seed)")
