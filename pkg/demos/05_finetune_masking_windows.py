#!/usr/bin/env python3
# Label-conditioned masking for fine-tuning, plus the sliding-window
# mechanism that cuts long templates into decoder-sized segments with
# carried context between <context> and </context>.

import dataclasses

from dale_forge.config import PipelineConfig
from dale_forge.corpus import document_from_text
from dale_forge.embed import HashedBowProvider
from dale_forge.masker import mask_finetune, sliding_windows, window_text

doc = dataclasses.replace(
    document_from_text(
        "d",
        "The tenant shall pay rent monthly without setoff . "
        "Late payment accrues interest at the stated rate . "
        "The landlord may terminate upon material default . "
        "Notices must be written and delivered by certified mail .",
    ),
    label_text="Payments",
)

config = PipelineConfig(embed_dim=256)
provider = HashedBowProvider(config.embed_dim)

# n-grams that align with the blend of document meaning and the label
# survive; everything else collapses into merged masks
for budget in (0.6, 0.3):
    template = mask_finetune(doc, provider, lambda_ft=0.5, preserve_budget=budget, config=config)
    print(f"budget {budget:.0%}: {' '.join(template.masked_tokens)}\n")

# long templates are tiled into windows; every window after the first
# carries the previous window's non-mask tail as delimited context
tokens = [f"t{i}" for i in range(2500)]
windows = sliding_windows(tokens, window=1024, context_len=64)
print(f"2500-token template -> {len(windows)} windows")
for i, spec in enumerate(windows):
    rendered = window_text(tokens, spec).split()
    framing = "with context" if spec.context_delimited else "no context"
    print(f"  window {i}: fresh [{spec.start_token}, {spec.end_token}) "
          f"{framing}, rendered {len(rendered)} tokens")

stitched = [t for w in windows for t in tokens[w.start_token : w.end_token]]
assert stitched == tokens
print("fresh regions tile the template exactly")
