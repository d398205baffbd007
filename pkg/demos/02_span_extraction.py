#!/usr/bin/env python3
# Correlated-span extraction: why discounting matters. A corpus where one
# phrase recurs everywhere ("validly existing") and a name appears once
# ("John Smith"). Raw association loves the rare name; the frequency
# discount flips the ranking toward the reusable phrase.

from dale_forge.config import PipelineConfig
from dale_forge.corpus import Corpus, document_from_text
from dale_forge.pmi import build_span_set

fillers = ["the", "company", "remains", "under", "its", "charter", "terms", "hereof"]
sentences = []
for i in range(50):
    a, b = fillers[i % 8], fillers[(i + 3) % 8]
    if i == 17:
        sentences.append(f"John Smith signed with {a} counsel {b} present .")
    else:
        sentences.append(f"The entity is validly existing and {a} {b} in good standing .")

corpus = Corpus(documents=(document_from_text("demo", " ".join(sentences)),))

config = PipelineConfig(q=3, j_percent=100.0, pc_percentile=95.0)
span_set = build_span_set(corpus, config)

print(f"candidates scored: {len(span_set.spans)}")
print(f"per-length frequency cutoffs: {span_set.cutoffs_used}\n")

print("top 8 by discounted score:")
for span in span_set.spans[:8]:
    key = " ".join(span.key)
    print(f"  {key!r:35} freq={span.frequency:<3} raw={span.pmi:+.3f} discounted={span.discounted_pmi:+.3f}")

keys = [s.key for s in span_set.spans]
collocation = keys.index(("validly", "existing"))
entity = keys.index(("John", "Smith"))
print(f"\n'validly existing' rank {collocation} vs 'John Smith' rank {entity}")
assert collocation < entity, "the recurring phrase must outrank the one-shot name"

# the raw scores tell the opposite story: the singleton name has huge
# association precisely because it never repeats
by_raw = sorted(span_set.spans, key=lambda s: -s.pmi)
raw_keys = [s.key for s in by_raw]
print(f"by RAW score the name would sit at rank {raw_keys.index(('John', 'Smith'))}")
