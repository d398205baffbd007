#!/usr/bin/env python3
# Corpus ingestion walkthrough: tokenization with stable byte offsets,
# rule-based sentence splitting, and the JSONL round trip.

import json
import tempfile
from pathlib import Path

from dale_forge.corpus import load_corpus, save_corpus, tokenize

text = 'The Buyer has full power. Visit gotinder.com, then respond. "Quoted terms" apply.'

print("== tokenize ==")
for tok in tokenize(text):
    print(f"  byte {tok.byte_offset:>3}  {tok.text!r}")

# punctuation is peeled off the edges of whitespace chunks, but internal
# punctuation survives, so URLs and abbreviations stay whole
assert [t.text for t in tokenize("gotinder.com,")] == ["gotinder.com", ","]

print("\n== sentences ==")
with tempfile.TemporaryDirectory() as tmp:
    corpus_path = Path(tmp) / "corpus.jsonl"
    corpus_path.write_text(json.dumps({"id": "d1", "text": text, "label": "Demo"}) + "\n")
    corpus = load_corpus(corpus_path)
    doc = corpus.documents[0]
    for sentence in doc.sentences:
        print(f"  [{sentence.index_in_doc}] {' '.join(t.text for t in sentence.tokens)}")

    # the round trip is exact: reload equals the original field-for-field
    copy_path = Path(tmp) / "copy.jsonl"
    save_corpus(corpus, copy_path, emit_tokens=True)
    assert load_corpus(copy_path).documents[0].sentences == doc.sentences
    print("\nround trip exact; tokens array emitted:")
    print(" ", json.loads(copy_path.read_text())["tokens"][:8], "...")
