#!/usr/bin/env python3
"""Deterministically regenerate the bundled 100-document fixture corpus.

The corpus is synthetic contract-flavored prose with three properties the
test suite relies on:

* text is exactly the single-space join of its tokens (punctuation spaced),
  so echo-backend round trips compare byte-for-byte against the source;
* a handful of multi-token boilerplate phrases recur across documents while
  capitalized name pairs each occur exactly once, giving span extraction a
  clear collocation-vs-entity contrast;
* every document is at least 40 tokens (the default preserve budget then
  always fits one full n-gram) and two documents exceed 1024 tokens to
  force sliding windows.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "fixture_corpus.jsonl"

FILLER = (
    "the party shall upon notice deliver any amount under this section as set "
    "forth herein and each obligation remains due unless waived by mutual "
    "consent of both parties acting through counsel".split()
)

COLLOCATIONS = [
    "validly existing",
    "in good standing",
    "subject to the terms hereof",
    "remedies available at law",
    "governed by the laws",
    "in witness whereof",
    "payment is due",
]

FIRST = ["Alden", "Brook", "Casen", "Dalia", "Edris", "Farah", "Gideon", "Hollis",
         "Imara", "Jorel", "Kiana", "Lowen", "Mireille", "Nadir", "Odette", "Pravin"]
LAST = ["Abernathy", "Birchwood", "Calloway", "Devereux", "Ellingham", "Fairbank",
        "Greenspan", "Harrow", "Ingleside", "Joplin", "Kingsley", "Lockhart"]

LABELS = ["Payments", "Authority", "Termination", "Confidentiality", "Indemnity"]


def make_sentence(rng: np.random.Generator, entity: str | None) -> list[str]:
    tokens: list[str] = []
    n_fill = int(rng.integers(6, 13))
    for _ in range(n_fill):
        tokens.append(FILLER[int(rng.integers(0, len(FILLER)))])
    if rng.random() < 0.75:
        phrase = COLLOCATIONS[int(rng.integers(0, len(COLLOCATIONS)))]
        insert_at = int(rng.integers(0, len(tokens) + 1))
        tokens[insert_at:insert_at] = phrase.split()
    if entity is not None:
        insert_at = int(rng.integers(0, len(tokens) + 1))
        tokens[insert_at:insert_at] = entity.split()
    tokens[0] = tokens[0].capitalize()
    tokens.append(".")
    return tokens


def make_document(rng: np.random.Generator, index: int, long: bool) -> dict:
    n_sentences = int(rng.integers(90, 110)) if long else int(rng.integers(4, 9))
    entity = None
    if index < len(FIRST) * len(LAST) and rng.random() < 0.4:
        entity = f"{FIRST[index % len(FIRST)]} {LAST[index % len(LAST)]}"
    entity_sentence = int(rng.integers(0, n_sentences)) if entity else -1
    tokens: list[str] = []
    for s in range(n_sentences):
        tokens.extend(make_sentence(rng, entity if s == entity_sentence else None))
    return {
        "id": f"fx{index:03d}",
        "text": " ".join(tokens),
        "label": LABELS[index % len(LABELS)],
    }


def main() -> None:
    rng = np.random.default_rng(20240317)
    long_docs = {10, 55}
    records = [make_document(rng, i, long=i in long_docs) for i in range(100)]
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    sizes = [len(r["text"].split()) for r in records]
    print(f"wrote {len(records)} documents to {OUT}")
    print(f"token counts: min={min(sizes)} max={max(sizes)}")


if __name__ == "__main__":
    main()
