#!/usr/bin/env python3
# The whole pipeline through the CLI, exactly as a user would run it:
# span extraction -> fine-tune templates -> augmentation rounds -> report,
# twice with the same seed to show byte-identical outputs.

import json
import subprocess
import sys
import tempfile
from pathlib import Path

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "data" / "fixture_corpus.jsonl"


def run_pipeline(out_dir: Path) -> None:
    subprocess.run(
        [
            sys.executable, "-m", "dale_forge.cli", "pipeline",
            "--corpus", str(FIXTURE),
            "--backend", "echo",
            "--seed", "7",
            "--out-dir", str(out_dir),
            "--jobs", "1",
        ],
        check=True,
    )


with tempfile.TemporaryDirectory() as tmp:
    first, second = Path(tmp) / "run1", Path(tmp) / "run2"
    run_pipeline(first)
    run_pipeline(second)

    for name in ("spans.jsonl", "templates.jsonl", "train_aug.jsonl", "report.json"):
        a, b = (first / name).read_bytes(), (second / name).read_bytes()
        print(f"{name:18} {len(a):>9} bytes  identical={a == b}")
        assert a == b

    manifest = json.loads((first / "train_aug.jsonl.manifest.json").read_text())
    print("\nmanifest counters:",
          {k: manifest[k] for k in ("span_set_size", "template_count", "aug_count", "gold_count")})

    report = json.loads((first / "report.json").read_text())
    print(f"report: {report['augmented_sources']} sources, "
          f"mean length diversity {report['mean_length_diversity']:.1f} tokens")
