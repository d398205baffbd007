import json
from pathlib import Path

import pytest

from dale_forge import cli


def write_corpus(tmp_path: Path, records) -> Path:
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path


SMALL_CORPUS = [
    {
        "id": f"d{i}",
        "text": (
            "The party shall remain validly existing and in good standing . "
            "Payment is due upon notice as set forth herein under the terms . "
            "Each obligation remains due unless waived by mutual consent of counsel . "
            "The remedies available at law survive any termination hereof ."
        ),
        "label": "Payments",
    }
    for i in range(4)
]


def run(argv) -> int:
    return cli.main(argv)


class TestUsage:
    def test_unknown_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as err:
            run(["frobnicate"])
        assert err.value.code == 2

    def test_missing_required_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run(["extract-spans", "--corpus", "x.jsonl"])  # no --out
        assert err.value.code == 2


class TestErrors:
    def test_operational_error_is_machine_parseable(self, tmp_path, capsys):
        code = run(
            ["extract-spans", "--corpus", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path / "s.jsonl")]
        )
        assert code == 1
        record = json.loads(capsys.readouterr().err.strip())
        assert record["error"] == "IoError"

    def test_bad_config_value(self, tmp_path, capsys):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        code = run(
            ["extract-spans", "--corpus", str(corpus), "--out", str(tmp_path / "s.jsonl"), "--q", "1"]
        )
        assert code == 1
        record = json.loads(capsys.readouterr().err.strip())
        assert record["error"] == "InvalidConfig"


class TestExtractSpans:
    def test_writes_spans_and_manifest(self, tmp_path, capsys):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        out = tmp_path / "spans.jsonl"
        assert run(["extract-spans", "--corpus", str(corpus), "--out", str(out), "--q", "3", "--jobs", "1"]) == 0
        lines = out.read_text().splitlines()
        first = json.loads(lines[0])
        assert set(first) == {"tokens", "freq", "pmi", "dpmi"}
        manifest = json.loads((tmp_path / "spans.jsonl.manifest.json").read_text())
        assert manifest["subcommand"] == "extract-spans"
        assert manifest["span_set_size"] == len(lines)
        assert manifest["wall_time_ms"] >= 0

    def test_sharded_counting_matches_serial(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert run(["extract-spans", "--corpus", str(corpus), "--out", str(a), "--jobs", "1", "--q", "3"]) == 0
        assert run(["extract-spans", "--corpus", str(corpus), "--out", str(b), "--jobs", "2", "--q", "3"]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestSelectContext:
    def test_output_schema(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        out = tmp_path / "ctx.jsonl"
        assert run(
            ["select-context", "--corpus", str(corpus), "--out", str(out), "--budget", "1024", "--seed", "3"]
        ) == 0
        for line in out.read_text().splitlines():
            record = json.loads(line)
            assert set(record) == {"id", "kept", "applied"}
            assert record["kept"] == sorted(record["kept"])


class TestBuildTemplates:
    def test_finetune_mode(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        out = tmp_path / "templates.jsonl"
        assert run(
            ["build-templates", "--mode", "finetune", "--corpus", str(corpus), "--out", str(out), "--seed", "1"]
        ) == 0
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(records) == 4
        for r in records:
            assert set(r) == {"id", "template", "target", "mask_spans", "windows"}
            # alignment: substituting targets back reproduces the target text
            tokens = r["template"].split()
            target = r["target"].split()
            rebuilt, span_iter = [], iter(r["mask_spans"])
            for tok in tokens:
                if tok == "<mask>":
                    s, e = next(span_iter)
                    rebuilt.extend(target[s:e])
                else:
                    rebuilt.append(tok)
            assert rebuilt == target

    def test_pretrain_mode_requires_spans(self, tmp_path, capsys):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        code = run(
            ["build-templates", "--mode", "pretrain", "--corpus", str(corpus), "--out", str(tmp_path / "t.jsonl")]
        )
        assert code == 1
        assert json.loads(capsys.readouterr().err.strip())["error"] == "InvalidConfig"

    def test_pretrain_mode_with_spans(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        spans = tmp_path / "spans.jsonl"
        assert run(["extract-spans", "--corpus", str(corpus), "--out", str(spans), "--jobs", "1"]) == 0
        out = tmp_path / "templates.jsonl"
        assert run(
            [
                "build-templates", "--mode", "pretrain", "--corpus", str(corpus),
                "--spans", str(spans), "--out", str(out), "--seed", "2",
            ]
        ) == 0
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert records and all("<mask>" in r["template"] or r["template"] == r["target"] for r in records)


class TestAugmentAndEvaluate:
    def test_augment_emits_gold_then_augs(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        out = tmp_path / "train.jsonl"
        assert run(
            ["augment", "--corpus", str(corpus), "--out", str(out), "--rounds", "2", "--seed", "5"]
        ) == 0
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(records) == 4 + 8
        assert all(r.get("origin") == "dale" for r in records[4:])
        manifest = json.loads((tmp_path / "train.jsonl.manifest.json").read_text())
        assert manifest["aug_count"] == 8

    def test_emit_tokens_flag(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        out = tmp_path / "train.jsonl"
        assert run(
            ["augment", "--corpus", str(corpus), "--out", str(out), "--rounds", "1", "--emit-tokens"]
        ) == 0
        first = json.loads(out.read_text().splitlines()[0])
        assert first["tokens"] == first["text"].split()

    def test_evaluate_report(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        train = tmp_path / "train.jsonl"
        run(["augment", "--corpus", str(corpus), "--out", str(train), "--rounds", "2", "--seed", "5"])
        report_path = tmp_path / "report.json"
        assert run(
            ["evaluate", "--source", str(corpus), "--augs", str(train), "--report", str(report_path)]
        ) == 0
        report = json.loads(report_path.read_text())
        assert report["documents"] == 4
        assert report["augmented_sources"] == 4
        assert len(report["per_doc"]) == 4
        assert all("perplexity" not in entry for entry in report["per_doc"])

    def test_evaluate_with_scorer_endpoint(self, tmp_path):
        from stub_service import StubService

        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        train = tmp_path / "train.jsonl"
        run(["augment", "--corpus", str(corpus), "--out", str(train), "--rounds", "1", "--seed", "5"])
        report_path = tmp_path / "report.json"
        with StubService() as svc:
            assert run(
                [
                    "evaluate", "--source", str(corpus), "--augs", str(train),
                    "--report", str(report_path), "--scorer-endpoint", svc.endpoint,
                ]
            ) == 0
        report = json.loads(report_path.read_text())
        assert all(entry["perplexity"] > 0 for entry in report["per_doc"])


class TestConfigLayering:
    def test_flags_override_file(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        config = tmp_path / "c.toml"
        config.write_text("q = 3\nj_percent = 100.0\n")
        out_file_q = tmp_path / "file_q.jsonl"
        out_flag_q = tmp_path / "flag_q.jsonl"
        assert run(
            ["extract-spans", "--corpus", str(corpus), "--out", str(out_file_q), "--config", str(config), "--jobs", "1"]
        ) == 0
        assert run(
            ["extract-spans", "--corpus", str(corpus), "--out", str(out_flag_q), "--config", str(config), "--q", "2", "--jobs", "1"]
        ) == 0
        max_len_file = max(len(json.loads(l)["tokens"]) for l in out_file_q.read_text().splitlines())
        max_len_flag = max(len(json.loads(l)["tokens"]) for l in out_flag_q.read_text().splitlines())
        assert (max_len_file, max_len_flag) == (3, 2)

    def test_manifest_records_effective_config_hash(self, tmp_path):
        corpus = write_corpus(tmp_path, SMALL_CORPUS)
        out1, out2 = tmp_path / "o1.jsonl", tmp_path / "o2.jsonl"
        run(["extract-spans", "--corpus", str(corpus), "--out", str(out1), "--jobs", "1"])
        run(["extract-spans", "--corpus", str(corpus), "--out", str(out2), "--q", "3", "--jobs", "1"])
        h1 = json.loads((tmp_path / "o1.jsonl.manifest.json").read_text())["config_hash"]
        h2 = json.loads((tmp_path / "o2.jsonl.manifest.json").read_text())["config_hash"]
        assert h1 != h2
