import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from modelsvc import ServiceConfig, create_app
from modelsvc import models as m

FIXTURES = json.loads(
    (Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "wire_protocol.json").read_text()
)


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(ServiceConfig(embed_model_id="hashed:64")))


class TestHealthz:
    def test_ok_with_dim(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "dim": 64}


class TestEmbed:
    def test_fixture_requests(self, client):
        for case in FIXTURES["embed"]:
            response = client.post("/embed", json=case["request"])
            assert response.status_code == 200
            body = response.json()
            assert len(body["vectors"]) == case["expect_vectors"]
            assert all(len(v) == body["dim"] for v in body["vectors"])

    def test_error_statuses_from_fixtures(self, client):
        for case in FIXTURES["embed_errors"]:
            response = client.post("/embed", json=case["request"])
            assert response.status_code == case["status"]

    def test_batch_split_equivalence(self, client):
        texts = FIXTURES["embed_batch_split"]["texts"]
        whole = client.post("/embed", json={"texts": texts}).json()["vectors"]
        half = len(texts) // 2
        first = client.post("/embed", json={"texts": texts[:half]}).json()["vectors"]
        second = client.post("/embed", json={"texts": texts[half:]}).json()["vectors"]
        assert whole == first + second

    def test_dim_constant_across_requests(self, client):
        dims = {
            client.post("/embed", json={"texts": [f"text {i}"]}).json()["dim"] for i in range(5)
        }
        assert dims == {64}

    def test_internal_chunking_beyond_max_batch(self):
        app = create_app(ServiceConfig(embed_model_id="hashed:16", max_batch=4))
        local = TestClient(app)
        texts = [f"token{i}" for i in range(11)]
        body = local.post("/embed", json={"texts": texts}).json()
        assert len(body["vectors"]) == 11


class TestGenerate:
    def test_fixture_requests_produce_text(self, client):
        for case in FIXTURES["generate"]:
            response = client.post("/generate", json=case["request"])
            assert response.status_code == 200
            assert isinstance(response.json()["output"], str)
            assert response.json()["output"]

    def test_seeded_determinism(self, client):
        request = FIXTURES["generate"][0]["request"]
        first = client.post("/generate", json=request).json()["output"]
        second = client.post("/generate", json=request).json()["output"]
        assert first == second

    def test_different_seeds_differ(self, client):
        request = dict(FIXTURES["generate"][0]["request"])
        outputs = set()
        for seed in range(6):
            request["seed"] = seed
            outputs.add(client.post("/generate", json=request).json()["output"])
        assert len(outputs) > 1

    def test_masks_replaced(self, client):
        request = {"template": "Payment <mask> due .", "seed": 3}
        output = client.post("/generate", json=request).json()["output"]
        assert "<mask>" not in output
        assert output.startswith("Payment") and output.endswith("due .")

    def test_context_framing_echoed(self, client):
        request = {"template": "<context> a b </context> c <mask> d", "seed": 1}
        output = client.post("/generate", json=request).json()["output"]
        assert output.startswith("<context> a b </context> c")

    def test_malformed_body_is_400(self, client):
        for case in FIXTURES["generate_errors"]:
            response = client.post("/generate", json=case["request"])
            assert response.status_code == case["status"]


class TestScore:
    def test_fixture_requests_finite_positive(self, client):
        for case in FIXTURES["score"]:
            response = client.post("/score", json=case["request"])
            assert response.status_code == 200
            perplexity = response.json()["perplexity"]
            assert perplexity > 0 and perplexity == pytest.approx(perplexity)

    def test_malformed_body_is_400(self, client):
        for case in FIXTURES["score_errors"]:
            response = client.post("/score", json=case["request"])
            assert response.status_code == case["status"]

    def test_in_reference_text_scores_lower_than_gibberish(self, client):
        familiar = client.post("/score", json={"text": "the parties agree"}).json()["perplexity"]
        strange = client.post("/score", json={"text": "zyx qwv jkl"}).json()["perplexity"]
        assert familiar < strange


class TestLoadingWindow:
    def test_503_while_loading(self, monkeypatch):
        from modelsvc import app as app_module

        real_builder = app_module.build_encoder

        def slow_builder(model_id, device):
            time.sleep(0.4)
            return real_builder(model_id, device)

        monkeypatch.setattr(app_module, "build_encoder", slow_builder)
        client = TestClient(create_app(ServiceConfig(embed_model_id="hashed:8"), load_async=True))
        response = client.post("/embed", json={"texts": ["a"]})
        assert response.status_code == 503
        deadline = time.time() + 5
        while time.time() < deadline:
            if client.get("/healthz").status_code == 200:
                break
            time.sleep(0.05)
        assert client.post("/embed", json={"texts": ["a"]}).status_code == 200


class TestBuiltinModels:
    def test_unigram_perplexity_definition(self):
        scorer = m.UnigramScorer("a a b")
        # counts: a=2, b=1, total=3, vocab=2 -> p(a)=3/6, p(b)=2/6, unk=1/6
        import math

        expected = math.exp(-(math.log(3 / 6) + math.log(1 / 6)) / 2)
        assert scorer.perplexity("a zebra") == pytest.approx(expected, abs=1e-12)

    def test_hashed_encoder_unit_norm(self):
        encoder = m.HashedEncoder(32)
        vector = encoder.encode(["some words"])[0]
        assert sum(x * x for x in vector) == pytest.approx(1.0)

    def test_sampler_identical_template_seed_pairs(self):
        generator = m.SeededFillGenerator()
        a = generator.generate("x <mask> y", 4, 1.0, 42)
        b = generator.generate("x <mask> y", 4, 1.0, 42)
        assert a == b
