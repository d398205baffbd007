import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dale_forge import embed
from dale_forge.errors import (
    DimMismatch,
    EmptyText,
    KeyNotFound,
    ProtocolError,
    TransportError,
    ZeroVector,
)
from stub_service import StubService

FIXTURES = json.loads((Path(__file__).parent / "fixtures" / "wire_protocol.json").read_text())


def vec(*values) -> embed.EmbeddingVector:
    return embed.EmbeddingVector(np.array(values, dtype=float))


class TestEmbeddingVector:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            vec(1.0, float("nan"))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            embed.EmbeddingVector(np.array([]))

    def test_dim(self):
        assert vec(1, 2, 3).dim == 3


class TestCosine:
    def test_self_similarity(self):
        v = vec(0.3, -2.0, 5.0)
        assert embed.cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert embed.cosine(vec(1, 0), vec(0, 1)) == 0.0

    def test_hand_value(self):
        expected = 32 / (math.sqrt(14) * math.sqrt(77))
        assert embed.cosine(vec(1, 2, 3), vec(4, 5, 6)) == pytest.approx(expected, abs=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            embed.cosine(vec(1, 2), vec(1, 2, 3))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            embed.cosine(vec(0, 0), vec(1, 1))

    @given(
        st.lists(st.floats(-10, 10), min_size=2, max_size=6),
        st.lists(st.floats(-10, 10), min_size=2, max_size=6),
    )
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, a, b):
        size = min(len(a), len(b))
        va, vb = np.array(a[:size]), np.array(b[:size])
        if np.linalg.norm(va) == 0 or np.linalg.norm(vb) == 0:
            return
        x = embed.cosine(embed.EmbeddingVector(va), embed.EmbeddingVector(vb))
        y = embed.cosine(embed.EmbeddingVector(vb), embed.EmbeddingVector(va))
        assert x == pytest.approx(y, abs=1e-12)

    @given(st.floats(1e-3, 1e3))
    @settings(max_examples=100, deadline=None)
    def test_scale_invariance(self, k):
        a, b = vec(1.0, 2.0, -0.5), vec(0.5, -1.0, 2.0)
        scaled = embed.EmbeddingVector(k * a.values)
        assert embed.cosine(scaled, b) == pytest.approx(embed.cosine(a, b), abs=1e-9)


class TestBlend:
    def test_extremes(self):
        x, y = vec(2, 0), vec(0, 2)
        assert np.array_equal(embed.blend(x, y, 1.0).values, x.values)
        assert np.array_equal(embed.blend(x, y, 0.0).values, y.values)

    def test_midpoint(self):
        assert np.array_equal(embed.blend(vec(2, 0), vec(0, 2), 0.5).values, np.array([1.0, 1.0]))

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            embed.blend(vec(1), vec(1, 2), 0.5)


class TestHashedBow:
    def test_scalar_multiples_collapse(self, provider):
        assert np.array_equal(
            provider.embed_text("a a").values, provider.embed_text("a").values
        )

    def test_disjoint_vocab_orthogonal_at_high_dim(self):
        big = embed.HashedBowProvider(dim=4096)
        a = big.embed_text("alpha bravo charlie")
        b = big.embed_text("delta echo foxtrot")
        assert abs(embed.cosine(a, b)) < 1e-9

    def test_permutation_invariance(self, provider):
        assert np.array_equal(
            provider.embed_text("one two three").values,
            provider.embed_text("three one two").values,
        )

    def test_case_folded(self, provider):
        assert np.array_equal(
            provider.embed_text("Buyer").values, provider.embed_text("buyer").values
        )

    def test_unit_norm(self, provider):
        assert np.linalg.norm(provider.embed_text("some words here").values) == pytest.approx(1.0)

    def test_determinism_over_repeats(self, provider):
        vectors = {provider.embed_text("repeat me").values.tobytes() for _ in range(1000)}
        assert len(vectors) == 1

    def test_empty_text(self, provider):
        with pytest.raises(EmptyText):
            provider.embed_text("   ")


class TestFileBacked:
    def make_store(self, tmp_path, rows):
        path = tmp_path / "vectors.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        return path

    def test_exact_lookup(self, tmp_path):
        path = self.make_store(tmp_path, [{"key": "hello", "vector": [1.0, 2.0, 3.0]}])
        provider = embed.FileBackedProvider(path)
        assert provider.dim == 3
        assert np.array_equal(provider.embed_text("hello").values, np.array([1.0, 2.0, 3.0]))

    def test_missing_key(self, tmp_path):
        provider = embed.FileBackedProvider(
            self.make_store(tmp_path, [{"key": "a", "vector": [1.0]}])
        )
        with pytest.raises(KeyNotFound):
            provider.embed_text("b")

    def test_inconsistent_dims_rejected(self, tmp_path):
        path = self.make_store(
            tmp_path, [{"key": "a", "vector": [1.0]}, {"key": "b", "vector": [1.0, 2.0]}]
        )
        with pytest.raises(Exception):
            embed.FileBackedProvider(path)


class TestRemote:
    def test_fixture_requests_round_trip(self):
        with StubService() as svc:
            provider = embed.RemoteProvider(svc.endpoint)
            for case in FIXTURES["embed"]:
                vectors = provider.embed_many(case["request"]["texts"])
                assert len(vectors) == case["expect_vectors"]
                assert all(v.dim == provider.dim for v in vectors)

    def test_batch_splitting(self):
        with StubService() as svc:
            provider = embed.RemoteProvider(svc.endpoint, max_batch=3)
            texts = FIXTURES["embed_batch_split"]["texts"]
            vectors = provider.embed_many(texts)
            assert len(vectors) == len(texts)
            assert svc.embed_batch_sizes == [3, 3, 2]

    def test_batch_split_same_vectors(self):
        with StubService() as svc:
            one = embed.RemoteProvider(svc.endpoint, max_batch=64)
            two = embed.RemoteProvider(svc.endpoint, max_batch=2)
            texts = FIXTURES["embed_batch_split"]["texts"]
            a = [v.values.tobytes() for v in one.embed_many(texts)]
            b = [v.values.tobytes() for v in two.embed_many(texts)]
            assert a == b

    def test_empty_batch_never_hits_the_wire(self):
        with StubService() as svc:
            provider = embed.RemoteProvider(svc.endpoint)
            assert provider.embed_many([]) == []
            assert svc.embed_batch_sizes == []

    def test_http_error_is_protocol_error(self):
        with StubService() as svc:
            provider = embed.RemoteProvider(svc.endpoint + "/missing")
            with pytest.raises(ProtocolError):
                provider.embed_text("hello")  # 404 from the stub

    def test_unreachable_endpoint_is_transport_error(self):
        provider = embed.RemoteProvider("http://127.0.0.1:1", timeout=0.5)
        with pytest.raises(TransportError):
            provider.embed_text("hello")
