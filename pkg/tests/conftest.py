import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable

from dale_forge.config import PipelineConfig
from dale_forge.embed import HashedBowProvider

FIXTURE_CORPUS = Path(__file__).parent / "data" / "fixture_corpus.jsonl"


@pytest.fixture(scope="session")
def provider():
    """Small offline provider shared across tests; 64 dims keeps things fast."""
    return HashedBowProvider(dim=64)


@pytest.fixture()
def config():
    return PipelineConfig(embed_dim=64)


@pytest.fixture(scope="session")
def fixture_corpus_path():
    assert FIXTURE_CORPUS.exists(), "bundled fixture corpus missing; run tools/make_fixture_corpus.py"
    return FIXTURE_CORPUS
