from __future__ import annotations

from pathlib import Path

import pytest

from penny.assumptions import assemble
from penny.extract import analyze_source
from penny.pricing import bind, load_catalog
from penny.source import SourceFile

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "examples" / "transcription.w"
CATALOG_DIR = ROOT / "catalogs"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"
DATA_DIR = Path(__file__).resolve().parent / "data"

# The worked scenario used throughout: traffic and function sizing that
# the source text cannot know. Everything else (payload size, record
# size, unit price, schedule rate) comes from the fixture's annotations.
BASELINE_ASSUMPTIONS = {
    "upload.requestsPerMonth": 100000,
    "search.requestsPerMonth": 300000,
    "upload.fn.memoryGb": "0.5",
    "upload.fn.durationS": "0.2",
    "callback.fn.memoryGb": "0.5",
    "callback.fn.durationS": "0.2",
    "search.fn.memoryGb": "0.5",
    "search.fn.durationS": "0.2",
}


def baseline_overrides() -> dict:
    from fractions import Fraction

    out: dict = {}
    for key, value in BASELINE_ASSUMPTIONS.items():
        out[key] = value if isinstance(value, int) else Fraction(value)
    return out


@pytest.fixture(scope="session")
def fixture_text() -> str:
    return FIXTURE.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fixture_source(fixture_text) -> SourceFile:
    return SourceFile(text=fixture_text, path=str(FIXTURE), version=1)


@pytest.fixture(scope="session")
def fixture_graph(fixture_source):
    _, graph = analyze_source(fixture_source)
    return graph


@pytest.fixture(scope="session")
def acme():
    return load_catalog(CATALOG_DIR / "acme-v1.json")


@pytest.fixture(scope="session")
def zephyr():
    return load_catalog(CATALOG_DIR / "zephyr-v1.json")


@pytest.fixture(scope="session")
def fixture_model(fixture_graph, acme):
    return bind(fixture_graph, acme)


@pytest.fixture(scope="session")
def fixture_assumptions(fixture_graph):
    return assemble(fixture_graph, baseline_overrides())
