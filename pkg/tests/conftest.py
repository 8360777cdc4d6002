from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fig1_dir() -> Path:
    return FIXTURES / "fig1"


@pytest.fixture(scope="session")
def fig2_dir() -> Path:
    return FIXTURES / "fig2"


@pytest.fixture(scope="session")
def kitchen_dir() -> Path:
    return FIXTURES / "kitchen"


@pytest.fixture(scope="session")
def empty_dir() -> Path:
    return FIXTURES / "empty"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return FIXTURES / "vba_corpus"


def write_bundle(root: Path, manifest: dict, modules: dict[str, str] | None = None) -> Path:
    """Write a snapshot bundle for tests; returns the bundle directory."""
    root.mkdir(parents=True, exist_ok=True)
    (root / "workbook.json").write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    if modules:
        (root / "modules").mkdir(exist_ok=True)
        for filename, source in modules.items():
            (root / "modules" / filename).write_text(source, encoding="utf-8")
    return root


def empty_manifest(name: str = "T") -> dict:
    return {"name": name, "sheets": [], "forms": [], "namedRanges": [], "modules": []}
