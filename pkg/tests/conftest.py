import json
from pathlib import Path

import pytest

from stave import Scenario, validate_scenario

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIOS_DIR = REPO_ROOT / "scenarios"


@pytest.fixture
def scenarios_dir() -> Path:
    return SCENARIOS_DIR


def make_scenario(**sections) -> Scenario:
    """Validated scenario from keyword sections, with test-friendly defaults."""
    doc = {"schema": "stave-scenario/1", "seed": 0, "duration_s": 2.0}
    doc.update(sections)
    return validate_scenario(doc)


def load_fixture(name: str) -> dict:
    return json.loads((SCENARIOS_DIR / name).read_text(encoding="utf-8"))
