import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
DATA_DIR = TESTS_DIR / "data"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def contrastive_cells():
    from lexshift.gptscore import load_contrastive_dir

    cells, failures = load_contrastive_dir(DATA_DIR / "contrastive")
    assert not failures
    return cells
