from pathlib import Path

import pytest

from measuredeform.mollifier import build_mollifier

FIT_LADDER = (0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625)


@pytest.fixture(scope="session")
def psi():
    return build_mollifier(0.5)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return Path(__file__).resolve().parents[1] / "fixtures"
