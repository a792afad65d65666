from pathlib import Path

import pytest

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


@pytest.fixture(scope="session")
def problems_dir() -> Path:
    return PROBLEMS


def read_problem(name: str) -> str:
    return (PROBLEMS / name).read_text()
