from pathlib import Path

import pytest

from matedrip import load_machine

MACHINES = Path(__file__).resolve().parent.parent / "machines"


@pytest.fixture(scope="session")
def even():
    return load_machine(MACHINES / "even.rm")


@pytest.fixture(scope="session")
def mod3():
    return load_machine(MACHINES / "mod3.rm")


@pytest.fixture(scope="session")
def eq():
    return load_machine(MACHINES / "eq.rm")


@pytest.fixture(scope="session")
def trap():
    return load_machine(MACHINES / "trap.rm")


def machine_path(name: str) -> str:
    return str(MACHINES / name)
