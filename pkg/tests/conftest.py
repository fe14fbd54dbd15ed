from __future__ import annotations

import pytest

from specrepair.corpus import load_all, load_program


@pytest.fixture(scope="session")
def corpus():
    return load_all()


@pytest.fixture(scope="session")
def ex1():
    return load_program("ex1")


@pytest.fixture(scope="session")
def ex1_patched():
    return load_program("ex1_patched")


@pytest.fixture(scope="session")
def ex1_patched_slh():
    return load_program("ex1_patched_slh")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance-gate checks")
