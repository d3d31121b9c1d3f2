import pytest

from ap3squares.engine import Tables


@pytest.fixture(scope="session")
def tables():
    """Shared desk-scale tables; enough for every unit test."""
    return Tables.build(50_000)


@pytest.fixture(scope="session")
def ft(tables):
    return tables.ft


@pytest.fixture(scope="session")
def pt(tables):
    return tables.pt
