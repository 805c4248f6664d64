import pytest

from waring_gaps import RepTable, WaringParams, sieve_rep


@pytest.fixture(scope="session")
def table_3_1() -> RepTable:
    return sieve_rep(WaringParams(3, 1), 300)


@pytest.fixture(scope="session")
def table_3_2() -> RepTable:
    return sieve_rep(WaringParams(3, 2), 3200)


@pytest.fixture(scope="session")
def table_3_3() -> RepTable:
    return sieve_rep(WaringParams(3, 3), 3200)


@pytest.fixture(scope="session")
def table_4_4() -> RepTable:
    return sieve_rep(WaringParams(4, 4), 10_000)
