import pytest

from cfarepair.solver.session import Session


@pytest.fixture(scope="session")
def session():
    with Session() as s:
        yield s
