import pytest

from mlvariety import budget


@pytest.fixture(autouse=True)
def restore_budget():
    saved = budget.point_budget()
    yield
    budget.set_point_budget(saved)
    budget.reset_work()
