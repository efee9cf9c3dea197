import pytest

from tricov.weights import clear_cache


@pytest.fixture(autouse=True)
def _fresh_weight_cache():
    clear_cache()
    yield
