"""Shared fixtures: frequently used catalog systems."""

import pytest

from morphrec.catalog import get


@pytest.fixture
def fib():
    """a -> ab, b -> a."""
    return get("fibonacci").build()


@pytest.fixture
def tm():
    """0 -> 01, 1 -> 10."""
    return get("thue_morse").build()


@pytest.fixture
def trib():
    """a -> ab, b -> ac, c -> a."""
    return get("tribonacci").build()


@pytest.fixture
def nonur():
    """0 -> 001, 1 -> 1 (x has unbounded 1-runs, not uniformly recurrent)."""
    return get("nonur_block").build()
