import pytest

import saddlescape as ss


@pytest.fixture
def corpus():
    return ss.default_corpus()


@pytest.fixture
def double_well():
    return ss.double_well()


@pytest.fixture
def quad_saddle():
    return ss.quadratic_saddle((1.0, -1.0))
