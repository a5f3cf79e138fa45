import pytest

from helpers import FIXTURES, oracle_model

import treelogic


@pytest.fixture
def m1():
    return oracle_model()


@pytest.fixture
def fig_frame():
    return treelogic.load_frame(FIXTURES / "frame_two_level.json")
