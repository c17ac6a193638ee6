import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from planeval.hn_model import (
    Curve,
    FreeRow,
    HNExpansion,
    Irrational,
    PowerRow,
)
from planeval.exactnum import parse_cf

settings.register_profile("planeval", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("planeval")

DATA = Path(__file__).resolve().parent.parent / "data"


def w1(a01=0):
    return HNExpansion((FreeRow(1, 1, (a01,)), PowerRow(2)))


def w3_line():
    return HNExpansion((FreeRow(4, 1, (0, 1, 2, 3)),))


def madic():
    return HNExpansion((FreeRow(1, 1, (0,)),))


def w1_irrational():
    return HNExpansion((FreeRow(1, 1, (0,)), PowerRow(2)), Irrational(parse_cf("[1; (2)]")))


def smooth_branch():
    return HNExpansion((FreeRow(3, 1, (0, 0, 0)),), Curve())


def flagship_structure():
    return HNExpansion((FreeRow(2, 1), FreeRow(8, 2)))


@pytest.fixture
def rng():
    return random.Random(20261016)


@pytest.fixture
def data_dir():
    return DATA
