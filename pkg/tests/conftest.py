import math

import pytest

from bochner.rng import RngStream

LN2 = math.log(2.0)


@pytest.fixture
def rng(request):
    # one stream per test, keyed by the test name
    return RngStream(20261015).child(request.node.name)


def within(est, target, k=3.0):
    return abs(est.mean - target) <= k * est.std_error
