import math

import pytest

from binotrack import scenarios
from binotrack.controller import FormationGoal, Gains
from binotrack.geometry import BinocularFrame, Vec2


@pytest.fixture
def gains():
    return Gains(kappa_c=0.1, kappa_eta=1.0, kappa_xi=1.0)


@pytest.fixture
def goal():
    return FormationGoal(xi_star=1.2, eta_star=math.pi / 2, c_star=40.0)


@pytest.fixture
def frame():
    return BinocularFrame(Vec2(-10.0, 5.0), Vec2(10.0, 5.0))


@pytest.fixture
def fig3a():
    return scenarios.builtin("fig3a")
