from __future__ import annotations

import pytest

from ssusy_em import shapeinv, susy2
from ssusy_em.domain import AlgebraicMass, Grid, HyperbolicMass, SIParams


@pytest.fixture(scope="session")
def osc_profile():
    return HyperbolicMass(2.0, 1.0)


@pytest.fixture(scope="session")
def osc_params():
    # hyperbolic benchmark: tied rates, evenly spaced levels
    return SIParams(4.0, 4.0, 5.0, 1.0)


@pytest.fixture(scope="session")
def model_grid():
    return Grid.symmetric(12.0, 6000)


@pytest.fixture(scope="session")
def osc_model(osc_profile, osc_params, model_grid):
    return shapeinv.build_model(osc_profile, osc_params, model_grid)


@pytest.fixture(scope="session")
def osc_scheme(osc_profile, osc_params):
    # h = 0.005 working grid for operator residuals
    return susy2.build_scheme(osc_profile, osc_params, Grid.symmetric(6.0, 2401))


@pytest.fixture(scope="session")
def rational_profile():
    return AlgebraicMass(2.0)


@pytest.fixture(scope="session")
def rational_params():
    # repulsive core benchmark: lambda below the branch split
    return SIParams(2.0, 4.0, 5.0, 1.0)
