import pytest
from hypothesis import HealthCheck, settings

from stransform.measures import Atoms, FreePoisson, Pareto, PointMass
from stransform.transforms import NumericSTransform, closed_form_handle

# quadrature makes single examples slow; no per-example deadline
settings.register_profile('numeric', deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile('numeric')


@pytest.fixture
def two_atoms():
    return Atoms(((1.0, 0.5), (2.0, 0.5)))


@pytest.fixture
def free_poisson():
    return FreePoisson()


@pytest.fixture
def free_poisson_handle():
    return closed_form_handle('free_poisson')


@pytest.fixture
def pareto2():
    return Pareto(2.0)


@pytest.fixture
def point_mass_handle():
    return NumericSTransform(PointMass(2.0))
