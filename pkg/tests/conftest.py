import pytest

from twomode.params import Scenario, rubidium_default_scenario


def unit_scenario(**changes) -> Scenario:
    """Dimensionless test units: omega0 = m1 = m2 = mw = 1, Delta1 = 10."""
    base = Scenario(omega0=1.0, delta=0.0, ebar=100.5, delta1=10.0, delta2=0.0, gamma1=0.1, gamma2=0.1,
                    m1=1.0, m2=1.0, mw=1.0, n_atoms=1.0)
    return base.replace(**changes)


@pytest.fixture
def units():
    return unit_scenario


@pytest.fixture(scope="session")
def rb():
    return rubidium_default_scenario()
