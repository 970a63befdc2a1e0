import numpy as np
import pytest

from knotfield import critical, curves


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)


@pytest.fixture(scope="session")
def trefoil_charges_2048():
    return curves.discretize(curves.make_curve("trefoil", {"gamma": 1.0}), 2048)


@pytest.fixture(scope="session")
def trefoil_critical_set(trefoil_charges_2048):
    cfg = critical.SeedingConfig(grid_resolution=30)
    return critical.find_critical_set(trefoil_charges_2048, cfg)
