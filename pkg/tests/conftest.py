import numpy as np
import pytest

from gsmm.data import load_dataset, take_subsample, to_feature_matrix
from gsmm.problems import DroProblem, SyntheticProblem, synthetic_oracles


def dro_from_bundled(name, take=None, seed=0):
    ds = load_dataset(name)
    if take is not None:
        ds = take_subsample(ds, take, seed)
    features, labels = to_feature_matrix(ds)
    return DroProblem(features, labels, name=ds.name)


@pytest.fixture(scope="session")
def german50():
    return dro_from_bundled("german", take=50)


@pytest.fixture(scope="session")
def diabetes_full():
    return dro_from_bundled("diabetes")


@pytest.fixture()
def synthetic_noisy():
    a = np.random.default_rng(3).normal(size=(6, 4))
    p = SyntheticProblem(coupling=a, mu=1.5, quartic_weight=0.5)
    return synthetic_oracles(p, noise_x=0.2, noise_y=0.1, pool_size=16, seed=11)
