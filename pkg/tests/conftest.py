import numpy as np
import pytest
from scipy.spatial.transform import Rotation


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rotation(rng):
    return Rotation.random(random_state=rng).as_matrix()


def random_ball(rng, radius):
    d = rng.normal(size=3)
    return radius * rng.uniform() ** (1 / 3) * d / np.linalg.norm(d)
