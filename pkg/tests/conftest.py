import numpy as np
import pytest

from minipost import build_mini_space, build_structured_mesh
from minipost.fe_space import MixedState


@pytest.fixture(scope="session")
def mesh4():
    return build_structured_mesh(4)


@pytest.fixture(scope="session")
def space4(mesh4):
    return build_mini_space(mesh4)


@pytest.fixture(scope="session")
def mesh6():
    return build_structured_mesh(6)


@pytest.fixture(scope="session")
def space6(mesh6):
    return build_mini_space(mesh6)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(space, rng, scale=1.0, time=0.0) -> MixedState:
    """Random mixed state, used where any admissible coefficients will do."""
    return MixedState(space,
                      scale * rng.standard_normal(space.n_vel),
                      scale * rng.standard_normal(space.n_pre),
                      time)
