"""Shared helpers for the test suite."""

import numpy as np
import pytest

from foloc.bench import random_stable_system
from foloc.lti import DiscreteModel, discretize


def make_discrete(seed: int = 0, n: int = 8, m: int = 4, p: int = 3,
                  fs: float = 30.0) -> DiscreteModel:
    """Seeded random stable plant, already discretized."""
    model = random_stable_system(n, m, p, seed=seed)
    return discretize(model, 1.0 / fs)


@pytest.fixture
def small_model() -> DiscreteModel:
    return make_discrete(seed=7)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)
