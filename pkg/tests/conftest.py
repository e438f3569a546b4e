"""Shared generators for the randomized test suites."""

import numpy as np
import pytest

from agsplab.bootstrap import haar_subspace
from agsplab.subspace import Subspace, compare, complex_gaussian


def rng_for(seed):
    return np.random.default_rng(seed)


def random_subspace(rng, ambient, dim):
    """Haar-random subspace drawn from an explicit generator."""
    return haar_subspace(Subspace.full(ambient), dim, rng)


def random_unit(rng, dim):
    v = complex_gaussian(rng, dim)
    return v / np.linalg.norm(v)


def covering_pair(rng, ambient, dim_z, dim_v, min_mu=1e-6):
    """A random target and a random covering subspace, conditioned on a
    minimum overlap so inverse-power quantities stay well-conditioned."""
    for _ in range(200):
        z = random_subspace(rng, ambient, dim_z)
        v = random_subspace(rng, ambient, dim_v)
        rep = compare(z, v)
        if rep.mu >= min_mu:
            return z, v, rep
    raise AssertionError("failed to draw a covering pair")


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
