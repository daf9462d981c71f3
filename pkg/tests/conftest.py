"""Shared fixtures for uncertainty_lab tests."""

import numpy as np
import pytest

from uncertainty_lab import LatticeSeq, MinimizerSpec, random_sequence


@pytest.fixture
def rng():
    """Seeded generator so every run sees the same data."""
    return np.random.default_rng(20240611)


@pytest.fixture
def line_sequence(rng):
    """A generic complex datum on Z with N=6, h=1."""
    return random_sequence(rng, 1, 6, 1.0)


@pytest.fixture
def plane_sequence(rng):
    """A generic complex datum on Z^2 with N=4, h=0.5."""
    return random_sequence(rng, 2, 4, 0.5)


@pytest.fixture
def delta():
    """The unit sequence at the origin of Z."""
    return LatticeSeq.delta(1, 0, 1.0)


@pytest.fixture
def unit_spec():
    """alpha = h = 1 on Z."""
    return MinimizerSpec(alpha=1.0, h=1.0, d=1)


def complex_noise(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)
