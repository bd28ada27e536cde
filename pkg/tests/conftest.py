"""Shared builders for the test suite."""

import numpy as np
import pytest

from twoscale_ll.demag import FftDemag, TensorDemag
from twoscale_ll.grid import DomainMask, Grid3, constant_field
from twoscale_ll.schedule import FieldSchedule


@pytest.fixture
def box12():
    g = Grid3(12, 12, 12, 1 / 12, 1 / 12, 1 / 12)
    return g, DomainMask.full(g)


@pytest.fixture
def macrospin():
    g = Grid3(1, 1, 1)
    return g, DomainMask.full(g)


@pytest.fixture
def demag12(box12):
    g, _ = box12
    return FftDemag.for_grid(g)


@pytest.fixture
def sphere_tensor():
    return TensorDemag(np.eye(3) / 3.0)


@pytest.fixture
def static_field():
    return FieldSchedule.constant(0.7, (0.0, 0.0, 1.0))


def random_unit_field(g, mask, seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(g.shape + (3,))
    n = np.sqrt(np.sum(u**2, axis=-1, keepdims=True))
    return np.where(mask.inside[..., None], u / n, 0.0)


def up_field(g, mask):
    return constant_field(g, (0.0, 0.0, 1.0), mask)
