"""Demagnetizing field operator and depolarization tensor estimates."""

import numpy as np
import pytest

from twoscale_ll.demag import (
    FftDemag,
    ModeMismatchError,
    TensorDemag,
    demag_field,
    demag_field_padded,
    demag_tensor_estimate,
)
from twoscale_ll.grid import (
    DomainMask,
    EllipsoidSpec,
    Grid3,
    constant_field,
)

from conftest import random_unit_field


def test_tensor_validation():
    with pytest.raises(ValueError):
        TensorDemag(np.array([[1.0, 0.5], [0.5, 1.0]]))
    with pytest.raises(ValueError):
        TensorDemag(np.array([[1.0, 0.2, 0.0],
                              [0.0, 1.0, 0.0],
                              [0.0, 0.0, 1.0]]))  # not symmetric
    with pytest.raises(ValueError):
        TensorDemag(np.diag([1.0, 1.0, -0.1]))  # not positive definite


def test_tensor_macrospin_only():
    g = Grid3(2, 2, 2, 0.5, 0.5, 0.5)
    mask = DomainMask.full(g)
    m = constant_field(g, (0.0, 0.0, 1.0), mask)
    with pytest.raises(ModeMismatchError):
        demag_field(TensorDemag(np.eye(3) / 3), m, g, mask)


def test_tensor_field_is_minus_Dm():
    g = Grid3(1, 1, 1)
    mask = DomainMask.full(g)
    D = np.diag([0.2, 0.3, 0.5])
    m = constant_field(g, (0.6, 0.0, 0.8), mask)
    h = demag_field(TensorDemag(D), m, g, mask)
    assert np.allclose(h[0, 0, 0], -D @ np.array([0.6, 0.0, 0.8]))


def test_fft_padding_minimum():
    g = Grid3(8, 8, 8, 0.1, 0.1, 0.1)
    with pytest.raises(ValueError):
        FftDemag(g, (12, 16, 16))
    FftDemag.for_grid(g)  # 2x default is fine


def test_fft_grid_mismatch():
    g = Grid3(8, 8, 8, 0.1, 0.1, 0.1)
    g2 = Grid3(6, 6, 6, 0.1, 0.1, 0.1)
    model = FftDemag.for_grid(g)
    mask2 = DomainMask.full(g2)
    m = constant_field(g2, (0.0, 0.0, 1.0), mask2)
    with pytest.raises(ModeMismatchError):
        demag_field(model, m, g2, mask2)


def test_operator_symmetric_nonpositive_contractive():
    # the multiplier is a negated rank-one projection: symmetric,
    # non-positive, L2 norm <= 1 (all measured on the padded box)
    g = Grid3(10, 9, 8, 0.1, 0.11, 0.12)
    mask = DomainMask.full(g)
    model = FftDemag.for_grid(g)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(g.shape + (3,))
    v = rng.standard_normal(g.shape + (3,))
    hu = demag_field_padded(model, u, g, mask)
    hv = demag_field_padded(model, v, g, mask)
    nx, ny, nz = g.shape
    suv = float(np.sum(hu[:nx, :ny, :nz] * v))
    svu = float(np.sum(hv[:nx, :ny, :nz] * u))
    assert abs(suv - svu) <= 1e-12 * max(abs(suv), 1.0)
    quad = float(np.sum(hu[:nx, :ny, :nz] * u))
    assert quad <= 1e-12
    assert np.sqrt(np.sum(hu**2)) <= np.sqrt(np.sum(u**2)) * (1.0 + 1e-12)


def test_restricted_field_matches_padded_restriction():
    g = Grid3(6, 6, 6, 0.1, 0.1, 0.1)
    mask = DomainMask.full(g)
    model = FftDemag.for_grid(g)
    m = random_unit_field(g, mask, 7)
    h = demag_field(model, m, g, mask)
    hp = demag_field_padded(model, m, g, mask)
    assert np.allclose(h, hp[:6, :6, :6])


def test_sphere_interior_field_near_minus_third():
    n = 32
    g = Grid3(n, n, n, 4.0 / n, 4.0 / n, 4.0 / n, origin=(-2.0, -2.0, -2.0))
    mask = DomainMask.ellipsoid(g, EllipsoidSpec(1.0, 1.0, 1.0))
    model = FftDemag.for_grid(g)
    m = constant_field(g, (0.0, 0.0, 1.0), mask)
    h = demag_field(model, m, g, mask)
    x, y, z = g.cell_centers()
    core = mask.inside & (x**2 + y**2 + z**2 < 0.8**2)
    mean = np.array([h[..., k][core].mean() for k in range(3)])
    assert abs(mean[2] + 1.0 / 3.0) < 0.03 / 3.0
    assert np.max(np.abs(mean[:2])) < 0.01


def test_tensor_estimate_sphere():
    D = demag_tensor_estimate(EllipsoidSpec(1.0, 1.0, 1.0), 24)
    assert abs(np.trace(D) - 1.0) < 0.03
    assert np.max(np.abs(np.diag(D) - 1.0 / 3.0)) < 0.03 / 3.0
    assert np.max(np.abs(D - np.diag(np.diag(D)))) < 1e-6


def test_tensor_estimate_prolate_ordering():
    # long axis has the smallest depolarization factor
    D = demag_tensor_estimate(EllipsoidSpec(3.0, 1.0, 1.0), 24)
    d = np.diag(D)
    assert d[0] < d[1]
    assert d[0] < d[2]
    assert d[1] == pytest.approx(d[2], rel=0.05)
    # analytic prolate factor N_a = (1-e^2)/e^3 (atanh e - e), e^2 = 1-(c/a)^2
    e = np.sqrt(1.0 - (1.0 / 3.0) ** 2)
    Na = (1.0 - e**2) / e**3 * (np.arctanh(e) - e)
    assert d[0] == pytest.approx(Na, rel=0.08)


def test_tensor_estimate_resolution_floor():
    with pytest.raises(ValueError):
        demag_tensor_estimate(EllipsoidSpec(1.0, 1.0, 1.0), 8)
