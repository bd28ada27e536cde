"""Rectangular-grid discretization: vector fields on a masked box, the
mirror-ghost Neumann Laplacian, and the discrete L2/H1/H2 inner products.

Vector fields are plain numpy arrays of shape (nx, ny, nz, 3), collocated at
cell centers. Values on cells outside the domain mask are kept at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ShapeMismatchError(ValueError):
    """Field array shape does not match the grid it is used with."""


class DegenerateCellError(ValueError):
    """A masked cell holds a zero vector where a direction is required."""


@dataclass(frozen=True)
class Grid3:
    """Cell counts, spacings and origin of a rectangular grid.

    A 1x1x1 grid is the macrospin degenerate case (no spatial structure).
    """

    nx: int
    ny: int
    nz: int
    hx: float = 1.0
    hy: float = 1.0
    hz: float = 1.0
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError("cell counts must be >= 1")
        if min(self.hx, self.hy, self.hz) <= 0:
            raise ValueError("cell spacings must be > 0")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def spacings(self) -> tuple[float, float, float]:
        return (self.hx, self.hy, self.hz)

    @property
    def cell_volume(self) -> float:
        return self.hx * self.hy * self.hz

    @property
    def is_macrospin(self) -> bool:
        return self.shape == (1, 1, 1)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coordinate arrays (broadcastable to the grid shape)."""
        ox, oy, oz = self.origin
        x = ox + (np.arange(self.nx) + 0.5) * self.hx
        y = oy + (np.arange(self.ny) + 0.5) * self.hy
        z = oz + (np.arange(self.nz) + 0.5) * self.hz
        return (
            x[:, None, None],
            y[None, :, None],
            z[None, None, :],
        )


@dataclass(frozen=True)
class EllipsoidSpec:
    """Axis-aligned ellipsoid with semi-axes a >= b >= c > 0."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a >= self.b >= self.c > 0):
            raise ValueError("semi-axes must satisfy a >= b >= c > 0")


@dataclass(frozen=True)
class DomainMask:
    """Per-cell indicator of the magnetic body inside the bounding grid."""

    inside: np.ndarray  # bool, shape (nx, ny, nz)
    cell_volume: float

    def __post_init__(self):
        if not np.any(self.inside):
            raise ValueError("mask must contain at least one cell")
        if self.cell_volume <= 0:
            raise ValueError("cell volume must be > 0")

    @property
    def volume(self) -> float:
        return float(np.count_nonzero(self.inside)) * self.cell_volume

    @staticmethod
    def full(g: Grid3) -> "DomainMask":
        return DomainMask(np.ones(g.shape, dtype=bool), g.cell_volume)

    @staticmethod
    def ellipsoid(g: Grid3, e: EllipsoidSpec,
                  center: tuple[float, float, float] | None = None) -> "DomainMask":
        """Staircase mask of an axis-aligned ellipsoid embedded in the box."""
        x, y, z = g.cell_centers()
        if center is None:
            ox, oy, oz = g.origin
            center = (ox + g.nx * g.hx / 2,
                      oy + g.ny * g.hy / 2,
                      oz + g.nz * g.hz / 2)
        r2 = ((x - center[0]) / e.a) ** 2 + ((y - center[1]) / e.b) ** 2 \
            + ((z - center[2]) / e.c) ** 2
        return DomainMask(r2 <= 1.0, g.cell_volume)


def _check_field(u: np.ndarray, g: Grid3) -> None:
    if u.shape != g.shape + (3,):
        raise ShapeMismatchError(
            f"field shape {u.shape} does not match grid {g.shape + (3,)}")


def constant_field(g: Grid3, v, mask: DomainMask | None = None) -> np.ndarray:
    """Field equal to the 3-vector v on masked cells, zero outside."""
    u = np.zeros(g.shape + (3,))
    u[...] = np.asarray(v, dtype=float)
    if mask is not None:
        u = apply_mask(u, mask)
    return u


def apply_mask(u: np.ndarray, mask: DomainMask) -> np.ndarray:
    return np.where(mask.inside[..., None], u, 0.0)


def _neighbor_terms(u: np.ndarray, inside: np.ndarray, axis: int, h: float):
    """Yield (shifted - center)/h^2 contributions for both neighbors on axis.

    Neighbors outside the mask (or outside the array) are mirror ghosts:
    their value equals the center value, so their contribution vanishes.
    This enforces the discrete homogeneous Neumann condition and keeps the
    stencil symmetric.
    """
    n = u.shape[axis]
    for shift in (+1, -1):
        diff = np.zeros_like(u)
        src = [slice(None)] * 4
        dst = [slice(None)] * 4
        if shift == +1:
            dst[axis] = slice(0, n - 1)
            src[axis] = slice(1, n)
        else:
            dst[axis] = slice(1, n)
            src[axis] = slice(0, n - 1)
        diff[tuple(dst)] = u[tuple(src)] - u[tuple(dst)]
        # zero the contribution where the neighbor cell is outside the mask
        nb_inside = np.zeros(inside.shape, dtype=bool)
        nb_inside[tuple(dst[:3])] = inside[tuple(src[:3])]
        diff = np.where(nb_inside[..., None], diff, 0.0)
        yield diff / h**2


def laplacian_neumann(u: np.ndarray, g: Grid3, mask: DomainMask) -> np.ndarray:
    """7-point Laplacian with mirror ghost cells across the mask boundary."""
    _check_field(u, g)
    out = np.zeros_like(u)
    for axis, h in enumerate(g.spacings):
        if g.shape[axis] == 1:
            continue
        for term in _neighbor_terms(u, mask.inside, axis, h):
            out += term
    return apply_mask(out, mask)


def grad_dot(u: np.ndarray, v: np.ndarray, g: Grid3, mask: DomainMask) -> np.ndarray:
    """Pointwise discrete gradient pairing sum_i (d_i u).(d_i v).

    Uses the half-sum of the two one-sided differences per axis (mirror
    ghosts across the mask boundary). For unit fields the induced
    grad_sq(m) coincides pointwise with -m.laplacian(m), which is the
    identity the parabolic reformulation relies on.
    """
    _check_field(u, g)
    _check_field(v, g)
    out = np.zeros(g.shape)
    for axis, h in enumerate(g.spacings):
        if g.shape[axis] == 1:
            continue
        du = list(_neighbor_terms(u, mask.inside, axis, h))
        dv = list(_neighbor_terms(v, mask.inside, axis, h))
        # _neighbor_terms returns (neighbor-center)/h^2; their dot product
        # times h^2/2 is the half-sum of one-sided difference pairings.
        for a, b in zip(du, dv):
            out += 0.5 * h**2 * np.einsum("...k,...k->...", a, b)
    return np.where(mask.inside, out, 0.0)


def grad_sq(u: np.ndarray, g: Grid3, mask: DomainMask) -> np.ndarray:
    """Pointwise |grad u|^2 (half-sum one-sided differences)."""
    return grad_dot(u, u, g, mask)


def dot3(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pointwise scalar product of two vector fields."""
    return np.einsum("...k,...k->...", u, v)


def cross3(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pointwise cross product (manual expansion, faster than np.cross
    on the small arrays used in macrospin stepping)."""
    out = np.empty_like(u)
    out[..., 0] = u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1]
    out[..., 1] = u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2]
    out[..., 2] = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return out


def inner_products(u: np.ndarray, v: np.ndarray, g: Grid3,
                   mask: DomainMask) -> dict[str, float]:
    """Discrete L2, H1 and H2 inner products over the masked cells.

    h2 is the L2 pairing plus the Laplacian pairing (norm-equivalent to the
    full H2 product on the Neumann domain).
    """
    _check_field(u, g)
    _check_field(v, g)
    dV = mask.cell_volume
    w = mask.inside
    l2 = float(np.sum(dot3(u, v)[w])) * dV
    h1 = l2 + float(np.sum(grad_dot(u, v, g, mask)[w])) * dV
    lu = laplacian_neumann(u, g, mask)
    lv = laplacian_neumann(v, g, mask)
    h2 = l2 + float(np.sum(dot3(lu, lv)[w])) * dV
    return {"l2": l2, "h1": h1, "h2": h2}


def norm_l2(u: np.ndarray, g: Grid3, mask: DomainMask) -> float:
    dV = mask.cell_volume
    return float(np.sqrt(np.sum(dot3(u, u)[mask.inside]) * dV))


def norm_h2(u: np.ndarray, g: Grid3, mask: DomainMask) -> float:
    return float(np.sqrt(inner_products(u, u, g, mask)["h2"]))


def normalize_pointwise(u: np.ndarray, mask: DomainMask) -> np.ndarray:
    """Scale every masked cell to unit Euclidean norm."""
    norms = np.sqrt(dot3(u, u))
    bad = mask.inside & (norms == 0.0)
    if np.any(bad):
        cell = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DegenerateCellError(f"zero vector at masked cell {cell}")
    safe = np.where(norms == 0.0, 1.0, norms)
    out = u / safe[..., None]
    return np.where(mask.inside[..., None], out, 0.0)


def mean_magnetization(u: np.ndarray, mask: DomainMask) -> np.ndarray:
    """Volume average of u over the masked cells."""
    w = mask.inside
    return np.asarray([float(np.mean(u[..., k][w])) for k in range(3)])
