"""Slowly varying exterior field: piecewise-linear amplitude, fixed or
rotating unit direction, optional smooth radial envelope."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import DomainMask, Grid3, apply_mask


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("direction must be nonzero")
    return v / n


@dataclass(frozen=True)
class FixedDirection:
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _unit(self.u))

    def at(self, t: float) -> np.ndarray:
        return self.u

    def rate(self, t: float) -> np.ndarray:
        return np.zeros(3)


@dataclass(frozen=True)
class RotatingDirection:
    """Great-circle rotation at angular rate omega, starting at u0 and
    turning toward u1 (within their common plane)."""

    u0: np.ndarray
    u1: np.ndarray
    omega: float

    def __post_init__(self):
        u0 = _unit(self.u0)
        e = np.asarray(self.u1, dtype=float) - np.dot(self.u1, u0) * u0
        n = np.linalg.norm(e)
        if n == 0:
            raise ValueError("u1 must not be parallel to u0")
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "u1", e / n)

    def at(self, t: float) -> np.ndarray:
        return np.cos(self.omega * t) * self.u0 + np.sin(self.omega * t) * self.u1

    def rate(self, t: float) -> np.ndarray:
        w = self.omega
        return w * (-np.sin(w * t) * self.u0 + np.cos(w * t) * self.u1)


@dataclass(frozen=True)
class ConstantEnvelope:
    def values(self, g: Grid3) -> np.ndarray:
        return np.ones(g.shape)


@dataclass(frozen=True)
class BumpEnvelope:
    """Smooth compactly supported radial bump, 1 at the center, 0 outside
    radius R: exp(1 - 1/(1 - (r/R)^2))."""

    center: tuple[float, float, float]
    radius: float

    def values(self, g: Grid3) -> np.ndarray:
        x, y, z = g.cell_centers()
        r2 = ((x - self.center[0]) ** 2 + (y - self.center[1]) ** 2
              + (z - self.center[2]) ** 2) / self.radius**2
        out = np.zeros(np.broadcast_shapes(x.shape, y.shape, z.shape))
        r2 = np.broadcast_to(r2, out.shape)
        inside = r2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out


@dataclass(frozen=True)
class FieldSchedule:
    """h_ext(t, x) = lambda(t) * chi(x) * u(t).

    lambda is piecewise linear through the given (t, value) knots; u is a
    fixed or slowly rotating unit direction; chi is a spatial envelope with
    values in [0, 1].
    """

    knots: np.ndarray  # (n, 2): times (strictly increasing), amplitudes
    direction: FixedDirection | RotatingDirection = field(
        default_factory=lambda: FixedDirection(np.array([0.0, 0.0, 1.0])))
    envelope: ConstantEnvelope | BumpEnvelope = field(
        default_factory=ConstantEnvelope)

    def __post_init__(self):
        knots = np.atleast_2d(np.asarray(self.knots, dtype=float))
        if knots.shape[1] != 2 or knots.shape[0] < 1:
            raise ValueError("knots must be an (n, 2) array of (t, lambda)")
        if knots.shape[0] > 1 and np.any(np.diff(knots[:, 0]) <= 0):
            raise ValueError("knot times must be strictly increasing")
        object.__setattr__(self, "knots", knots)

    @staticmethod
    def constant(lam: float, u, t_max: float = np.inf) -> "FieldSchedule":
        end = t_max if np.isfinite(t_max) else 1e30
        return FieldSchedule(np.array([[0.0, lam], [end, lam]]),
                             FixedDirection(np.asarray(u, dtype=float)))

    @property
    def t_min(self) -> float:
        return float(self.knots[0, 0])

    @property
    def t_max(self) -> float:
        return float(self.knots[-1, 0])

    def _check_t(self, t: float) -> None:
        if t < self.t_min or t > self.t_max:
            raise ValueError(
                f"time {t} outside schedule range [{self.t_min}, {self.t_max}]")

    def amplitude(self, t: float) -> float:
        self._check_t(t)
        return float(np.interp(t, self.knots[:, 0], self.knots[:, 1]))

    def amplitude_rate(self, t: float) -> float:
        """Piecewise-constant slope, one-sided from the right at knots."""
        self._check_t(t)
        ts, vs = self.knots[:, 0], self.knots[:, 1]
        if len(ts) == 1:
            return 0.0
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        return float((vs[i + 1] - vs[i]) / (ts[i + 1] - ts[i]))


def eval_h_ext(s: FieldSchedule, t: float, g: Grid3,
               mask: DomainMask) -> np.ndarray:
    """Sample lambda(t) chi(x) u(t) at cell centers (zero outside mask)."""
    lam = s.amplitude(t)
    chi = s.envelope.values(g)
    u = s.direction.at(t)
    return apply_mask(lam * chi[..., None] * u, mask)


def d_dt_h_ext(s: FieldSchedule, t: float, g: Grid3,
               mask: DomainMask) -> np.ndarray:
    """Exact time derivative of the schedule (right derivative at knots)."""
    lam = s.amplitude(t)
    dlam = s.amplitude_rate(t)
    chi = s.envelope.values(g)
    u = s.direction.at(t)
    du = s.direction.rate(t)
    return apply_mask(chi[..., None] * (dlam * u + lam * du), mask)
