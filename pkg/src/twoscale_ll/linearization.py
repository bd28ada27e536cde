"""Linearized stability machinery around equilibria: the linear operator L
and quadratic remainder R of the parabolic form, their specialization at
the constant equilibria +-u of an ellipsoid, the H2 dissipation quadratic
form, admissible-perturbation sampling, and the lambda scan that locates
the dissipative regime."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .demag import DemagModel, TensorDemag, demag_field
from .grid import (
    DomainMask,
    Grid3,
    apply_mask,
    constant_field,
    cross3,
    dot3,
    grad_dot,
    grad_sq,
    inner_products,
    laplacian_neumann,
    normalize_pointwise,
)
from .schedule import FieldSchedule, eval_h_ext


@dataclass(frozen=True)
class ConstantEquilibrium:
    """Constant equilibrium +-u of an ellipsoid under the field lambda*u,
    where u is a unit eigenvector of the depolarization tensor with
    eigenvalue d."""

    u: np.ndarray
    d: float
    lam: float
    sign: int  # +1 or -1

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if abs(np.linalg.norm(u) - 1.0) > 1e-10:
            raise ValueError("u must be a unit vector")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.d <= 0 or self.lam < 0:
            raise ValueError("d must be > 0 and lambda >= 0")
        object.__setattr__(self, "u", u)

    def check_eigenvector(self, D: np.ndarray, tol: float = 1e-10) -> None:
        if np.max(np.abs(D @ self.u - self.d * self.u)) > tol:
            raise ValueError("u is not an eigenvector of D for eigenvalue d")


def linearized_apply(t: float, m_eq: np.ndarray, delta: np.ndarray,
                     alpha: float, g: Grid3, mask: DomainMask,
                     demag: DemagModel, sched: FieldSchedule) -> np.ndarray:
    """Linear part L(t, m_eq) delta of F(t, m_eq + delta) + alpha*Lap(delta).

    Seven terms: the two exchange-energy couplings, the torque of delta
    against h_T(m_eq), the torque of m_eq against (Lap + h_d)(delta), and
    the three damping couplings through h_d(m_eq) + h_ext.
    """
    hd_eq = demag_field(demag, m_eq, g, mask)
    h_ext = eval_h_ext(sched, t, g, mask)
    hde = hd_eq + h_ext
    hd_delta = demag_field(demag, delta, g, mask)
    if g.is_macrospin:
        lap_delta = np.zeros_like(delta)
        gsq_eq = np.zeros(g.shape)
        gdot = np.zeros(g.shape)
        h_T_eq = hde
    else:
        lap_delta = laplacian_neumann(delta, g, mask)
        gsq_eq = grad_sq(m_eq, g, mask)
        gdot = grad_dot(m_eq, delta, g, mask)
        h_T_eq = hde + laplacian_neumann(m_eq, g, mask)
    out = (alpha * gsq_eq[..., None] * delta
           + 2.0 * alpha * gdot[..., None] * m_eq
           + cross3(delta, h_T_eq)
           + cross3(m_eq, lap_delta + hd_delta)
           - alpha * cross3(delta, cross3(m_eq, hde))
           - alpha * cross3(m_eq, cross3(delta, hde))
           - alpha * cross3(m_eq, cross3(m_eq, hd_delta)))
    return apply_mask(out, mask)


def remainder_apply(t: float, m_eq: np.ndarray, delta: np.ndarray,
                    alpha: float, g: Grid3, mask: DomainMask,
                    demag: DemagModel, sched: FieldSchedule) -> np.ndarray:
    """Quadratic-and-higher remainder R(t, m_eq)(delta) of the expansion.

    Includes the quadratic exchange coupling |grad delta|^2 m_eq, which the
    expansion of F produces alongside the gradient cross terms; without it
    the decomposition F(m_eq + delta) - F(m_eq) = L delta + R(delta) would
    fail at second order.
    """
    hd_eq = demag_field(demag, m_eq, g, mask)
    h_ext = eval_h_ext(sched, t, g, mask)
    hde = hd_eq + h_ext
    hd_delta = demag_field(demag, delta, g, mask)
    if g.is_macrospin:
        lap_delta = np.zeros_like(delta)
        gdot = np.zeros(g.shape)
        gsq_d = np.zeros(g.shape)
    else:
        lap_delta = laplacian_neumann(delta, g, mask)
        gdot = grad_dot(m_eq, delta, g, mask)
        gsq_d = grad_sq(delta, g, mask)
    out = (2.0 * alpha * gdot[..., None] * delta
           + alpha * gsq_d[..., None] * (m_eq + delta)
           + cross3(delta, lap_delta + hd_delta)
           - alpha * cross3(delta, cross3(delta, hde))
           - alpha * cross3(delta, cross3(m_eq, hd_delta))
           - alpha * cross3(m_eq, cross3(delta, hd_delta))
           - alpha * cross3(delta, cross3(delta, hd_delta)))
    return apply_mask(out, mask)


def constant_equilibrium_apply(ce: ConstantEquilibrium, delta: np.ndarray,
                               alpha: float, g: Grid3, mask: DomainMask,
                               demag: DemagModel) -> np.ndarray:
    """Closed form of L at the constant equilibria +-u:

        (lam -+ d) delta ^ u  +- u ^ (Lap delta + h_d delta)
        + alpha (d -+ lam) u ^ (delta ^ u) - alpha u ^ (u ^ h_d delta).
    """
    s = float(ce.sign)
    u = constant_field(g, ce.u, mask)
    hd_delta = demag_field(demag, delta, g, mask)
    if g.is_macrospin:
        lap_delta = np.zeros_like(delta)
    else:
        lap_delta = laplacian_neumann(delta, g, mask)
    out = ((ce.lam - s * ce.d) * cross3(delta, u)
           + s * cross3(u, lap_delta + hd_delta)
           + alpha * (ce.d - s * ce.lam) * cross3(u, cross3(delta, u))
           - alpha * cross3(u, cross3(u, hd_delta)))
    return apply_mask(out, mask)


def h2_quadratic_form(t: float, m_eq: np.ndarray, delta: np.ndarray,
                      alpha: float, g: Grid3, mask: DomainMask,
                      demag: DemagModel, sched: FieldSchedule) -> float:
    """(L delta | delta)_L2 + (Lap L delta | Lap delta)_L2."""
    Ld = linearized_apply(t, m_eq, delta, alpha, g, mask, demag, sched)
    return inner_products(Ld, delta, g, mask)["h2"]


def _smooth_random_field(g: Grid3, mask: DomainMask, rng: np.random.Generator,
                         max_mode: int = 3) -> np.ndarray:
    """Random field built from the lowest Neumann cosine modes of the box
    (discretely Neumann-compatible by construction)."""
    coeffs = np.zeros(g.shape + (3,))
    kx = min(max_mode, g.nx)
    ky = min(max_mode, g.ny)
    kz = min(max_mode, g.nz)
    coeffs[:kx, :ky, :kz, :] = rng.standard_normal((kx, ky, kz, 3))
    tau = scipy.fft.idctn(coeffs, type=2, norm="ortho", axes=(0, 1, 2))
    return apply_mask(tau, mask)


def sample_admissible_perturbation(m_eq: np.ndarray, s: float, seed: int,
                                   g: Grid3, mask: DomainMask,
                                   max_mode: int = 3) -> np.ndarray:
    """Random admissible perturbation: delta = normalize(m_eq + s*tau) - m_eq
    with tau a smooth random tangent field. Guarantees |m_eq + delta| = 1
    exactly and the sphere constraint |delta|^2 = -2 m_eq . delta + O(s^3)
    behavior."""
    if not 0 < s < 1:
        raise ValueError("perturbation size s must be in (0, 1)")
    rng = np.random.default_rng(seed)
    tau = _smooth_random_field(g, mask, rng, max_mode)
    tau = tau - dot3(tau, m_eq)[..., None] * m_eq
    # normalize the typical tangent magnitude so s sets the actual scale
    w = mask.inside
    rms = float(np.sqrt(np.mean(dot3(tau, tau)[w])))
    if rms == 0.0:
        raise ValueError("degenerate tangent sample; change the seed")
    tau = tau / rms
    delta = normalize_pointwise(m_eq + s * tau, mask) - m_eq
    return apply_mask(delta, mask)


def dissipation_scan(D: np.ndarray, u: np.ndarray, lambdas, alpha: float,
                     s: float, n_samples: int, g: Grid3, mask: DomainMask,
                     seed: int = 0) -> dict:
    """Rayleigh-quotient scan of the H2 form over admissible perturbations.

    For each lambda and each sign, reports the worst-case (largest) value of
    (L delta | delta)_H2 / ||delta||_H2^2 over sampled admissible delta,
    and an empirical dissipation constant for the + branch. Also reports
    the smallest lambda at which the + branch is uniformly negative over
    the samples.
    """
    D = np.asarray(D, dtype=float)
    u = np.asarray(u, dtype=float)
    d = float(u @ D @ u)
    demag = TensorDemag(D) if g.is_macrospin else None
    if demag is None:
        raise ValueError("dissipation_scan currently runs in macrospin mode")
    rows = []
    threshold = None
    for lam in lambdas:
        sched = FieldSchedule.constant(lam, u)
        for sign in (+1, -1):
            ce = ConstantEquilibrium(u, d, float(lam), sign)
            m_eq = constant_field(g, sign * u, mask)
            worst = -np.inf
            for j in range(n_samples):
                delta = sample_admissible_perturbation(
                    m_eq, s, seed + j, g, mask)
                num = h2_quadratic_form(0.0, m_eq, delta, alpha, g, mask,
                                        demag, sched)
                den = inner_products(delta, delta, g, mask)["h2"]
                worst = max(worst, num / den)
            c_lin = -worst if (sign == +1 and worst < 0) else np.nan
            rows.append({"lam": float(lam), "sign": sign,
                         "worst_ratio": worst, "c_lin": c_lin})
            if sign == +1 and worst < 0 and threshold is None:
                threshold = float(lam)
    return {"rows": rows, "plus_branch_negative_from": threshold}
