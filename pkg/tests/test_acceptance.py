"""End-to-end acceptance properties of the toolkit, with pinned tolerances.

Each test exercises one headline guarantee: demag correctness, structure
preservation, the energy-decay identity, parabolic equivalence, exactness
of the linearization, the constant-equilibrium closed form, the dissipation
dichotomy, projector commutation, the two-time-scale limit, and hysteresis.
"""

import numpy as np
import pytest

from twoscale_ll.demag import (
    FftDemag,
    TensorDemag,
    demag_field,
    demag_field_padded,
    demag_tensor_estimate,
)
from twoscale_ll.dynamics import (
    SolverConfig,
    energy,
    integrate,
    ll_rhs,
    parabolic_rhs_F,
    step,
    total_field,
)
from twoscale_ll.experiments import (
    AsymptoticsPlan,
    HysteresisPlan,
    run_asymptotics,
    run_hysteresis,
)
from twoscale_ll.grid import (
    DomainMask,
    EllipsoidSpec,
    Grid3,
    constant_field,
    cross3,
    dot3,
    laplacian_neumann,
    norm_l2,
    normalize_pointwise,
)
from twoscale_ll.linearization import (
    ConstantEquilibrium,
    constant_equilibrium_apply,
    dissipation_scan,
    h2_quadratic_form,
    linearized_apply,
    remainder_apply,
    sample_admissible_perturbation,
)
from twoscale_ll.schedule import (
    FieldSchedule,
    FixedDirection,
    RotatingDirection,
    d_dt_h_ext,
    eval_h_ext,
)
from twoscale_ll.spectral import commutator_PkF, project_Pk

from conftest import random_unit_field, up_field

UZ = np.array([0.0, 0.0, 1.0])


def _box(n):
    g = Grid3(n, n, n, 1.0 / n, 1.0 / n, 1.0 / n)
    return g, DomainMask.full(g)


def test_acceptance_01_demag_correctness():
    # uniformly magnetized sphere at 64^3: interior field within 3% of -m/3
    n = 64
    g = Grid3(n, n, n, 4.0 / n, 4.0 / n, 4.0 / n, origin=(-2.0, -2.0, -2.0))
    mask = DomainMask.ellipsoid(g, EllipsoidSpec(1.0, 1.0, 1.0))
    model = FftDemag.for_grid(g)
    m = constant_field(g, UZ, mask)
    h = demag_field(model, m, g, mask)
    mean = np.array([h[..., k][mask.inside].mean() for k in range(3)])
    assert abs(mean[2] - (-1.0 / 3.0)) < 0.03 * (1.0 / 3.0)
    assert np.max(np.abs(mean[:2])) < 0.03 * (1.0 / 3.0)

    # tensor estimate: trace within 3% of 1
    D = demag_tensor_estimate(EllipsoidSpec(1.0, 1.0, 1.0), 32)
    assert abs(np.trace(D) - 1.0) < 0.03

    # operator symmetry and norm bound to 1e-12 (on the padded box)
    gb, mb = _box(12)
    mdl = FftDemag.for_grid(gb)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(gb.shape + (3,))
    v = rng.standard_normal(gb.shape + (3,))
    hu = demag_field_padded(mdl, u, gb, mb)
    hv = demag_field_padded(mdl, v, gb, mb)
    suv = float(np.sum(hu[:12, :12, :12] * v))
    svu = float(np.sum(hv[:12, :12, :12] * u))
    assert abs(suv - svu) <= 1e-12 * max(abs(suv), 1.0)
    assert np.sqrt(np.sum(hu**2)) <= np.sqrt(np.sum(u**2)) * (1.0 + 1e-12)


def test_acceptance_02_structure_preservation():
    sched = FieldSchedule.constant(0.7, UZ)

    # macrospin, 1e4 steps
    g, mask = _box(1)
    demag = TensorDemag(np.eye(3) / 3.0)
    cfg = SolverConfig(epsilon=0.1, alpha=1.0, T=10.0, dt=1e-3,
                       integrator="projected-explicit")
    m = constant_field(g, np.array([0.8, 0.0, 0.6]), mask)
    energies = [energy(0.0, m, cfg, g, mask, demag, sched)]
    worst_norm = 0.0
    for i in range(10_000):
        m = step(i * cfg.dt, m, cfg.dt, cfg, g, mask, demag, sched)
        worst_norm = max(worst_norm, abs(
            float(np.sqrt(dot3(m, m))[0, 0, 0]) - 1.0))
        energies.append(energy((i + 1) * cfg.dt, m, cfg, g, mask, demag,
                               sched))
    assert worst_norm <= 2.0 * np.finfo(float).eps
    increases = np.diff(energies)
    assert np.max(increases) <= 1e-13 * max(abs(energies[0]), 1.0)

    # 16^3 grid, 1e3 steps from a perturbed equilibrium
    g, mask = _box(16)
    demag = FftDemag.for_grid(g)
    cfg = SolverConfig(epsilon=0.5, alpha=1.0, T=0.2, dt=2e-4,
                       integrator="projected-explicit")
    m_eq = up_field(g, mask)
    m = normalize_pointwise(
        m_eq + sample_admissible_perturbation(m_eq, 0.3, 7, g, mask), mask)
    energies = [energy(0.0, m, cfg, g, mask, demag, sched)]
    worst_norm = 0.0
    for i in range(1_000):
        m = step(i * cfg.dt, m, cfg.dt, cfg, g, mask, demag, sched)
        worst_norm = max(worst_norm, float(np.max(np.abs(
            np.sqrt(dot3(m, m))[mask.inside] - 1.0))))
        energies.append(energy((i + 1) * cfg.dt, m, cfg, g, mask, demag,
                               sched))
    assert worst_norm <= 2.0 * np.finfo(float).eps
    assert np.max(np.diff(energies)) <= 1e-13 * max(abs(energies[0]), 1.0)


def _energy_decay_defect(dt, sched):
    g, mask = _box(12)
    demag = FftDemag.for_grid(g)
    cfg = SolverConfig(epsilon=0.5, alpha=1.0, T=0.0, dt=dt,
                       integrator="projected-explicit")
    m_eq = up_field(g, mask)
    m0 = m_eq + sample_admissible_perturbation(m_eq, 0.3, 7, g, mask)
    e0 = energy(0.0, m0, cfg, g, mask, demag, sched)
    m1 = step(0.0, m0, dt, cfg, g, mask, demag, sched)
    e1 = energy(dt, m1, cfg, g, mask, demag, sched)
    h = total_field(0.0, m0, g, mask, demag, sched)
    pred = -(cfg.alpha / cfg.epsilon) * norm_l2(cross3(m0, h), g, mask) ** 2
    pred -= float(np.sum(dot3(m0, d_dt_h_ext(sched, 0.0, g, mask))
                         [mask.inside])) * mask.cell_volume
    return abs((e1 - e0) / dt - pred) / abs(pred)


def test_acceptance_03_energy_decay_identity():
    for sched in (FieldSchedule.constant(0.7, UZ),
                  FieldSchedule(np.array([[0.0, 0.7], [1.0, 1.7]]),
                                FixedDirection(UZ))):
        d_coarse = _energy_decay_defect(2e-4, sched)
        d_fine = _energy_decay_defect(1e-4, sched)
        assert d_coarse <= 0.05
        assert d_fine <= 0.65 * d_coarse


def test_acceptance_04_parabolic_equivalence():
    g, mask = _box(12)
    demag = FftDemag.for_grid(g)
    sched = FieldSchedule.constant(0.7, UZ)
    cfg = SolverConfig(epsilon=0.3, alpha=1.2, T=1.0, dt=1e-3)
    for seed in range(100):
        m = random_unit_field(g, mask, seed)
        lhs = cfg.alpha * laplacian_neumann(m, g, mask) \
            + parabolic_rhs_F(0.0, m, cfg, g, mask, demag, sched)
        rhs = cfg.epsilon * ll_rhs(0.0, m, cfg, g, mask, demag, sched)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def _decomposition_gap(g, mask, demag, s, seed):
    sched = FieldSchedule.constant(0.7, UZ)
    alpha = 1.0
    m_eq = up_field(g, mask)
    delta = sample_admissible_perturbation(m_eq, s, seed, g, mask)
    cfg = SolverConfig(epsilon=1.0, alpha=alpha, T=1.0, dt=1e-3)
    f1 = parabolic_rhs_F(0.0, m_eq + delta, cfg, g, mask, demag, sched)
    f0 = parabolic_rhs_F(0.0, m_eq, cfg, g, mask, demag, sched)
    ld = linearized_apply(0.0, m_eq, delta, alpha, g, mask, demag, sched)
    rd = remainder_apply(0.0, m_eq, delta, alpha, g, mask, demag, sched)
    gap = np.max(np.abs(f1 - f0 - ld - rd))
    scale = max(np.max(np.abs(f1 - f0)), np.max(np.abs(ld)))
    return gap / scale, delta, m_eq, rd


def test_acceptance_05_linearization_exactness():
    # macrospin to relative 1e-12
    g, mask = _box(1)
    rel, *_ = _decomposition_gap(g, mask, TensorDemag(np.eye(3) / 3.0),
                                 0.1, 1)
    assert rel <= 1e-12

    # grid to relative 1e-8
    g, mask = _box(12)
    demag = FftDemag.for_grid(g)
    rel, *_ = _decomposition_gap(g, mask, demag, 0.1, 2)
    assert rel <= 1e-8

    # remainder scaling slope >= 1.95 over s in {1e-2, 1e-3, 1e-4}
    sched = FieldSchedule.constant(0.7, UZ)
    m_eq = up_field(g, mask)
    norms = []
    for s in (1e-2, 1e-3, 1e-4):
        delta = sample_admissible_perturbation(m_eq, s, 3, g, mask)
        rd = remainder_apply(0.0, m_eq, delta, 1.0, g, mask, demag, sched)
        norms.append(norm_l2(rd, g, mask))
    slopes = np.log10(np.array(norms[:-1]) / np.array(norms[1:]))
    assert np.all(slopes >= 1.95)


def test_acceptance_06_constant_equilibrium_formula():
    g, mask = _box(1)
    D = np.diag([0.2, 0.3, 0.5])
    demag = TensorDemag(D)
    alpha = 0.9
    for lam, sign in ((0.7, +1), (0.7, -1), (0.0, +1), (1.5, -1)):
        ce = ConstantEquilibrium(UZ, 0.5, lam, sign)
        ce.check_eigenvector(D)
        sched = FieldSchedule.constant(lam, UZ)
        m_eq = constant_field(g, sign * UZ, mask)
        rng = np.random.default_rng(5)
        for _ in range(5):
            delta = np.zeros(g.shape + (3,))
            delta[0, 0, 0] = rng.standard_normal(3)
            a = constant_equilibrium_apply(ce, delta, alpha, g, mask, demag)
            b = linearized_apply(0.0, m_eq, delta, alpha, g, mask, demag,
                                 sched)
            scale = max(float(np.max(np.abs(a))), 1.0)
            assert np.max(np.abs(a - b)) <= 1e-12 * scale

    # sampled perturbations satisfy |delta|^2 = -2 u . delta exactly
    m_eq = up_field(g, mask)
    for s in (1e-2, 1e-3):
        delta = sample_admissible_perturbation(m_eq, s, 8, g, mask)
        gap = np.abs(dot3(delta, delta) + 2.0 * dot3(m_eq, delta))
        assert np.max(gap[mask.inside]) <= 10.0 * s**3


def test_acceptance_07_dissipation_dichotomy():
    g, mask = _box(1)
    D = np.eye(3) / 3.0
    demag = TensorDemag(D)
    alpha, s, n_samples = 1.0, 1e-2, 200

    # every sample of the H2 form ratio: negative at +u, positive at -u,
    # for lambda >= 20
    for lam in (20.0, 40.0):
        sched = FieldSchedule.constant(lam, UZ)
        for sign in (+1, -1):
            m_eq = constant_field(g, sign * UZ, mask)
            for j in range(n_samples):
                delta = sample_admissible_perturbation(m_eq, s, j, g, mask)
                val = h2_quadratic_form(0.0, m_eq, delta, alpha, g, mask,
                                        demag, sched)
                assert (val < 0.0) if sign == +1 else (val > 0.0)

    # worst-case +-branch ratio vs lambda: affine with slope -alpha +- 15%
    lambdas = [5.0, 10.0, 20.0, 40.0]
    out = dissipation_scan(D, UZ, lambdas, alpha, s, n_samples, g, mask)
    worst = [r["worst_ratio"] for r in out["rows"] if r["sign"] == +1]
    slope = np.polyfit(lambdas, worst, 1)[0]
    assert abs(slope - (-alpha)) <= 0.15 * alpha


def _smooth_slice_16():
    g, mask = _box(16)
    demag = FftDemag.for_grid(g)
    sched = FieldSchedule.constant(0.7, UZ)
    m_eq = up_field(g, mask)
    m0 = normalize_pointwise(
        m_eq + sample_admissible_perturbation(m_eq, 0.3, 2, g, mask), mask)
    cfg = SolverConfig(epsilon=0.2, alpha=1.0, T=0.1, dt=5e-4,
                       integrator="semi-implicit-spectral")
    _, m = integrate(m0, cfg, g, mask, demag, sched, sample_every=1000)
    return m, cfg, g, mask, demag, sched


def test_acceptance_08_projector_commutation():
    # Lap P_k = P_k Lap to 1e-12 on box fields
    g, mask = _box(12)
    rng = np.random.default_rng(3)
    u = rng.standard_normal(g.shape + (3,))
    for k in (8, 27, 64, 125):
        a = project_Pk(laplacian_neumann(u, g, mask), k, g, mask)
        b = laplacian_neumann(project_Pk(u, k, g, mask), g, mask)
        scale = max(float(np.max(np.abs(a))), 1.0)
        assert np.max(np.abs(a - b)) <= 1e-12 * scale

    # commutator H1 norm strictly decreasing along k on a smooth slice
    m, cfg, g, mask, demag, sched = _smooth_slice_16()
    vals = [commutator_PkF(m, k, 0.0, cfg, g, mask, demag, sched)
            for k in (8, 27, 64, 125)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


ROTATING = FieldSchedule(
    np.array([[0.0, 5.0], [10.0, 5.0]]),
    RotatingDirection((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), 0.5))


def test_acceptance_09_two_scale_asymptotics():
    # macrospin ladder: tracking error shrinks, layer time scales as
    # eps * ln(1/eps) within a factor-3 band
    g, mask = _box(1)
    demag = TensorDemag(np.eye(3) / 3.0)
    plan = AsymptoticsPlan((0.1, 0.05, 0.025, 0.0125), ROTATING, alpha=1.0,
                           T=2.0, perturbation=0.2, seed=1,
                           dt_over_eps=0.02)
    out = run_asymptotics(plan, g, mask, demag)
    sup = np.array([r["sup_dist_after_tau"] for r in out["summary"]])
    ratios = sup[1:] / sup[:-1]
    assert np.all(ratios <= 0.9)
    band = np.array([r["tau_over_eps_log"] for r in out["summary"]])
    assert np.max(band) / np.min(band) <= 3.0

    # grid confirmation at 16^3 for the two largest eps
    g, mask = _box(16)
    demag = FftDemag.for_grid(g)
    plan = AsymptoticsPlan((0.1, 0.05), ROTATING, alpha=1.0, T=2.0,
                           perturbation=0.2, seed=1, dt_over_eps=0.02,
                           integrator="semi-implicit-spectral",
                           analytic_equilibrium=False, relax_tol=1e-5,
                           samples_per_run=60)
    out = run_asymptotics(plan, g, mask, demag)
    sup = np.array([r["sup_dist_after_tau"] for r in out["summary"]])
    assert sup[1] / sup[0] <= 0.9
    assert all(r["initial_relax_converged"] for r in out["summary"])


def test_acceptance_10_hysteresis():
    plan = HysteresisPlan(EllipsoidSpec(3.0, 1.0, 1.0), lam_max=0.6)
    out = run_hysteresis(plan)
    pred = out["switching_predicted"]  # d_transverse - d_axis
    assert abs(out["switching_up"] - pred) <= 0.05 * pred
    assert out["loop_closure"] <= 1e-3
    assert out["loop_area"] > 0.0
