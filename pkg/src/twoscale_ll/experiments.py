"""Orchestrated experiments: the two-phase slow/fast picture (initial
layer, then adiabatic tracking of the moving equilibrium) across a ladder
of time-scale ratios, and macrospin hysteresis loops."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.integrate

from .demag import DemagModel, TensorDemag, demag_tensor_estimate
from .dynamics import (
    RunRecord,
    SolverConfig,
    energy,
    equilibrium_residual,
    integrate,
    relax_to_equilibrium,
)
from .grid import (
    DomainMask,
    EllipsoidSpec,
    Grid3,
    constant_field,
    normalize_pointwise,
)
from .linearization import sample_admissible_perturbation
from .schedule import FieldSchedule, FixedDirection


@dataclass(frozen=True)
class AsymptoticsPlan:
    """Ladder study of the fast-response limit under a slow field."""

    eps_ladder: tuple[float, ...]
    sched: FieldSchedule
    alpha: float
    T: float
    perturbation: float = 0.2
    threshold_factor: float = 2.0
    seed: int = 0
    dt_over_eps: float = 0.02       # dt = dt_over_eps * eps
    integrator: str = "projected-explicit"
    analytic_equilibrium: bool = True  # m_eq(t) = u(t) on a spherical sample
    relax_tol: float = 1e-9
    relax_max_T: float = 50.0
    relax_dt: float = 0.05          # relaxation runs at eps = 1; any stable
                                    # dt reaches the same fixed point
    samples_per_run: int = 150

    def __post_init__(self):
        eps = np.asarray(self.eps_ladder, dtype=float)
        if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
            raise ValueError("eps ladder must be positive and decreasing")


def detect_layer_exit(times: np.ndarray, d: np.ndarray,
                      threshold_factor: float) -> float:
    """First sampled time where d(t) falls within threshold_factor times
    the median of d over the final quarter of the run; last time if never."""
    times = np.asarray(times, dtype=float)
    d = np.asarray(d, dtype=float)
    if len(times) == 0:
        raise ValueError("empty record")
    t_end = times[-1]
    span = t_end - times[0]
    tail = d[times >= t_end - 0.25 * span]
    plateau = float(np.median(tail))
    hits = np.nonzero(d <= threshold_factor * plateau)[0]
    return float(times[hits[0]]) if len(hits) else float(t_end)


def _equilibrium_tracker(plan: AsymptoticsPlan, g: Grid3, mask: DomainMask,
                         demag: DemagModel, cfg: SolverConfig,
                         m_warm: np.ndarray | None = None):
    """Callable t -> m_eq(t): analytic u(t) on a spherical sample, or a
    warm-started frozen-time relaxation solve otherwise."""
    if plan.analytic_equilibrium:
        def ref(t: float) -> np.ndarray:
            return constant_field(g, plan.sched.direction.at(t), mask)
        return ref

    state = {"m": m_warm}
    relax_cfg = replace(cfg, dt=plan.relax_dt)

    def ref(t: float) -> np.ndarray:
        guess = state["m"]
        if guess is None:
            guess = constant_field(g, plan.sched.direction.at(t), mask)
        m_eq, _ = relax_to_equilibrium(
            guess, t, plan.relax_tol, plan.relax_max_T, relax_cfg, g, mask,
            demag, plan.sched)
        state["m"] = m_eq
        return m_eq

    return ref


def run_asymptotics(plan: AsymptoticsPlan, g: Grid3, mask: DomainMask,
                    demag: DemagModel) -> dict:
    """Run the eps ladder and summarize layer exit and tracking error.

    Initial data is prepared by relaxing at the initial time and then
    applying one fixed admissible perturbation (shared across the ladder).
    Summary rows hold (eps, tau, tau/(eps ln(1/eps)), sup_{[tau,T]} d).
    """
    t0 = plan.sched.t_min
    base_cfg = SolverConfig(epsilon=1.0, alpha=plan.alpha, T=plan.T,
                            integrator=plan.integrator,
                            dt=plan.relax_dt)
    m_eq0, converged = relax_to_equilibrium(
        constant_field(g, plan.sched.direction.at(t0), mask), t0,
        plan.relax_tol, plan.relax_max_T, base_cfg, g, mask, demag,
        plan.sched)
    delta0 = sample_admissible_perturbation(
        m_eq0, plan.perturbation, plan.seed, g, mask)
    m0 = m_eq0 + delta0

    records: dict[float, RunRecord] = {}
    summary = []
    for eps in plan.eps_ladder:
        dt = plan.dt_over_eps * eps
        n_steps = int(round(plan.T / dt))
        sample_every = max(1, n_steps // plan.samples_per_run)
        cfg = SolverConfig(epsilon=eps, alpha=plan.alpha, T=plan.T,
                           integrator=plan.integrator, dt=dt)
        ref = _equilibrium_tracker(plan, g, mask, demag, cfg, m_warm=m_eq0)
        rec, _ = integrate(m0, cfg, g, mask, demag, plan.sched,
                           sample_every=sample_every, t0=t0, reference=ref)
        records[eps] = rec
        tau = detect_layer_exit(rec.times, rec.dist_h2, plan.threshold_factor)
        after = rec.times >= tau
        sup_d = float(np.max(rec.dist_h2[after]))
        summary.append({
            "eps": eps,
            "tau": tau,
            "tau_over_eps_log": tau / (eps * np.log(1.0 / eps)),
            "sup_dist_after_tau": sup_d,
            "initial_relax_converged": converged,
        })
    return {"records": records, "summary": summary}


@dataclass(frozen=True)
class HysteresisPlan:
    """Triangular field sweep along the easy axis of an ellipsoid, in
    macrospin mode (tensor demag).

    The sweep must be adiabatic for the switching field to approach the
    static threshold: the dynamic overshoot past the fold scales like
    sqrt(eps * sweep_rate * ln(1/field_tilt) / alpha), so eps * lam_max /
    period controls the accuracy. The defaults keep the overshoot plus the
    tilt correction under a percent of the threshold.
    """

    ellipsoid: EllipsoidSpec
    lam_max: float
    period: float = 200.0
    epsilon: float = 1e-3
    alpha: float = 1.0
    dt: float = 0.05                # sampling interval of the recorded loop
    field_tilt: float = 3e-4        # radians off the easy axis
    transverse_bias: float = 1e-6   # constant field along the third axis
    tensor_resolution: int = 32
    n_warmup_periods: int = 1

    def __post_init__(self):
        if self.lam_max <= 0:
            raise ValueError("sweep must cross both signs of lambda")


def _triangular_schedule(lam_max: float, period: float, n_periods: int,
                         direction) -> FieldSchedule:
    """lambda(t) sweeping -lam_max -> +lam_max -> -lam_max per period."""
    knots = [(0.0, -lam_max)]
    for p in range(n_periods):
        knots.append(((p + 0.5) * period, lam_max))
        knots.append(((p + 1.0) * period, -lam_max))
    return FieldSchedule(np.asarray(knots), direction)


def run_hysteresis(plan: HysteresisPlan) -> dict:
    """Sweep the field and extract the loop, switching fields, and area.

    The field direction is tilted off the easy axis by plan.field_tilt to
    break the exact symmetry that would otherwise pin the magnetization on
    the unstable branch forever. The macrospin ODE is integrated with an
    adaptive stiff solver (LSODA): steps are large on the adiabatic
    branches and refine automatically through the fast switching events,
    which a fixed step of order eps could not afford over a slow sweep.
    """
    D = demag_tensor_estimate(plan.ellipsoid, plan.tensor_resolution)
    evals, evecs = np.linalg.eigh(D)
    u = evecs[:, 0]                # easy axis: smallest depolarization
    d_axis = float(evals[0])
    d_transverse = float(evals[1])

    # tilt within the (u, second-axis) plane
    v = evecs[:, 1]
    u_field = u * np.cos(plan.field_tilt) + v * np.sin(plan.field_tilt)

    n_periods = plan.n_warmup_periods + 1
    sched = _triangular_schedule(plan.lam_max, plan.period, n_periods,
                                 FixedDirection(u_field))
    knots_t = sched.knots[:, 0]
    knots_v = sched.knots[:, 1]
    eps, alpha = plan.epsilon, plan.alpha
    # A tiny constant transverse field keeps the anti-aligned state from
    # being an exact (deterministically pinned) equilibrium; for degenerate
    # samples (sphere) this is the only symmetry breaking available.
    h_bias = plan.transverse_bias * evecs[:, 2]

    def rhs(t: float, m: np.ndarray) -> np.ndarray:
        h = -(D @ m) + np.interp(t, knots_t, knots_v) * u_field + h_bias
        mxh = np.cross(m, h)
        return (mxh - alpha * np.cross(m, mxh)) / eps

    t_end = n_periods * plan.period
    t_eval = np.arange(0.0, t_end + 0.5 * plan.dt, plan.dt)
    sol = scipy.integrate.solve_ivp(
        rhs, (0.0, t_end), -u, method="LSODA", t_eval=t_eval,
        rtol=1e-9, atol=1e-12, max_step=plan.period / 16.0)
    if not sol.success:
        raise RuntimeError(f"hysteresis sweep failed: {sol.message}")
    m_path = sol.y.T
    m_path /= np.linalg.norm(m_path, axis=1, keepdims=True)

    g = Grid3(1, 1, 1)
    mask = DomainMask.full(g)
    demag = TensorDemag(D)
    cfg = SolverConfig(epsilon=eps, alpha=alpha, T=t_end, dt=plan.dt,
                       integrator="projected-explicit")
    rec = _macrospin_record(sol.t, m_path, u, cfg, g, mask, demag, sched)

    m_dot_u = m_path @ u
    t_meas = plan.n_warmup_periods * plan.period
    meas = sol.t >= t_meas - 1e-12
    lam = rec.lam[meas]
    mu = m_dot_u[meas]
    times = sol.t[meas]

    half = plan.period / 2.0
    rising = ((times - t_meas) % plan.period) < half
    # the final sample wraps to phase 0; keep it off the rising branch
    rising &= times < times[-1] - 0.25 * plan.dt
    lam_sw_up = _switching_field(lam[rising], mu[rising])
    lam_sw_down = _switching_field(lam[~rising], mu[~rising])

    # signed loop area by the trapezoid rule around the closed sweep
    area = float(np.trapezoid(mu, lam)) * -1.0
    closure = abs(mu[0] - mu[-1])

    return {
        "lam": lam,
        "m_dot_u": mu,
        "record": rec,
        "D": D,
        "easy_axis": u,
        "d_axis": d_axis,
        "d_transverse": d_transverse,
        "switching_up": lam_sw_up,
        "switching_down": lam_sw_down,
        "switching_predicted": d_transverse - d_axis,
        "loop_area": area,
        "loop_closure": closure,
    }


def _macrospin_record(times: np.ndarray, m_path: np.ndarray, u: np.ndarray,
                      cfg: SolverConfig, g: Grid3, mask: DomainMask,
                      demag: DemagModel, sched: FieldSchedule) -> RunRecord:
    """Assemble the standard diagnostics record from a sampled macrospin
    path; the reference for the distance column is the nearer of +-u."""
    n = len(times)
    lam = np.empty(n)
    en = np.empty(n)
    res = np.empty(n)
    dist = np.empty(n)
    for i in range(n):
        m = m_path[i].reshape(1, 1, 1, 3)
        t = float(times[i])
        lam[i] = sched.amplitude(t)
        en[i] = energy(t, m, cfg, g, mask, demag, sched)
        res[i] = equilibrium_residual(t, m, g, mask, demag, sched)
        sgn = 1.0 if float(m_path[i] @ u) >= 0 else -1.0
        dist[i] = np.linalg.norm(m_path[i] - sgn * u) * np.sqrt(
            mask.cell_volume)
    return RunRecord(times=np.asarray(times, dtype=float), lam=lam,
                     mean=np.array(m_path, dtype=float), energy=en,
                     residual=res, dist_h2=dist)


def _switching_field(lam: np.ndarray, mu: np.ndarray) -> float:
    """Field value at the steepest change of m.u along one sweep branch."""
    if len(lam) < 3:
        raise ValueError("branch too short to locate switching")
    dmu = np.abs(np.diff(mu))
    i = int(np.argmax(dmu))
    return float(0.5 * (lam[i] + lam[i + 1]))
