"""
Covariance dynamics dσ/dt = A(t)σ + σA(t)ᵀ + D and its steady state.

The fixed-step integrator is classical RK4.  Because the covariance ODE is
affine in σ, one RK4 step is an affine map σ ↦ P vec(σ) + c; the maps of
all steps between two records are composed once and then applied per record.
For a constant drift the stride map is the same at every record, and for a
drift that is periodic in time (the driven model) it is the same whenever
the record interval is a whole number of periods.  The result is the RK4
solution on the fixed step grid, at a cost per record instead of per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy.integrate import solve_ivp

from .gaussian import log_negativity, physicality_margin, populations, reduce_two_mode, symmetrize, vacuum_cm
from .models import (
    Model,
    PhysicalParams,
    QuadraticHamiltonian,
    build_hamiltonian,
    diffusion_matrix,
    drift_from_hamiltonian,
    model_decays,
)
from .stability import eigen_stable

LYAPUNOV_RESIDUAL_TOL = 1e-10
MAX_REFINEMENTS = 4
PHYSICALITY_ABORT = -1e-6
STEPS_PER_CYCLE = 20
# RK4 needs this many steps per drive period to get the Floquet decay rates of the driven model right
DRIVEN_STEPS_PER_PERIOD = 1600


class PropagationError(RuntimeError):
    """Non-finite or unphysical covariance during integration."""


class NotHurwitzError(ValueError):
    """The drift matrix has no strictly stable spectrum, so no steady state exists."""


class LyapunovResidualError(RuntimeError):
    """The Lyapunov solve did not reach the required residual."""


@dataclass(frozen=True)
class DriftRule:
    """Drift A(t) of a quadratic Hamiltonian with per-mode damping."""

    hamiltonian: QuadraticHamiltonian
    decays: tuple[float, ...]

    def __call__(self, t: float) -> NDArray[np.float64]:
        return drift_from_hamiltonian(self.hamiltonian, self.decays, t)

    @property
    def period(self) -> Optional[float]:
        return self.hamiltonian.period

    @property
    def n_modes(self) -> int:
        return self.hamiltonian.n_modes

    def max_abs_entry(self) -> float:
        # cos modulation takes its extremes at phase 0 and π
        if self.period is None:
            return float(np.max(np.abs(self(0.0))))
        return float(max(np.max(np.abs(self(0.0))), np.max(np.abs(self(0.5 * self.period)))))


DriftLike = Union[NDArray[np.float64], DriftRule, Callable[[float], NDArray[np.float64]]]


@dataclass(frozen=True)
class PropagationConfig:
    """
    Settings for ``propagate``.

    ``dt`` defaults to the largest step allowed for the drift, a twentieth of
    the period of its fastest entry, or 1/1600 of the drive period for a
    periodic drift, whichever is smaller.  When ``record_interval`` (ns) is given
    it overrides ``record_every`` (steps); the step is shrunk so that a whole
    number of steps fits in one record interval, and for periodic drifts the
    interval is rounded to whole drive periods.  Integration stops early once
    the relative Frobenius change of σ per ns has stayed below
    ``steady_detect_tol`` for ``steady_window`` consecutive records.
    """

    t_end: float
    dt: Optional[float] = None
    record_every: int = 1
    record_interval: Optional[float] = None
    steady_detect_tol: Optional[float] = 1e-8
    steady_window: int = 100
    method: str = "rk4"
    rtol: float = 1e-10
    atol: float = 1e-12

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.record_interval is not None and not self.record_interval > 0:
            raise ValueError("record_interval must be positive")
        if self.method not in ("rk4", "adaptive"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class Trajectory:
    times: NDArray[np.float64]
    cms: NDArray[np.float64]
    converged: bool = False
    dt: Optional[float] = None
    min_margin: float = field(default=0.0)

    @property
    def n_modes(self) -> int:
        return self.cms.shape[1] // 2

    @property
    def final(self) -> NDArray[np.float64]:
        return self.cms[-1]

    def populations(self) -> NDArray[np.float64]:
        """Mode populations, shape (n_records, n_modes)."""
        return np.array([populations(cm) for cm in self.cms])

    def log_negativity(self, i: int, j: int) -> NDArray[np.float64]:
        return np.array([log_negativity(reduce_two_mode(cm, i, j)) for cm in self.cms])


def max_step(drift: DriftLike) -> float:
    """The largest admissible fixed step, (2π/ω_max)/20 with ω_max the largest |A_ij| of the run."""
    if isinstance(drift, DriftRule):
        w_max = drift.max_abs_entry()
    elif callable(drift):
        w_max = float(np.max(np.abs(drift(0.0))))
    else:
        w_max = float(np.max(np.abs(drift)))
    if w_max == 0.0:
        return math.inf
    return 2.0 * math.pi / w_max / STEPS_PER_CYCLE


def _lyapunov_operator(a: NDArray[np.float64]) -> NDArray[np.float64]:
    """Matrix of σ ↦ Aσ + σAᵀ acting on row-major vec(σ)."""
    eye = np.eye(a.shape[0])
    return np.kron(a, eye) + np.kron(eye, a)


def _rk4_step_map(l1, l2, l3, d, h):
    """Affine map (P, c) of one RK4 step of x' = L(t) x + d, with L at t, t + h/2, t + h."""
    eye = np.eye(l1.shape[0])
    k1, c1 = l1, d
    k2 = l2 @ (eye + 0.5 * h * k1)
    c2 = 0.5 * h * (l2 @ c1) + d
    k3 = l2 @ (eye + 0.5 * h * k2)
    c3 = 0.5 * h * (l2 @ c2) + d
    k4 = l3 @ (eye + h * k3)
    c4 = h * (l3 @ c3) + d
    p = eye + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    c = h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
    return p, c


def _compose(first, second):
    """Affine map of applying ``first`` then ``second``."""
    p1, c1 = first
    p2, c2 = second
    return p2 @ p1, p2 @ c1 + c2


def _power(step, n: int):
    result = None
    base = step
    while n:
        if n & 1:
            result = base if result is None else _compose(result, base)
        n >>= 1
        if n:
            base = _compose(base, base)
    return result


def _resolve_grid(drift: DriftLike, cfg: PropagationConfig):
    """Return (dt, steps_per_record, record_interval, period)."""
    cap = max_step(drift)
    period = drift.period if isinstance(drift, DriftRule) else None
    if cfg.dt is not None:
        dt_req = cfg.dt
    elif period is not None:
        dt_req = min(cap, period / DRIVEN_STEPS_PER_PERIOD)
    else:
        dt_req = cap
    if not math.isfinite(dt_req):
        dt_req = cfg.record_interval or cfg.t_end
    if dt_req > cap * (1.0 + 1e-12):
        raise ValueError(f"dt = {dt_req:.3e} ns exceeds the stability cap {cap:.3e} ns for this drift")
    interval = cfg.record_interval if cfg.record_interval is not None else cfg.record_every * dt_req
    if period is not None:
        n_periods = max(1, round(interval / period))
        interval = n_periods * period
        steps_per_period = math.ceil(period / dt_req * (1.0 - 1e-12))
        return period / steps_per_period, steps_per_period * n_periods, interval, period
    steps = max(1, math.ceil(interval / dt_req * (1.0 - 1e-12)))
    return interval / steps, steps, interval, None


def _stride_map(drift: DriftLike, diffusion, dt: float, steps: int, period: Optional[float]):
    d = diffusion.ravel()
    if isinstance(drift, np.ndarray):
        lop = _lyapunov_operator(drift)
        return _power(_rk4_step_map(lop, lop, lop, d, dt), steps)
    if period is not None:
        steps_per_period = round(period / dt)
        cycle = None
        for k in range(steps_per_period):
            t = k * dt
            step = _rk4_step_map(
                _lyapunov_operator(drift(t)),
                _lyapunov_operator(drift(t + 0.5 * dt)),
                _lyapunov_operator(drift(t + dt)),
                d,
                dt,
            )
            cycle = step if cycle is None else _compose(cycle, step)
        return _power(cycle, steps // steps_per_period)
    return None


def _rk4_direct(drift, diffusion, sigma, t, dt, steps):
    """Plain RK4 on σ for drifts with no reusable stride map."""

    def rhs(tt, s):
        a = drift(tt)
        return a @ s + s @ a.T + diffusion

    for _ in range(steps):
        k1 = rhs(t, sigma)
        k2 = rhs(t + 0.5 * dt, sigma + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, sigma + 0.5 * dt * k2)
        k4 = rhs(t + dt, sigma + dt * k3)
        sigma = symmetrize(sigma + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        t += dt
    return sigma


class _Recorder:
    def __init__(self, sigma0, cfg: PropagationConfig, interval: float):
        self.cfg = cfg
        self.interval = interval
        self.times = [0.0]
        self.cms = [sigma0]
        self.quiet = 0
        self.min_margin = physicality_margin(sigma0)

    def add(self, t: float, sigma) -> bool:
        """Store one record; return True once the steady-state criterion is met."""
        if not np.all(np.isfinite(sigma)):
            raise PropagationError(f"non-finite covariance at t = {t:.6g} ns")
        margin = physicality_margin(sigma)
        if margin < PHYSICALITY_ABORT:
            raise PropagationError(f"covariance became unphysical (margin {margin:.3e}) at t = {t:.6g} ns")
        self.min_margin = min(self.min_margin, margin)
        prev = self.cms[-1]
        self.times.append(t)
        self.cms.append(sigma)
        tol = self.cfg.steady_detect_tol
        if tol is None:
            return False
        norm = np.linalg.norm(sigma)
        rate = np.linalg.norm(sigma - prev) / (norm if norm > 0 else 1.0) / self.interval
        self.quiet = self.quiet + 1 if rate < tol else 0
        return self.quiet >= self.cfg.steady_window

    def result(self, converged: bool, dt: Optional[float]) -> Trajectory:
        return Trajectory(
            times=np.array(self.times),
            cms=np.array(self.cms),
            converged=converged,
            dt=dt,
            min_margin=self.min_margin,
        )


def propagate(
    drift: DriftLike,
    diffusion: NDArray[np.float64],
    sigma0: NDArray[np.float64],
    cfg: PropagationConfig,
) -> Trajectory:
    """
    Integrate the covariance ODE from ``sigma0`` and record σ on a uniform time grid.

    ``drift`` is a constant matrix, a :class:`DriftRule` (periodic when its
    Hamiltonian is driven), or any callable t ↦ A(t).
    """
    sigma0 = np.asarray(sigma0, dtype=float)
    diffusion = np.asarray(diffusion, dtype=float)
    dim = sigma0.shape[0]
    a0 = drift(0.0) if callable(drift) else np.asarray(drift, dtype=float)
    if a0.shape != (dim, dim) or diffusion.shape != (dim, dim):
        raise ValueError("drift, diffusion and initial covariance dimensions disagree")
    if physicality_margin(sigma0) < -1e-9:
        raise ValueError("initial covariance matrix is unphysical")
    if not callable(drift):
        drift = a0

    if cfg.method == "adaptive":
        return _propagate_adaptive(drift, diffusion, sigma0, cfg)

    dt, steps, interval, period = _resolve_grid(drift, cfg)
    n_records = max(1, math.ceil(cfg.t_end / interval * (1.0 - 1e-12)))
    stride = _stride_map(drift, diffusion, dt, steps, period)
    rec = _Recorder(sigma0, cfg, interval)
    x = sigma0.ravel().copy()
    sigma = sigma0
    converged = False
    for k in range(1, n_records + 1):
        if stride is not None:
            x = stride[0] @ x + stride[1]
            sigma = symmetrize(x.reshape(dim, dim))
            x = sigma.ravel().copy()
        else:
            sigma = _rk4_direct(drift, diffusion, sigma, (k - 1) * interval, dt, steps)
        if rec.add(k * interval, sigma):
            converged = True
            break
    return rec.result(converged, dt)


def _propagate_adaptive(drift, diffusion, sigma0, cfg: PropagationConfig) -> Trajectory:
    dim = sigma0.shape[0]
    interval = cfg.record_interval if cfg.record_interval is not None else cfg.record_every * (cfg.dt or max_step(drift))
    n_records = max(1, math.ceil(cfg.t_end / interval * (1.0 - 1e-12)))
    t_eval = interval * np.arange(n_records + 1)

    if callable(drift):

        def rhs(t, x):
            a = drift(t)
            s = x.reshape(dim, dim)
            return (a @ s + s @ a.T + diffusion).ravel()

    else:
        lop = _lyapunov_operator(drift)
        dvec = diffusion.ravel()

        def rhs(t, x):
            return lop @ x + dvec

    sol = solve_ivp(rhs, (0.0, t_eval[-1]), sigma0.ravel(), method="DOP853", t_eval=t_eval, rtol=cfg.rtol, atol=cfg.atol)
    if not sol.success:
        raise PropagationError(f"adaptive integration failed: {sol.message}")
    rec = _Recorder(sigma0, cfg, interval)
    converged = False
    for t, x in zip(sol.t[1:], sol.y.T[1:]):
        if rec.add(float(t), symmetrize(x.reshape(dim, dim))):
            converged = True
            break
    return rec.result(converged, None)


def lyapunov_residual(a, sigma, diffusion) -> float:
    """Relative residual ‖Aσ + σAᵀ + D‖_F / ‖D‖_F, accumulated in extended precision."""
    res = _residual_matrix(a, sigma, diffusion)
    norm_d = np.linalg.norm(diffusion)
    return float(np.sqrt(np.sum(res * res)) / (norm_d if norm_d > 0 else 1.0))


def _residual_matrix(a, sigma, diffusion):
    # at large occupations the double-precision residual is dominated by its own rounding
    a = np.asarray(a, dtype=np.longdouble)
    sigma = np.asarray(sigma, dtype=np.longdouble)
    return a @ sigma + sigma @ a.T + np.asarray(diffusion, dtype=np.longdouble)


def steady_state(a: NDArray[np.float64], diffusion: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Solve Aσ + σAᵀ = -D through the dense Kronecker system with iterative refinement.

    Raises NotHurwitzError unless A is strictly stable, and
    LyapunovResidualError when the relative residual exceeds 1e-10.
    """
    a = np.asarray(a, dtype=float)
    diffusion = np.asarray(diffusion, dtype=float)
    verdict = eigen_stable(a)
    if not verdict.stable:
        raise NotHurwitzError(f"drift matrix is not Hurwitz (max Re λ = {verdict.margin:.3e})")
    dim = a.shape[0]
    lop = _lyapunov_operator(a)
    rhs = -diffusion.ravel()
    lu = scipy.linalg.lu_factor(lop)
    x = scipy.linalg.lu_solve(lu, rhs)
    for _ in range(MAX_REFINEMENTS):
        sigma = symmetrize(x.reshape(dim, dim))
        residual = lyapunov_residual(a, sigma, diffusion)
        if residual <= LYAPUNOV_RESIDUAL_TOL:
            break
        correction = -_residual_matrix(a, sigma, diffusion).astype(float)
        x = sigma.ravel() + scipy.linalg.lu_solve(lu, correction.ravel())
    sigma = symmetrize(x.reshape(dim, dim))
    residual = lyapunov_residual(a, sigma, diffusion)
    if residual > LYAPUNOV_RESIDUAL_TOL:
        raise LyapunovResidualError(f"Lyapunov residual {residual:.3e} exceeds {LYAPUNOV_RESIDUAL_TOL:.0e}")
    return sigma


def model_drift_rule(p: PhysicalParams, model: Model | str) -> DriftRule:
    return DriftRule(build_hamiltonian(p, model), tuple(model_decays(p, model)))


def evolve_model(p: PhysicalParams, model: Model | str, cfg: PropagationConfig) -> Trajectory:
    """Propagate one model of the system from the vacuum."""
    rule = model_drift_rule(p, model)
    drift = rule if rule.period is not None else rule(0.0)
    return propagate(drift, diffusion_matrix(rule.decays), vacuum_cm(rule.n_modes), cfg)


# --- model comparison -------------------------------------------------------

PAIRS = {
    "full_vs_rwa": (Model.FULL, Model.RWA),
    "rwa_vs_effective": (Model.RWA, Model.EFFECTIVE),
}


@dataclass(frozen=True)
class ModelComparison:
    pair: str
    reference: Trajectory
    approximate: Trajectory
    observables: tuple[str, ...]
    times: NDArray[np.float64]
    reference_values: NDArray[np.float64]
    approximate_values: NDArray[np.float64]
    sup_divergence: float
    steady_rel_diff: NDArray[np.float64]


def _observables(traj: Trajectory, model: Model, magnons_only: bool) -> NDArray[np.float64]:
    pops = traj.populations()
    if model is Model.EFFECTIVE:
        return pops
    return pops[:, 1:] if magnons_only else pops


def compare_models(p: PhysicalParams, cfg: PropagationConfig, pair: str = "full_vs_rwa") -> ModelComparison:
    """
    Propagate both members of ``pair`` from the vacuum and compare mode populations.

    ``sup_divergence`` is max_j max_t |a_j - b_j| / max_t |a_j| with ``a`` the
    more complete model; ``steady_rel_diff`` compares the final records.
    """
    pair = pair.replace("-", "_")
    if pair in ("full_rwa", "rwa_effective"):
        pair = pair.replace("_", "_vs_")
    if pair not in PAIRS:
        raise ValueError(f"unknown model pair {pair!r}")
    model_a, model_b = PAIRS[pair]
    magnons_only = model_b is Model.EFFECTIVE
    rule_a = model_drift_rule(p, model_a)
    for rule in (rule_a, model_drift_rule(p, model_b)):
        if not eigen_stable(rule(0.0)).stable and rule.period is None:
            raise NotHurwitzError(f"{rule.hamiltonian.name} model is unstable at these parameters")
    traj_a = evolve_model(p, model_a, cfg)
    # model B is recorded on the same time grid as model A
    _, _, interval, _ = _resolve_grid(rule_a if rule_a.period is not None else rule_a(0.0), cfg)
    cfg_b = PropagationConfig(
        t_end=cfg.t_end,
        record_interval=interval,
        steady_detect_tol=cfg.steady_detect_tol,
        steady_window=cfg.steady_window,
        method=cfg.method,
        rtol=cfg.rtol,
        atol=cfg.atol,
    )
    traj_b = evolve_model(p, model_b, cfg_b)
    obs_a = _observables(traj_a, model_a, magnons_only)
    obs_b = _observables(traj_b, model_b, magnons_only)
    n = min(len(obs_a), len(obs_b))
    diff = np.abs(obs_a[:n] - obs_b[:n])
    scale = np.max(np.abs(obs_a[:n]), axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_obs = np.where(scale > 0, np.max(diff, axis=0) / scale, np.where(np.max(diff, axis=0) > 0, np.inf, 0.0))
        final_a, final_b = obs_a[-1], obs_b[-1]
        steady = np.where(final_a != 0, np.abs(final_a - final_b) / np.abs(final_a), np.where(final_b != 0, np.inf, 0.0))
    names = ("n_m1", "n_m2") if magnons_only else ("n_cavity", "n_m1", "n_m2")
    return ModelComparison(
        pair=pair,
        reference=traj_a,
        approximate=traj_b,
        observables=names,
        times=traj_a.times[:n],
        reference_values=obs_a[:n],
        approximate_values=obs_b[:n],
        sup_divergence=float(np.max(per_obs)) if per_obs.size else 0.0,
        steady_rel_diff=steady,
    )
