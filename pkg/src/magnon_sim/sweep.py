"""
Grid evaluation of stability and steady-state entanglement.

Every cell is an independent pure computation, so cells run in a process
pool and the rows are gathered back in row-major grid order.  The table is
therefore the same for any number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .dynamics import LyapunovResidualError, steady_state
from .entanglement import magnon_pair_entanglement, pairwise_entanglement
from .models import Model, ParameterError, derive_params, drift_matrix, model_diffusion, params_from_detunings
from .stability import char_poly_closed_form, eigen_stable, routh_hurwitz_stable

AXIS_NAMES = ("Delta_1", "Delta_2", "g1", "g2", "kappa", "g1_over_g2")
FIXED_KEYS = ("nu_c", "nu_d", "Delta_1", "Delta_2", "g1", "g2", "kappa", "gamma_1", "gamma_2", "g1_over_g2")
TASKS = ("stability", "entanglement", "both")
GRID_MODELS = (Model.RWA, Model.RESONANT, Model.EFFECTIVE)
# RH and eigen verdicts may differ only this close to the stability boundary
BOUNDARY_BAND = 1e-9


class SweepConsistencyError(RuntimeError):
    """The Routh-Hurwitz and eigenvalue verdicts disagree away from the stability boundary."""


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ParameterError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if int(self.count) != self.count or self.count < 2:
            raise ParameterError(f"axis {self.name} needs count >= 2, got {self.count}")
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ParameterError(f"axis {self.name} bounds must be finite")

    def values(self) -> np.ndarray:
        # the single place where grid coordinates are generated
        return np.linspace(self.min, self.max, int(self.count))


@dataclass(frozen=True)
class GridSpec:
    """A 1-D or 2-D grid over detunings, couplings or decays; frequencies in cyclic GHz."""

    axis1: Axis
    axis2: Optional[Axis] = None
    fixed: Mapping[str, float] = field(default_factory=dict)
    model: Model = Model.RWA
    task: str = "both"

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "fixed", dict(self.fixed))
        if self.model not in GRID_MODELS:
            raise ParameterError(f"grid sweeps support the rwa, resonant and effective models, not {self.model.value}")
        if self.task not in TASKS:
            raise ParameterError(f"unknown task {self.task!r}")
        unknown = set(self.fixed) - set(FIXED_KEYS)
        if unknown:
            raise ParameterError(f"unknown fixed parameters {sorted(unknown)}")
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ParameterError("the two axes must differ")

    @property
    def axes(self) -> tuple[Axis, ...]:
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    def cells(self) -> list[tuple[float, ...]]:
        """Grid coordinates in row-major order (axis1 outer)."""
        v1 = self.axis1.values()
        if self.axis2 is None:
            return [(float(a),) for a in v1]
        v2 = self.axis2.values()
        return [(float(a), float(b)) for a in v1 for b in v2]


@dataclass(frozen=True)
class SweepRow:
    coords: tuple[float, ...]
    stable: Optional[bool]
    margin: Optional[float]
    e_cm1: Optional[float] = None
    e_cm2: Optional[float] = None
    e_m1m2: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    axis_names: tuple[str, ...]
    rows: tuple[SweepRow, ...]
    model: Model
    task: str

    def column(self, name: str) -> np.ndarray:
        """A row field as a float array, NaN where absent."""
        return np.array([np.nan if getattr(r, name) is None else float(getattr(r, name)) for r in self.rows])

    def coords(self) -> np.ndarray:
        return np.array([r.coords for r in self.rows])


def _cell_params(values: Mapping[str, float]):
    values = dict(values)
    ratio = values.pop("g1_over_g2", None)
    if ratio is not None:
        values["g1"] = ratio * values.get("g2", 0.001)
    return params_from_detunings(**values)


def _evaluate(spec: GridSpec, coords: tuple[float, ...]) -> SweepRow:
    values = dict(spec.fixed)
    values.update({axis.name: c for axis, c in zip(spec.axes, coords)})
    try:
        p = _cell_params(values)
        a = drift_matrix(p, spec.model)
    except (ParameterError, ValueError) as exc:
        return SweepRow(coords, None, None, error=f"{type(exc).__name__}: {exc}")
    verdict = eigen_stable(a)
    if spec.model is Model.RWA:
        rh = routh_hurwitz_stable(char_poly_closed_form(derive_params(p), exact=True))
        if rh.stable != verdict.stable and abs(verdict.margin) >= BOUNDARY_BAND:
            raise SweepConsistencyError(
                f"Routh-Hurwitz ({rh.stable}) and eigenvalues ({verdict.stable}, margin {verdict.margin:.3e}) "
                f"disagree at {dict(zip((ax.name for ax in spec.axes), coords))}"
            )
    if not verdict.stable or spec.task == "stability":
        return SweepRow(coords, verdict.stable, verdict.margin)
    try:
        sigma = steady_state(a, model_diffusion(p, spec.model))
        if spec.model is Model.EFFECTIVE:
            return SweepRow(coords, True, verdict.margin, e_m1m2=magnon_pair_entanglement(sigma))
        rep = pairwise_entanglement(sigma)
    except (LyapunovResidualError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return SweepRow(coords, True, verdict.margin, error=f"{type(exc).__name__}: {exc}")
    return SweepRow(coords, True, verdict.margin, rep.e_cm1, rep.e_cm2, rep.e_m1m2)


def _evaluate_chunk(spec: GridSpec, chunk: Sequence[tuple[float, ...]]) -> list[SweepRow]:
    return [_evaluate(spec, c) for c in chunk]


def default_jobs() -> int:
    env = os.environ.get("MAGNON_SIM_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(spec: GridSpec, jobs: Optional[int] = None) -> SweepResult:
    """Evaluate every grid cell; per-cell solver failures become rows with an ``error`` string."""
    cells = spec.cells()
    jobs = default_jobs() if jobs is None else jobs
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    if jobs == 1 or len(cells) < 2:
        rows = _evaluate_chunk(spec, cells)
    else:
        n_chunks = min(len(cells), 4 * jobs)
        bounds = np.linspace(0, len(cells), n_chunks + 1).astype(int)
        chunks = [cells[bounds[k] : bounds[k + 1]] for k in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map returns in submission order, which keeps the table row-major
            rows = [row for part in pool.map(_evaluate_chunk, [spec] * len(chunks), chunks) for row in part]
    return SweepResult(tuple(ax.name for ax in spec.axes), tuple(rows), spec.model, spec.task)


@dataclass(frozen=True)
class RatioCurve:
    g2: float
    kappa: float
    ratios: np.ndarray
    e_m1m2: np.ndarray  # NaN where the cell failed
    argmax_ratio: float
    max_e: float
    errors: int


def ratio_sweep(
    g2_values: Sequence[float],
    ratio_axis: Axis,
    kappa_values: Sequence[float],
    fixed: Optional[Mapping[str, Any]] = None,
    jobs: Optional[int] = None,
) -> list[RatioCurve]:
    """
    Magnon-magnon E_N of the resonant model against g1/g2, one curve per (g2, κ) pair.

    Ratios must lie in [0, 1).  Failed cells (for example a Lyapunov residual
    over tolerance) are NaN and skipped by the argmax.
    """
    if ratio_axis.name != "g1_over_g2":
        raise ParameterError("ratio_sweep needs a g1_over_g2 axis")
    if ratio_axis.min < 0.0 or ratio_axis.max >= 1.0:
        raise ParameterError("ratios must lie in [0, 1)")
    fixed = dict(fixed or {})
    curves = []
    for g2 in g2_values:
        for kappa in kappa_values:
            spec = GridSpec(
                axis1=ratio_axis,
                fixed={**fixed, "g2": g2, "kappa": kappa},
                model=Model.RESONANT,
                task="entanglement",
            )
            res = run_sweep(spec, jobs)
            e = res.column("e_m1m2")
            ratios = ratio_axis.values()
            if np.all(np.isnan(e)):
                best, best_e = math.nan, math.nan
            else:
                k = int(np.nanargmax(e))
                best, best_e = float(ratios[k]), float(e[k])
            errors = sum(r.error is not None for r in res.rows)
            curves.append(RatioCurve(float(g2), float(kappa), ratios, e, best, best_e, errors))
    return curves
