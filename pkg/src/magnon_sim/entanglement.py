"""Pairwise entanglement of steady states, the large-detuning closed form and cooling figures of merit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .gaussian import CAVITY, MAGNON_1, MAGNON_2, log_negativity, reduce_two_mode
from .models import ParameterError, PhysicalParams, derive_params

ZERO_CUTOFF = 1e-12


def _clip(value: float) -> float:
    return 0.0 if value < ZERO_CUTOFF else value


@dataclass(frozen=True)
class EntanglementReport:
    """Logarithmic negativities (nats) of the three bipartitions of the cavity-magnon-magnon state."""

    e_cm1: float
    e_cm2: float
    e_m1m2: float

    def __post_init__(self):
        for name in ("e_cm1", "e_cm2", "e_m1m2"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"{name} must be >= 0")

    def as_dict(self) -> dict[str, float]:
        return {"E_c_m1": self.e_cm1, "E_c_m2": self.e_cm2, "E_m1_m2": self.e_m1m2}


def pairwise_entanglement(sigma: NDArray[np.float64]) -> EntanglementReport:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (6, 6):
        raise ValueError(f"expected a 6x6 covariance matrix, got {sigma.shape}")
    return EntanglementReport(
        e_cm1=_clip(log_negativity(reduce_two_mode(sigma, CAVITY, MAGNON_1))),
        e_cm2=_clip(log_negativity(reduce_two_mode(sigma, CAVITY, MAGNON_2))),
        e_m1m2=_clip(log_negativity(reduce_two_mode(sigma, MAGNON_1, MAGNON_2))),
    )


def magnon_pair_entanglement(sigma: NDArray[np.float64]) -> float:
    """E_N between the magnons for either the 6x6 three-mode or the 4x4 magnon-only state."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape == (4, 4):
        return _clip(log_negativity(sigma))
    return pairwise_entanglement(sigma).e_m1m2


def closed_form_en(Omega_1: float, Omega_2: float, G: float, gamma: float) -> float:
    """
    E_N = ln(1 + 2|G| / sqrt((Ω1 + Ω2)² + γ²)) for the large-detuning magnon pair.

    All rates share one unit.  The sign of G is a phase convention and does
    not change the entanglement, hence |G|.
    """
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return math.log1p(2.0 * abs(G) / math.hypot(Omega_1 + Omega_2, gamma))


def closed_form_bound(Omega_1: float, Omega_2: float, G: float) -> float:
    """The γ → 0 limit ln(1 + 2|G| / |Ω1 + Ω2|), an upper bound of ``closed_form_en``."""
    s = abs(Omega_1 + Omega_2)
    if s == 0.0:
        return math.inf if G else 0.0
    return math.log1p(2.0 * abs(G) / s)


def closed_form_from_params(p: PhysicalParams) -> float:
    d = derive_params(p)
    if d.G is None:
        raise ParameterError("closed form needs nonzero detunings Delta_1 and Delta_2")
    if d.gamma_1 != d.gamma_2:
        raise ParameterError("closed form assumes equal magnon decay rates")
    return closed_form_en(d.Omega_1, d.Omega_2, d.G, d.gamma_1)


@dataclass(frozen=True)
class CoolingDiagnostics:
    J_eff: float  # rad/ns
    r_squeeze: float
    Gamma_eff: float  # rad/ns
    gamma_ratio: float


def cooling_diagnostics(p: PhysicalParams) -> CoolingDiagnostics:
    """Sideband-cooling figures of merit of the Bogoliubov mode that couples to the cavity."""
    d = derive_params(p)
    g1, g2 = abs(d.g1), d.g2
    if not g1 < g2:
        raise ParameterError(f"cooling diagnostics need |g1| < g2, got g1={g1}, g2={g2} rad/ns")
    if not d.kappa > 0.0:
        raise ParameterError("cooling diagnostics need a nonzero cavity decay")
    j_eff = math.sqrt(g2 * g2 - g1 * g1)
    gamma_eff = 4.0 * j_eff * j_eff / d.kappa
    gamma_max = max(d.gamma_1, d.gamma_2)
    ratio = gamma_eff / gamma_max if gamma_max > 0 else math.inf
    return CoolingDiagnostics(J_eff=j_eff, r_squeeze=math.atanh(g1 / g2), Gamma_eff=gamma_eff, gamma_ratio=ratio)
