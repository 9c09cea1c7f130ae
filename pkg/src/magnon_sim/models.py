"""
Physical parameters and the quadratic models of the driven cavity-magnon system.

Inputs are cyclic frequencies in GHz (ν = ω/2π); everything derived here is
angular, in rad/ns, with time in ns.  A quadratic Hamiltonian is stored as
H = ½ Rᵀ M R in the quadrature ordering of :mod:`magnon_sim.gaussian`, and the
Langevin drift matrix follows as A = Ω M - ½ diag(decays).
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .bessel import bessel_j
from .gaussian import symplectic_form, two_mode_squeezing_symplectic

TWO_PI = 2.0 * math.pi


class ParameterError(ValueError):
    """Invalid or inconsistent physical parameters."""


class Model(str, enum.Enum):
    FULL = "full"
    RWA = "rwa"
    RESONANT = "resonant"
    EFFECTIVE = "effective"


@dataclass(frozen=True)
class PhysicalParams:
    """
    Laboratory parameters, all cyclic frequencies in GHz.

    ``g1`` is the drive-dressed counter-rotating coupling used by the
    time-independent models.  Leave it as None to derive it from the drive as
    g1 = -g1' J_{-1}(Omega_d / nu_d); set it to supply the coupling directly
    (sweeps over detunings and couplings do this).
    """

    nu_c: float = 10.0
    nu_1: float = 10.1
    nu_2: float = 9.9
    nu_d: float = 20.0
    Omega_d: float = 36.0
    g1_prime: float = 0.05
    g2: float = 0.03
    kappa: float = 0.001
    gamma_1: float = 0.001
    gamma_2: float = 0.001
    g1: Optional[float] = None

    def __post_init__(self):
        for name in ("kappa", "gamma_1", "gamma_2"):
            value = getattr(self, name)
            if not value >= 0.0:
                raise ParameterError(f"{name} must be >= 0, got {value}")
        if self.Omega_d != 0.0 and self.nu_d == 0.0:
            raise ParameterError("nu_d must be nonzero when Omega_d is nonzero")
        if self.Omega_d > 0.0 and self.nu_d < 0.0:
            raise ParameterError(f"nu_d must be > 0 when driving, got {self.nu_d}")
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is not None and not math.isfinite(value):
                raise ParameterError(f"{f.name} must be finite, got {value}")

    def replace(self, **changes) -> "PhysicalParams":
        return dataclasses.replace(self, **changes)

    @property
    def decays(self) -> tuple[float, float, float]:
        """(kappa, gamma_1, gamma_2) in rad/ns."""
        return (TWO_PI * self.kappa, TWO_PI * self.gamma_1, TWO_PI * self.gamma_2)

    @property
    def magnon_decays(self) -> tuple[float, float]:
        return (TWO_PI * self.gamma_1, TWO_PI * self.gamma_2)


@dataclass(frozen=True)
class DerivedParams:
    """Derived model quantities, angular frequencies in rad/ns.

    Quantities that do not exist in the current regime (the squeezing
    amplitude when g1 >= g2, effective couplings at zero detuning) are None.
    """

    xi: float
    g1: float
    g2: float
    omega_c: float
    omega_1: float
    omega_2: float
    omega_d: float
    varpi: float
    Delta_1: float
    Delta_2: float
    kappa: float
    gamma_1: float
    gamma_2: float
    Omega_1: Optional[float] = None
    Omega_2: Optional[float] = None
    G: Optional[float] = None
    J_eff: Optional[float] = None
    r_squeeze: Optional[float] = None
    Gamma_eff: Optional[float] = None

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def drive_index(p: PhysicalParams) -> float:
    """Modulation index ξ = Ω_d/ω_d (zero without drive)."""
    if p.Omega_d == 0.0:
        return 0.0
    return p.Omega_d / p.nu_d


def derive_params(p: PhysicalParams) -> DerivedParams:
    xi = drive_index(p)
    if p.g1 is not None:
        g1 = TWO_PI * p.g1
    else:
        g1 = -TWO_PI * p.g1_prime * bessel_j(-1, xi)
    g2 = TWO_PI * p.g2
    # detunings are formed in cyclic units first to keep the round trip exact
    delta_1 = TWO_PI * (p.nu_c + p.nu_1 - p.nu_d)
    delta_2 = TWO_PI * (p.nu_c - p.nu_2)
    varpi = TWO_PI * (p.nu_1 - p.nu_d)
    omega_2 = TWO_PI * p.nu_2
    kappa, gamma_1, gamma_2 = p.decays

    omega_1_eff = omega_2_eff = big_g = None
    if delta_1 != 0.0 and delta_2 != 0.0:
        omega_1_eff = -g1 * g1 / delta_1 + varpi
        omega_2_eff = -g2 * g2 / delta_2 + omega_2
        big_g = 0.5 * g1 * g2 * (1.0 / delta_1 + 1.0 / delta_2)

    j_eff = r_sq = gamma_eff = None
    if abs(g2) >= abs(g1):
        j_eff = math.sqrt(g2 * g2 - g1 * g1)
        if kappa > 0.0:
            gamma_eff = 4.0 * j_eff * j_eff / kappa
    if g2 > 0.0 and abs(g1) < g2:
        r_sq = math.atanh(g1 / g2)

    return DerivedParams(
        xi=xi,
        g1=g1,
        g2=g2,
        omega_c=TWO_PI * p.nu_c,
        omega_1=TWO_PI * p.nu_1,
        omega_2=omega_2,
        omega_d=TWO_PI * p.nu_d,
        varpi=varpi,
        Delta_1=delta_1,
        Delta_2=delta_2,
        kappa=kappa,
        gamma_1=gamma_1,
        gamma_2=gamma_2,
        Omega_1=omega_1_eff,
        Omega_2=omega_2_eff,
        G=big_g,
        J_eff=j_eff,
        r_squeeze=r_sq,
        Gamma_eff=gamma_eff,
    )


def params_from_detunings(
    nu_c: float = 10.0,
    nu_d: float = 20.0,
    Delta_1: float = 0.0,
    Delta_2: float = 0.0,
    g1: float = 0.001,
    g2: float = 0.001,
    kappa: float = 0.001,
    gamma_1: float = 0.001,
    gamma_2: float = 0.001,
) -> PhysicalParams:
    """Parameters of the time-independent models specified by detunings (cyclic GHz).

    The magnon frequencies are chosen so that ``derive_params`` returns the
    requested detunings, and g1 is used as given.
    """
    return PhysicalParams(
        nu_c=nu_c,
        nu_1=Delta_1 + nu_d - nu_c,
        nu_2=nu_c - Delta_2,
        nu_d=nu_d,
        Omega_d=0.0,
        g1_prime=0.0,
        g2=g2,
        kappa=kappa,
        gamma_1=gamma_1,
        gamma_2=gamma_2,
        g1=g1,
    )


# --- Jacobi-Anger sidebands -------------------------------------------------


@dataclass(frozen=True)
class JacobiAngerTerm:
    f: int
    amplitude: float  # g1' J_f(ξ), rad/ns
    delta_f: float  # ω_c + ω_1 + f ω_d, rad/ns


def jacobi_anger_terms(p: PhysicalParams, f_min: int = -5, f_max: int = 3) -> list[JacobiAngerTerm]:
    if not f_min <= -1 <= f_max:
        raise ValueError("the order range must contain the resonant order f = -1")
    xi = drive_index(p)
    g1p = TWO_PI * p.g1_prime
    w_sum = TWO_PI * (p.nu_c + p.nu_1)
    w_d = TWO_PI * p.nu_d
    return [JacobiAngerTerm(f, g1p * bessel_j(f, xi), w_sum + f * w_d) for f in range(f_min, f_max + 1)]


def rwa_validity(p: PhysicalParams, f_min: int = -5, f_max: int = 3) -> float:
    """Worst-case suppression |δ_f| / (g1' |J_f(ξ)|) over the dropped sidebands f ≠ -1.

    Returns ``math.inf`` when every dropped sideband has zero amplitude.
    """
    ratio = math.inf
    for term in jacobi_anger_terms(p, f_min, f_max):
        if term.f == -1 or term.amplitude == 0.0:
            continue
        ratio = min(ratio, abs(term.delta_f) / abs(term.amplitude))
    return ratio


def sideband_shift(p: PhysicalParams, f_min: int = -40, f_max: int = 40) -> float:
    """
    Second-order frequency shift (GHz) that the dropped sidebands impose on the cavity and magnon 1.

    Each counter-rotating term f ≠ -1 shifts both modes down by (g1' J_f)² / δ_f.
    The RWA Hamiltonian omits this; lowering ``nu_c`` and ``nu_1`` by the
    returned amount restores agreement with the driven model.
    """
    total = 0.0
    for term in jacobi_anger_terms(p, f_min, f_max):
        if term.f != -1 and term.amplitude != 0.0:
            total += term.amplitude**2 / term.delta_f
    return total / TWO_PI


# --- quadratic Hamiltonians -------------------------------------------------


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """H(t) = ½ Rᵀ M(t) R with M(t) = static + cos(drive_freq t) · modulation."""

    static: NDArray[np.float64]
    modulation: Optional[NDArray[np.float64]] = None
    drive_freq: float = 0.0
    name: str = ""

    @property
    def n_modes(self) -> int:
        return self.static.shape[0] // 2

    @property
    def time_dependent(self) -> bool:
        return self.modulation is not None and self.drive_freq != 0.0

    @property
    def period(self) -> Optional[float]:
        if not self.time_dependent:
            return None
        return TWO_PI / abs(self.drive_freq)

    def matrix(self, t: float = 0.0) -> NDArray[np.float64]:
        if self.modulation is None:
            return self.static
        return self.static + math.cos(self.drive_freq * t) * self.modulation


def quadratic_form(
    frequencies: Sequence[float],
    beam_splitters: Sequence[tuple[int, int, float]] = (),
    squeezers: Sequence[tuple[int, int, float]] = (),
) -> NDArray[np.float64]:
    """
    Quadrature matrix M of Σ ω_j a_j†a_j + Σ g (a_i† a_j + h.c.) + Σ g (a_i† a_j† + h.c.).

    Constant zero-point offsets are dropped.
    """
    n = len(frequencies)
    m = np.zeros((2 * n, 2 * n))
    for j, w in enumerate(frequencies):
        m[2 * j, 2 * j] = m[2 * j + 1, 2 * j + 1] = w
    for i, j, g in beam_splitters:
        block = g * np.eye(2)
        m[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] += block
        m[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] += block
    for i, j, g in squeezers:
        block = g * np.diag([1.0, -1.0])
        m[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] += block
        m[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] += block
    return m


def hamiltonian_full(p: PhysicalParams) -> QuadraticHamiltonian:
    """Driven laboratory-frame Hamiltonian with the cosine-modulated magnon 1."""
    w_c, w_1, w_2 = TWO_PI * p.nu_c, TWO_PI * p.nu_1, TWO_PI * p.nu_2
    static = quadratic_form(
        (w_c, w_1, w_2),
        beam_splitters=[(0, 2, TWO_PI * p.g2)],
        squeezers=[(0, 1, TWO_PI * p.g1_prime)],
    )
    modulation = quadratic_form((0.0, TWO_PI * p.Omega_d, 0.0))
    return QuadraticHamiltonian(static, modulation, TWO_PI * p.nu_d, name="full")


def hamiltonian_rwa(p: PhysicalParams) -> QuadraticHamiltonian:
    d = derive_params(p)
    m = quadratic_form(
        (d.omega_c, d.varpi, d.omega_2),
        beam_splitters=[(0, 2, d.g2)],
        squeezers=[(0, 1, -d.g1)],
    )
    return QuadraticHamiltonian(m, name="rwa")


def hamiltonian_resonant(p: PhysicalParams) -> QuadraticHamiltonian:
    d = derive_params(p)
    m = quadratic_form((0.0, 0.0, 0.0), beam_splitters=[(0, 2, d.g2)], squeezers=[(0, 1, -d.g1)])
    return QuadraticHamiltonian(m, name="resonant")


def hamiltonian_effective(p: PhysicalParams) -> QuadraticHamiltonian:
    """Two-magnon Hamiltonian after eliminating the far-detuned cavity."""
    d = derive_params(p)
    if d.G is None:
        raise ParameterError("the effective model needs nonzero detunings Delta_1 and Delta_2")
    m = quadratic_form((d.Omega_1, d.Omega_2), squeezers=[(0, 1, d.G)])
    return QuadraticHamiltonian(m, name="effective")


_BUILDERS = {
    Model.FULL: hamiltonian_full,
    Model.RWA: hamiltonian_rwa,
    Model.RESONANT: hamiltonian_resonant,
    Model.EFFECTIVE: hamiltonian_effective,
}


def build_hamiltonian(p: PhysicalParams, model: Model | str) -> QuadraticHamiltonian:
    return _BUILDERS[Model(model)](p)


def model_decays(p: PhysicalParams, model: Model | str) -> tuple[float, ...]:
    """Per-mode decay rates (rad/ns) in the mode order of ``model``."""
    if Model(model) is Model.EFFECTIVE:
        return p.magnon_decays
    return p.decays


# --- drift and diffusion ----------------------------------------------------


def drift_from_hamiltonian(h: QuadraticHamiltonian, decays: Sequence[float], t: float = 0.0) -> NDArray[np.float64]:
    """Langevin drift A(t) = Ω M(t) - ½ diag(decays repeated per quadrature)."""
    n = h.n_modes
    if len(decays) != n:
        raise ValueError(f"expected {n} decay rates, got {len(decays)}")
    if any(not g >= 0.0 for g in decays):
        raise ValueError("decay rates must be >= 0")
    damping = 0.5 * np.repeat(np.asarray(decays, dtype=float), 2)
    return symplectic_form(n) @ h.matrix(t) - np.diag(damping)


def diffusion_matrix(decays: Sequence[float]) -> NDArray[np.float64]:
    """Vacuum-noise diffusion diag(γ_j/2, γ_j/2, ...)."""
    rates = np.asarray(decays, dtype=float)
    if np.any(rates < 0.0):
        raise ValueError("decay rates must be >= 0")
    return np.diag(0.5 * np.repeat(rates, 2))


def drift_matrix(p: PhysicalParams, model: Model | str = Model.RWA, t: float = 0.0) -> NDArray[np.float64]:
    return drift_from_hamiltonian(build_hamiltonian(p, model), model_decays(p, model), t)


def model_diffusion(p: PhysicalParams, model: Model | str = Model.RWA) -> NDArray[np.float64]:
    return diffusion_matrix(model_decays(p, model))


# --- Bogoliubov modes -------------------------------------------------------


@dataclass(frozen=True)
class BogoliubovTransform:
    """
    Magnon-pair Bogoliubov modes α = m1 cosh r - m2† sinh r, β = m2 cosh r - m1† sinh r.

    ``s_matrix`` maps (X1, Y1, X2, Y2) to (X_α, Y_α, X_β, Y_β).
    """

    r: float
    s_matrix: NDArray[np.float64] = field(repr=False)
    J: float = 0.0

    def embed(self, n_modes: int = 3, first_mode: int = 1) -> NDArray[np.float64]:
        """The transform acting on two adjacent modes of an ``n_modes`` system."""
        s = np.eye(2 * n_modes)
        k = 2 * first_mode
        s[k : k + 4, k : k + 4] = self.s_matrix
        return s


def bogoliubov_transform(g1: float, g2: float) -> BogoliubovTransform:
    if not 0.0 <= g1 < g2:
        raise ParameterError(f"Bogoliubov modes need 0 <= g1 < g2, got g1={g1}, g2={g2}")
    r = math.atanh(g1 / g2)
    # the quadratures of α and β follow from the mode definitions, i.e. the
    # inverse of the squeezer that maps vacuum to the two-mode squeezed state
    s = two_mode_squeezing_symplectic(-r)
    return BogoliubovTransform(r=r, s_matrix=s, J=math.sqrt(g2 * g2 - g1 * g1))


def transform_quadratic_form(m: NDArray[np.float64], s: NDArray[np.float64]) -> NDArray[np.float64]:
    """Quadratic form in the new quadratures R' = S R, i.e. S⁻ᵀ M S⁻¹."""
    s_inv = np.linalg.inv(s)
    return s_inv.T @ m @ s_inv
