"""
Stability of linear Langevin dynamics by two independent routes.

``eigen_stable`` looks at the spectrum of the drift matrix directly.
``routh_hurwitz_stable`` works from the characteristic-polynomial
coefficients, either computed numerically (Faddeev-LeVerrier) or from the
closed-form expressions for the three-mode model.  Hurwitz determinants are
evaluated in exact rational arithmetic: at GHz frequencies and MHz decay
rates they cancel by more than twelve orders of magnitude, which double
precision cannot resolve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .models import DerivedParams

EPS_STAB = 1e-12


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    method: str  # "eigen" or "routh_hurwitz"
    margin: Optional[float] = None  # max real part of the spectrum, rad/ns (eigen route)
    failed_condition: Optional[int] = None  # first nonpositive Hurwitz determinant (1-based)
    hurwitz_dets: Optional[tuple[float, ...]] = None
    simplified_failed: Optional[str] = None  # first violated condition of the reduced chain


def eigen_stable(a: NDArray[np.float64]) -> StabilityVerdict:
    """Stable iff every eigenvalue has real part below -1e-12 (marginal counts as unstable)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"drift matrix must be square, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("drift matrix has non-finite entries")
    margin = float(np.max(np.linalg.eigvals(a).real))
    return StabilityVerdict(stable=margin < -EPS_STAB, method="eigen", margin=margin)


def char_poly_numeric(a: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Coefficients (a_0 = 1, a_1, ..., a_n) of det(λI - A) by the Faddeev-LeVerrier recurrence.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not 1 <= n <= 8:
        raise ValueError(f"unsupported drift matrix shape {a.shape}")
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def char_poly_closed_form(d: DerivedParams, exact: bool = False, as_printed: bool = False):
    """
    Closed-form characteristic-polynomial coefficients a_0..a_6 of the three-mode drift matrix.

    Parameters
    ----------
    d:
        Derived parameters; uses ω_c, ϖ, ω_2, g1, g2, κ, γ1, γ2 (rad/ns).
    exact:
        Evaluate in rational arithmetic from the exact binary values of the
        inputs and return a list of ``Fraction``.  Otherwise a float array.
    as_printed:
        Reproduce two misprinted terms (a dimensionally inconsistent extra
        γ1 factor in a_5 and a bare 16 g1⁴ in a_6).  Only useful to show that
        those forms disagree with det(λI - A).
    """
    conv = Fraction if exact else float
    k, y1, y2 = conv(d.kappa), conv(d.gamma_1), conv(d.gamma_2)
    g1, g2 = conv(d.g1), conv(d.g2)
    wc, vp, w2 = conv(d.omega_c), conv(d.varpi), conv(d.omega_2)
    one = conv(1)
    q = one / 4
    s = one / 16
    sf = one / 64

    a1 = y1 + y2 + k
    a2 = q * (y1**2 + y2**2 + k**2) + y1 * y2 + y1 * k + y2 * k - 2 * g1**2 + 2 * g2**2 + w2**2 + wc**2 + vp**2
    a3 = q * (
        y1**2 * y2
        + y1**2 * k
        + y1 * y2**2
        + 4 * y1 * y2 * k
        + 4 * wc**2 * (y1 + y2)
        + y1 * k**2
        + 4 * y1 * w2**2
        + y2**2 * k
        + y2 * k**2
        + 4 * y2 * vp**2
        - 4 * g1**2 * (y1 + 2 * y2 + k)
        + 4 * g2**2 * (2 * y1 + y2 + k)
        + 4 * k * w2**2
        + 4 * k * vp**2
    )
    a4 = s * (
        16 * g1**4
        + 16 * g2**4
        + y1**2 * y2**2
        + 4 * y1**2 * y2 * k
        + 4 * y1 * y2**2 * k
        + y1**2 * k**2
        + 4 * y1 * y2 * k**2
        + y2**2 * k**2
        + 4 * y2**2 * vp**2
        + 16 * y2 * k * vp**2
        + 4 * k**2 * vp**2
        + 4 * y1**2 * w2**2
        + 16 * y1 * k * w2**2
        + 4 * k**2 * w2**2
        + 16 * w2**2 * vp**2
        + 4 * wc**2 * (y1**2 + 4 * y1 * y2 + y2**2 + 4 * (w2**2 + vp**2))
        - 8 * g1**2 * (4 * g2**2 + 2 * y1 * y2 + y2**2 + y1 * k + 2 * y2 * k + 4 * w2**2 + 4 * wc * vp)
        + 8 * g2**2 * (y1**2 + y2 * k + 2 * y1 * (y2 + k) - 4 * w2 * wc + 4 * vp**2)
    )
    if as_printed:
        w2_term = 4 * w2**2 * k * (y1 * (y1 * (y1 + k) + 4 * vp**2))
    else:
        w2_term = 4 * w2**2 * k * (y1 * (y1 + k) + 4 * vp**2)
    a5 = s * (
        16 * g2**4 * y1
        + 16 * g1**4 * y2
        + y2 * k * (y1 * y2 * k + y1**2 * (y2 + k) + 4 * (y2 + k) * vp**2)
        + w2_term
        + 4 * wc**2 * (y1 * y2 * (y1 + y2) + 4 * y2 * vp**2 + 4 * y1 * w2**2)
        - 4 * g1**2 * (4 * g2**2 * (y1 + y2) + y2**2 * k + 4 * k * w2**2 + y1 * (y2**2 + 2 * y2 * k + 4 * w2**2) + 8 * y2 * vp * wc)
        + 4 * g2**2 * (y1**2 * (y2 + k) + 4 * vp**2 * (y2 + k) + 2 * y1 * (y2 * k - 4 * w2 * wc))
    )
    a6_core = (
        -8 * g2**2 * (4 * g1**2 * (y1 * y2 - 4 * w2 * vp) - (y1**2 + 4 * vp**2) * (y2 * k - 4 * w2 * wc))
        + (y2**2 + 4 * w2**2) * ((y1**2 + 4 * vp**2) * (k**2 + 4 * wc**2) - 8 * g1**2 * (y1 * k + 4 * wc * vp))
        + 16 * g2**4 * (y1**2 + 4 * vp**2)
    )
    if as_printed:
        a6 = sf * a6_core + 16 * g1**4
    else:
        a6 = sf * (a6_core + 16 * g1**4 * (y2**2 + 4 * w2**2))
    coeffs = [one, a1, a2, a3, a4, a5, a6]
    return coeffs if exact else np.array(coeffs, dtype=float)


def _as_fractions(coeffs: Sequence) -> list[Fraction]:
    return [c if isinstance(c, Fraction) else Fraction(float(c)) for c in coeffs]


def hurwitz_matrices(coeffs: Sequence, bound: str = "degree") -> list[list[list]]:
    """
    Hurwitz matrices T^k, k = 1..n, with entries T^k_ij = a_{2i-j} (1 <= i, j <= k).

    Entries whose index falls outside [0, n] are zero (``bound="degree"``, the
    standard construction).  ``bound="k"`` instead zeroes indices above k,
    which drops a_3 from T^2 and no longer matches the spectrum.
    """
    n = len(coeffs) - 1
    if bound not in ("degree", "k"):
        raise ValueError(f"unknown bound {bound!r}")
    mats = []
    for k in range(1, n + 1):
        top = n if bound == "degree" else k
        mat = [[coeffs[2 * i - j] if 0 <= 2 * i - j <= top else 0 for j in range(1, k + 1)] for i in range(1, k + 1)]
        mats.append(mat)
    return mats


def _det_exact(mat: list[list[Fraction]]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    m = [list(row) for row in mat]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        p = m[col][col]
        det *= p
        for r in range(col + 1, n):
            factor = m[r][col] / p
            if factor:
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return det


def hurwitz_determinants(coeffs: Sequence, bound: str = "degree") -> list[Fraction]:
    """Exact determinants of the Hurwitz matrices (float inputs are taken at their exact binary value)."""
    fr = _as_fractions(coeffs)
    return [_det_exact(m) for m in hurwitz_matrices(fr, bound)]


def simplified_conditions(coeffs: Sequence) -> list[tuple[str, bool]]:
    """
    The reduced condition chain for degree 4 or 6 polynomials: positivity of
    all a_k, a1 a2 > a3, a1 a2 a3 > a3² + a1² a4, and for degree 6 T1 > T2 and
    T3 > T4.  For degree 6 only the last one is equivalent to a Hurwitz
    determinant (Δ5); the chain is reported as a diagnostic, the verdict
    comes from the full determinant test.
    """
    a = _as_fractions(coeffs)
    n = len(a) - 1
    if n not in (4, 6):
        raise ValueError("simplified conditions are defined for degree 4 and 6")
    a = a + [Fraction(0)] * (7 - len(a))
    a1, a2, a3, a4, a5, a6 = a[1:7]
    out = [(f"a{k}>0", a[k] > 0) for k in range(1, n + 1)]
    out.append(("a1a2>a3", a1 * a2 > a3))
    out.append(("a1a2a3>a3^2+a1^2a4", a1 * a2 * a3 > a3**2 + a1**2 * a4))
    if n == 6:
        t1 = (a1 * a4 - a5) * (a1 * a2 * a3 - a3**2 - a1**2 * a4)
        t2 = a1 * a5**2 + a5 * (a1 * a2 - a3) ** 2
        t3 = a1**2 * a6 * (2 * a2 * a5 + a3 * a4) + a3**3 * a6 + a1 * a2 * a3 * a4 * a5 + a5**2 * (2 * a1 * a4 + a2 * a3)
        t4 = a1**2 * (a1 * a6**2 + a4**2 * a5) + a5**3 + a4 * a5 * a3**2 + a1 * (a2 * a6 * a3**2 + 3 * a3 * a5 * a6 + a2**2 * a5**2)
        out.append(("T1>T2", t1 > t2))
        out.append(("T3>T4", t3 > t4))
    return out


def routh_hurwitz_stable(coeffs: Sequence) -> StabilityVerdict:
    """Stable iff every Hurwitz determinant is strictly positive (a_0 must be positive)."""
    fr = _as_fractions(coeffs)
    if fr[0] <= 0:
        raise ValueError("leading coefficient must be positive")
    dets = hurwitz_determinants(fr)
    failed = next((k + 1 for k, det in enumerate(dets) if det <= 0), None)
    simplified_failed = None
    if len(fr) - 1 in (4, 6):
        simplified_failed = next((name for name, ok in simplified_conditions(fr) if not ok), None)
    return StabilityVerdict(
        stable=failed is None,
        method="routh_hurwitz",
        failed_condition=failed,
        hurwitz_dets=tuple(float(det) for det in dets),
        simplified_failed=simplified_failed,
    )
