"""Kummer confluent hypergeometric function and the parabolic-region basis.

The two-parabola well is solved on the Kummer basis

    psi(x) = M(alpha, 1/2, g s^2)        exp(-g x (x - 2 x_c) / 2)
    phi(x) = M(alpha + 1/2, 3/2, g s^2)  s  exp(-g x (x - 2 x_c) / 2)

with s = x - x_c, g = sqrt(2 a m*) / hbar and alpha = -(g E / a - 1) / 4.
The exponential prefactor equals exp(g x_c^2 / 2) exp(-g s^2 / 2); the
constant factor is a basis normalisation with no spectral effect and is kept
exactly as written.  Derivatives come from the exact identity
dM(a,b,u)/du = (a/b) M(a+1, b+1, u); their correctness is enforced by an
ODE-residual test rather than by any closed printed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import Material

#: arguments with |x| beyond this are refused rather than silently degraded
KUMMER_MAX_ARG = 300.0

_MAX_TERMS = 4000


def _kummer_series(a: float, b: float, x: float) -> float:
    """Raw Taylor sum of M(a, b, x); stops once five consecutive terms are
    below 1e-16 of the running sum.  Stable for x >= 0; for x < 0 the sum
    suffers cancellation and callers should route through the Kummer
    transformation instead."""
    term = 1.0
    total = 1.0
    peak = 1.0
    small = 0
    for n in range(_MAX_TERMS):
        term *= (a + n) * x / ((b + n) * (n + 1))
        total += term
        peak = max(peak, abs(term))
        # The peak-based floor lets terminating (polynomial) cases stop even
        # when the sum itself passes through zero.  The growth guard blocks
        # the early dip of near-terminating series (a close to a negative
        # integer), whose tiny mid-series terms regrow as x^n/n! until n ~ x.
        if abs(term) < 1e-16 * abs(total) + 1e-32 * peak:
            small += 1
            growing = abs((a + n + 1) * x) >= (b + n + 1) * (n + 2)
            if small >= 5 and (term == 0.0 or not growing):
                return total
        else:
            small = 0
    raise ArithmeticError(f"Kummer series failed to converge for a={a}, b={b}, x={x}")


def kummer_m(a: float, b: float, x: float) -> float:
    """Confluent hypergeometric M(a, b, x) = sum (a)_n x^n / ((b)_n n!).

    b at a non-positive integer is a pole of the function and raises; |x| is
    validated against KUMMER_MAX_ARG so an out-of-range request fails loudly
    instead of returning a low-precision value.  Negative arguments are routed
    through M(a,b,x) = e^x M(b-a, b, -x) onto the cancellation-free positive
    series.
    """
    if b <= 0 and b == math.floor(b):
        raise ValueError(f"M(a, b, x) has poles at non-positive integer b, got b={b}")
    if abs(x) > KUMMER_MAX_ARG:
        raise ValueError(f"|x| = {abs(x)} outside validated range {KUMMER_MAX_ARG}")
    if x < 0:
        return math.exp(x) * _kummer_series(b - a, b, -x)
    return _kummer_series(a, b, x)


@dataclass(frozen=True)
class KummerParams:
    """alpha and gamma of the parabolic-region basis for given (E, a, m*)."""

    alpha: float
    gamma: float  # 1/nm^2

    @classmethod
    def from_energy(cls, E: float, a: float, m: Material) -> "KummerParams":
        gamma = math.sqrt(a * m.inv_length_sq_per_ev)
        alpha = -0.25 * (gamma * E / a - 1.0)
        return cls(alpha=alpha, gamma=gamma)


class Region(Enum):
    LEFT = "left"    # (-2 x0, 0), parabola centred at -x0
    RIGHT = "right"  # (0, +2 x0), parabola centred at +x0


@dataclass(frozen=True)
class ParabolicBasisEval:
    psi: float
    phi: float   # carries one factor of length (nm)
    dpsi: float
    dphi: float

    def wronskian(self) -> float:
        return self.psi * self.dphi - self.dpsi * self.phi


def parabolic_basis(E: float, a: float, x0: float, m: Material, x: float,
                    which_region: Region) -> ParabolicBasisEval:
    """Evaluate the even/odd Kummer basis of one parabolic region at x.

    The region picks the parabola centre (x_c = -x0 for LEFT, +x0 for RIGHT);
    the formulas themselves solve that region's oscillator equation for all x.
    """
    par = KummerParams.from_energy(E, a, m)
    g, al = par.gamma, par.alpha
    xc = -x0 if which_region is Region.LEFT else +x0
    s = x - xc
    u = g * s * s
    # exp(-g x (x - 2 xc) / 2) = exp(g xc^2 / 2) exp(-g s^2 / 2)
    pref = math.exp(-0.5 * g * (s * s - xc * xc))

    m0 = kummer_m(al, 0.5, u)
    m1 = kummer_m(al + 0.5, 1.5, u)
    m_psi = kummer_m(al + 1.0, 1.5, u)
    m_phi = kummer_m(al + 1.5, 2.5, u)

    psi = m0 * pref
    phi = m1 * s * pref
    dpsi = g * s * (4.0 * al * m_psi - m0) * pref
    dphi = ((1.0 - g * s * s) * m1 + (2.0 * g * s * s * (2.0 * al + 1.0) / 3.0) * m_phi) * pref
    return ParabolicBasisEval(psi=psi, phi=phi, dpsi=dpsi, dphi=dphi)


def _exterior_kappa(E: float, a: float, x0: float, m: Material) -> float:
    top = a * x0 * x0
    if not 0.0 < E < top:
        raise ValueError(f"E={E} outside the bound window (0, {top})")
    return math.sqrt((top - E) * m.inv_length_sq_per_ev)


def _scaled_det(mat: np.ndarray) -> float:
    """Determinant after dividing each column by its max magnitude (a smooth
    positive normaliser: zero locations and sign pattern are unchanged, the
    value stays in representable range)."""
    scale = np.max(np.abs(mat), axis=0)
    scale[scale == 0.0] = 1.0
    return float(np.linalg.det(mat / scale))


def parabolic_matching_determinant(E: float, a: float, x0: float, m: Material,
                                   mirror: bool = False) -> float:
    """6x6 continuity determinant of the double parabolic well; zeros in E on
    (0, a x0^2) are the bound states.

    Unknowns: exterior decay amplitudes A (left), B (right) and the basis
    coefficients (c1, c2) / (c3, c4) of the left / right interior regions.
    Value and slope are matched at x = -2 x0, 0, +2 x0.  `mirror` assembles the
    same system for the x -> -x reflected problem, a symmetry self-check.
    """
    kap = _exterior_kappa(E, a, x0, m)
    left, right = (Region.RIGHT, Region.LEFT) if mirror else (Region.LEFT, Region.RIGHT)
    sgn = -1.0 if mirror else 1.0
    bL_out = parabolic_basis(E, a, x0, m, sgn * -2 * x0, left)
    bL_in = parabolic_basis(E, a, x0, m, 0.0, left)
    bR_in = parabolic_basis(E, a, x0, m, 0.0, right)
    bR_out = parabolic_basis(E, a, x0, m, sgn * 2 * x0, right)
    if mirror:
        # reflected basis: psi(-x) stays even, phi(-x) flips, slopes swap signs
        def flip(b):
            return ParabolicBasisEval(psi=b.psi, phi=-b.phi, dpsi=-b.dpsi, dphi=b.dphi)
        bL_out, bL_in, bR_in, bR_out = flip(bL_out), flip(bL_in), flip(bR_in), flip(bR_out)

    # columns: A, c1, c2, c3, c4, B
    mat = np.array([
        [1.0, -bL_out.psi, -bL_out.phi, 0.0, 0.0, 0.0],
        [kap, -bL_out.dpsi, -bL_out.dphi, 0.0, 0.0, 0.0],
        [0.0, bL_in.psi, bL_in.phi, -bR_in.psi, -bR_in.phi, 0.0],
        [0.0, bL_in.dpsi, bL_in.dphi, -bR_in.dpsi, -bR_in.dphi, 0.0],
        [0.0, 0.0, 0.0, bR_out.psi, bR_out.phi, -1.0],
        [0.0, 0.0, 0.0, bR_out.dpsi, bR_out.dphi, kap],
    ])
    return _scaled_det(mat)


def parabolic_parity_determinant(E: float, a: float, x0: float, m: Material,
                                 parity: str) -> float:
    """3x3 determinant of one parity sector of the symmetric double parabola.

    Even states satisfy psi'(0) = 0, odd states psi(0) = 0; each sector has
    simple, well-separated zeros, so exponentially small pair splittings that
    hide inside a single grid cell of the full determinant resolve cleanly.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    kap = _exterior_kappa(E, a, x0, m)
    b_in = parabolic_basis(E, a, x0, m, 0.0, Region.RIGHT)
    b_out = parabolic_basis(E, a, x0, m, 2 * x0, Region.RIGHT)
    if parity == "even":
        centre_row = [b_in.dpsi, b_in.dphi, 0.0]
    else:
        centre_row = [b_in.psi, b_in.phi, 0.0]
    mat = np.array([
        centre_row,
        [b_out.psi, b_out.phi, -1.0],
        [b_out.dpsi, b_out.dphi, kap],
    ])
    return _scaled_det(mat)
