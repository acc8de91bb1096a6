"""Quantum wave impedance engine in log-derivative form.

A layer with constant potential U maps the logarithmic derivative
L = psi'/psi at its right edge to the one at its left edge through a real
Moebius transform: cosh/sinh (written via tanh, which saturates instead of
overflowing) below the layer top, cos/sin above it.  Starting from the
decaying solution in the right exterior, L = -kappa_R, and sweeping left
gives a bounded residual

    D(E) = (L(x_left) - kappa_L) / (|L(x_left)| + kappa_L)

whose zeros are exactly the bound states.  The raw complex impedance of the
transmission-line picture is z = -(i hbar / m*) (psi'/psi); dividing out the
prefactor is what keeps every quantity here real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import HBAR2_OVER_2M0, ConstantSegment, Material, PotentialProfile


class Regime(Enum):
    PROPAGATING = "propagating"
    EVANESCENT = "evanescent"


@dataclass(frozen=True)
class LayerKinematics:
    """Wavenumber and characteristic impedance magnitude of a uniform layer."""

    regime: Regime
    wavenumber: float                        # k or kappa, 1/nm
    characteristic_impedance_magnitude: float  # sqrt(2 |E-U| / m_ratio)


@dataclass(frozen=True)
class MatchingResidual:
    energy: float
    value: float
    valid: bool


def layer_kinematics(E: float, U: float, m: Material) -> LayerKinematics:
    """Classify a layer at energy E.  E == U ties break to evanescent, kappa = 0."""
    diff = E - U
    q = math.sqrt(abs(diff) * m.inv_length_sq_per_ev)
    z = math.sqrt(2.0 * abs(diff) / m.effective_mass_ratio)
    regime = Regime.PROPAGATING if diff > 0 else Regime.EVANESCENT
    return LayerKinematics(regime=regime, wavenumber=q, characteristic_impedance_magnitude=z)


def impedance_from_logderiv(L: float, m: Material) -> complex:
    """Thin converter to the transmission-line convention z = -(i hbar/m*) psi'/psi.

    Returned in sqrt(eV / m-ratio) units so that a pure travelling wave with
    L = i k has |z| = sqrt(2 (E - U) / m_ratio)."""
    return -1j * L * math.sqrt(2.0 * HBAR2_OVER_2M0) / m.effective_mass_ratio


def propagate_through_layer(load_logderiv: float, E: float, U: float, d: float,
                            m: Material) -> float:
    """Map psi'/psi at a constant layer's right edge to its left edge.

    Exact for constant U.  A pole of the transform (psi = 0 at the left edge)
    returns a signed infinity, which downstream layers map back to finite
    values and the residual marks as an invalid sample.
    """
    if not d > 0:
        raise ValueError(f"layer thickness must be positive, got {d}")
    L = load_logderiv
    diff = E - U
    if diff > 0:
        k = math.sqrt(diff * m.inv_length_sq_per_ev)
        s, c = math.sin(k * d), math.cos(k * d)
        if math.isinf(L):
            return -k * c / s if s != 0.0 else L
        num = k * (k * s + L * c)
        den = k * c - L * s
        if den == 0.0:
            return math.copysign(math.inf, num) if num != 0.0 else math.nan
        return num / den
    if diff == 0.0:
        # linear-solution limit of both branches: L / (1 - L d)
        if math.isinf(L):
            return -1.0 / d
        den = 1.0 - L * d
        if den == 0.0:
            return math.copysign(math.inf, L)
        return L / den
    kap = math.sqrt(-diff * m.inv_length_sq_per_ev)
    t = math.tanh(kap * d)
    if math.isinf(L):
        return -kap / t if t > 0.0 else L
    if L == -kap:   # decaying solution is a fixed point of its own medium
        return -kap
    if L == kap:    # growing solution likewise
        return kap
    num = kap * (L - kap * t)
    den = kap - L * t
    if den == 0.0:
        return math.copysign(math.inf, num) if num != 0.0 else math.nan
    return num / den


def _require_constant(profile: PotentialProfile) -> None:
    for seg in profile.segments:
        if not isinstance(seg, ConstantSegment):
            raise ValueError(
                "impedance propagation needs constant segments only; "
                "discretize() parabolic profiles first"
            )


def _sweep_logderiv(profile: PotentialProfile, E: np.ndarray, m: Material,
                    left_to_right: bool = False) -> np.ndarray:
    """Vectorised layer sweep of L over an energy grid.

    Right-to-left starts at -kappa_R; left-to-right starts at +kappa_L and is
    only used for the mirror-symmetry checks.
    """
    inv = m.inv_length_sq_per_ev
    E = np.asarray(E, float)
    if left_to_right:
        u_start = profile.left_exterior
        layers = profile.segments
        sgn = +1.0
    else:
        u_start = profile.right_exterior
        layers = tuple(reversed(profile.segments))
        sgn = -1.0
    L = sgn * np.sqrt((u_start - E) * inv)
    for seg in layers:
        L = _layer_step(L, E, seg.level, seg.width, inv, left_to_right)
    return L


def _layer_step(L: np.ndarray, E: np.ndarray, U: float, d: float, inv: float,
                left_to_right: bool) -> np.ndarray:
    """One constant layer, vectorised over energies, with pole-safe limits.

    For the left-to-right sweep the layer map is the right-to-left one with
    d -> -d (same solution, opposite traversal).
    """
    out = np.empty_like(L)
    dd = -d if left_to_right else d
    diff = E - U

    prop = diff > 0
    if prop.any():
        k = np.sqrt(diff[prop] * inv)
        Lp = L[prop]
        s, c = np.sin(k * dd), np.cos(k * dd)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = k * (k * s + Lp * c)
            den = k * c - Lp * s
            r = num / den
            inf_in = np.isinf(Lp)
            r = np.where(inf_in & (s != 0.0), -k * c / s, r)
            r = np.where(inf_in & (s == 0.0), Lp, r)
            zero_den = (den == 0.0) & ~inf_in
            r = np.where(zero_den, np.copysign(np.inf, num), r)
        out[prop] = r

    flat = diff == 0.0
    if flat.any():
        Lf = L[flat]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = Lf / (1.0 - Lf * dd)
            r = np.where(np.isinf(Lf), -1.0 / dd, r)
            r = np.where((1.0 - Lf * dd == 0.0) & ~np.isinf(Lf), np.copysign(np.inf, Lf), r)
        out[flat] = r

    evan = diff < 0
    if evan.any():
        kap = np.sqrt(-diff[evan] * inv)
        Le = L[evan]
        t = np.tanh(kap * dd)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = kap * (Le - kap * t)
            den = kap - Le * t
            r = num / den
            inf_in = np.isinf(Le)
            r = np.where(inf_in & (t != 0.0), -kap / t, r)
            r = np.where(inf_in & (t == 0.0), Le, r)
            # exact fixed points of the medium
            r = np.where(Le == -kap, -kap, r)
            r = np.where(Le == kap, kap, r)
            zero_den = (den == 0.0) & ~inf_in & (Le != kap) & (Le != -kap)
            r = np.where(zero_den, np.copysign(np.inf, num), r)
        out[evan] = r
    return out


def residual_grid(profile: PotentialProfile, E: np.ndarray, m: Material,
                  left_to_right: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """D(E) over an energy grid plus a validity mask (False at exact poles)."""
    _require_constant(profile)
    E = np.asarray(E, float)
    lo, hi = profile.bound_window()
    if np.any(E <= lo) or np.any(E >= hi):
        raise ValueError(f"energies must lie inside the bound window ({lo}, {hi})")
    inv = m.inv_length_sq_per_ev
    L = _sweep_logderiv(profile, E, m, left_to_right=left_to_right)
    if left_to_right:
        kap_far = np.sqrt((profile.right_exterior - E) * inv)
        mismatch = -L - kap_far
    else:
        kap_far = np.sqrt((profile.left_exterior - E) * inv)
        mismatch = L - kap_far
    with np.errstate(invalid="ignore"):
        D = mismatch / (np.abs(L) + kap_far)
    valid = np.isfinite(L)
    D = np.where(valid, D, np.sign(np.where(np.isinf(L), L, 1.0)))
    return D, valid


def matching_residual(profile: PotentialProfile, E: float, m: Material) -> MatchingResidual:
    """Normalized bound-state mismatch at a single energy inside the bound window."""
    D, valid = residual_grid(profile, np.array([E], float), m)
    return MatchingResidual(energy=float(E), value=float(D[0]), valid=bool(valid[0]))


# ---------------------------------------------------------------------------
# Parity sector residuals for mirror-symmetric profiles.
#
# Propagating the (psi, psi') pair from the right exterior to the symmetry
# point and normalising jointly gives pole-free residuals
#     f_even ~ psi'(x_sym)   (zero when the even matching condition holds)
#     f_odd  ~ psi(x_sym)
# so every sign change is a genuine root.  This is what resolves pair
# splittings far below any practical scan-grid spacing.
# ---------------------------------------------------------------------------

def _pair_step(p: np.ndarray, q: np.ndarray, E: np.ndarray, U: float, d: float,
               inv: float) -> tuple[np.ndarray, np.ndarray]:
    """Right-to-left (psi, psi') update across one constant layer, scaled so the
    evanescent branch never overflows (the cosh/sinh pair is divided by e^(kappa d))."""
    diff = E - U
    pn = np.empty_like(p)
    qn = np.empty_like(q)

    prop = diff > 0
    if prop.any():
        k = np.sqrt(diff[prop] * inv)
        s, c = np.sin(k * d), np.cos(k * d)
        pn[prop] = p[prop] * c - q[prop] * s / k
        qn[prop] = p[prop] * k * s + q[prop] * c

    flat = diff == 0.0
    if flat.any():
        pn[flat] = p[flat] - q[flat] * d
        qn[flat] = q[flat]

    evan = diff < 0
    if evan.any():
        kap = np.sqrt(-diff[evan] * inv)
        e2 = np.exp(-2.0 * kap * d)
        ch, sh = 0.5 * (1.0 + e2), 0.5 * (1.0 - e2)
        pe, qe = p[evan], q[evan]
        pn_e = pe * ch - qe * sh / kap
        qn_e = -pe * kap * sh + qe * ch
        # e^(-2 kappa d) underflow makes the map rank one; a load exactly on
        # the growing direction then lands on (0, 0) -- keep that direction.
        dead = (pn_e == 0.0) & (qn_e == 0.0)
        if dead.any():
            pn_e = np.where(dead, 1.0, pn_e)
            qn_e = np.where(dead, kap, qn_e)
        pn[evan] = pn_e
        qn[evan] = qn_e
    return pn, qn


def _half_profile_layers(profile: PotentialProfile) -> tuple[tuple[float, float], ...]:
    """(level, width) of the layers strictly right of the symmetry point,
    ordered right to left, splitting the straddling segment if needed."""
    xs = profile.symmetry_point
    layers: list[tuple[float, float]] = []
    for seg in reversed(profile.segments):
        if not isinstance(seg, ConstantSegment):
            raise ValueError("parity sweep needs constant segments; discretize() first")
        if seg.end <= xs + 1e-12:
            break
        lo = max(seg.start, xs)
        if seg.end - lo > 0:
            layers.append((seg.level, seg.end - lo))
    return tuple(layers)


def parity_residual_grid(profile: PotentialProfile, E: np.ndarray, m: Material,
                         parity: str) -> np.ndarray:
    """Even/odd matching residual at the symmetry point over an energy grid.

    parity 'even' enforces psi'(x_sym) = 0, 'odd' enforces psi(x_sym) = 0.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if not profile.is_symmetric():
        raise ValueError("parity residual requires a mirror-symmetric profile")
    E = np.asarray(E, float)
    lo, hi = profile.bound_window()
    if np.any(E <= lo) or np.any(E >= hi):
        raise ValueError(f"energies must lie inside the bound window ({lo}, {hi})")
    inv = m.inv_length_sq_per_ev
    scale = math.sqrt((hi - lo) * inv)  # 1/nm, fixed over the window

    kap_R = np.sqrt((profile.right_exterior - E) * inv)
    p = np.ones_like(E)
    q = -kap_R
    for level, width in _half_profile_layers(profile):
        p, q = _pair_step(p, q, E, level, width, inv)
        norm = np.abs(p) + np.abs(q) / scale
        p, q = p / norm, q / norm
    denom = np.abs(q) + scale * np.abs(p)
    if parity == "even":
        return q / denom
    return scale * p / denom
