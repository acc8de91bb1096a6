"""Bound-state enumeration: analytic shortcuts and the scan-and-bisect engine.

The generic engine samples a bounded residual on a uniform grid over the
bound window, brackets sign changes, refines each bracket by bisection and
keeps only brackets that converge onto an actual zero (a pole of the
log-derivative mismatch saturates near |D| ~ 1 and is discarded).  Mirror
symmetric profiles are always solved per parity sector at the symmetry
point, which resolves pair splittings far below the grid spacing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import impedance
from .model import (
    HBAR2_OVER_2M0,
    INFINITE_WALL,
    ConstantSegment,
    Material,
    PotentialProfile,
    discretize,
    make_finite_well,
)
from .specfun import parabolic_parity_determinant


@dataclass(frozen=True)
class ScanConfig:
    """Knobs of the generic root scan."""

    grid_points: int = 4000
    tol: float = 1e-9                  # eV, bisection interval width at stop
    max_bisections: int = 200
    parity_split: str = "auto"         # auto | always | never
    layers_per_segment: int = 400      # staircase resolution for parabolic pieces
    refine_factor: int = 4             # grid densification when roots look missed
    residual_accept: float = 0.05      # |D| above this at convergence = pole, not root

    def __post_init__(self):
        if self.grid_points < 100:
            raise ValueError("grid_points must be >= 100")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.parity_split not in ("auto", "always", "never"):
            raise ValueError(f"parity_split must be auto/always/never, got {self.parity_split!r}")


@dataclass(frozen=True)
class BoundSpectrum:
    """Sorted bound-state energies with solver metadata."""

    energies: tuple[float, ...]
    residuals: tuple[float, ...]
    method: str  # AnalyticInfinite | AnalyticFiniteWell | ImpedanceScan | ParabolicDeterminant | Numerov
    node_counts: Optional[tuple[int, ...]] = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        object.__setattr__(self, "residuals", tuple(float(r) for r in self.residuals))
        if self.node_counts is not None:
            object.__setattr__(self, "node_counts", tuple(int(n) for n in self.node_counts))
        if list(self.energies) != sorted(self.energies):
            raise ValueError("energies must be sorted ascending")
        if len(self.residuals) != len(self.energies):
            raise ValueError("one residual per energy required")

    def __len__(self) -> int:
        return len(self.energies)

    def to_json_dict(self) -> dict:
        doc = {
            "method": self.method,
            "energies_eV": list(self.energies),
            "residuals": list(self.residuals),
            "warnings": list(self.warnings),
        }
        if self.node_counts is not None:
            doc["node_counts"] = list(self.node_counts)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def infinite_well_levels(a: float, m: Material, count: int) -> BoundSpectrum:
    """E_j = (hbar^2 pi^2 / 2 m* a^2) j^2, measured from the well bottom."""
    if not a > 0:
        raise ValueError(f"well width must be positive, got {a}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    e1 = (HBAR2_OVER_2M0 / m.effective_mass_ratio) * math.pi**2 / a**2
    if e1 * count**2 >= INFINITE_WALL:
        raise ValueError("count so large the levels exceed the wall sentinel")
    energies = tuple(e1 * j * j for j in range(1, count + 1))
    return BoundSpectrum(
        energies=energies,
        residuals=(0.0,) * count,
        method="AnalyticInfinite",
        node_counts=tuple(range(count)),
    )


def finite_well_state_count(a: float, depth: float, m: Material) -> int:
    """1 + floor(sqrt(2 m* U_w) a / (pi hbar))."""
    lam = math.sqrt(depth * m.inv_length_sq_per_ev) * a / math.pi
    return 1 + int(math.floor(lam))


def finite_well_levels_closed_form(a: float, depth: float, m: Material) -> tuple[float, ...]:
    """Roots of the single-well transcendental matching, solved per parity.

    Even states: k tan(k a / 2) = kappa, odd states: k cot(k a / 2) = -kappa,
    with k = sqrt(2 m* (E + U_w)) / hbar inside and kappa = sqrt(-2 m* E) / hbar
    outside.  Combining both families gives tan(k a) = 2 k kappa / (k^2 - kappa^2);
    note the denominator is proportional to 2 E + U_w.  Each parity branch is
    monotone between its tangent poles, so brentq per branch is exact.
    """
    inv = m.inv_length_sq_per_ev
    kmax = math.sqrt(depth * inv)

    def even_fn(k):
        kap = math.sqrt(max(kmax**2 - k**2, 0.0))
        return k * math.sin(k * a / 2) - kap * math.cos(k * a / 2)

    def odd_fn(k):
        kap = math.sqrt(max(kmax**2 - k**2, 0.0))
        return k * math.cos(k * a / 2) + kap * math.sin(k * a / 2)

    roots: list[float] = []
    # even roots live in k a/2 in (n pi, n pi + pi/2], odd in (n pi + pi/2, (n+1) pi]
    n = 0
    while True:
        lo = 2 * n * math.pi / a + 1e-12
        hi = min((2 * n + 1) * math.pi / a, kmax)
        if lo >= hi:
            break
        if even_fn(lo) * even_fn(hi) <= 0:
            roots.append(brentq(even_fn, lo, hi, xtol=1e-14, rtol=8.9e-16))
        n += 1
    n = 0
    while True:
        lo = (2 * n + 1) * math.pi / a + 1e-12
        hi = min((2 * n + 2) * math.pi / a, kmax)
        if lo >= hi:
            break
        if odd_fn(lo) * odd_fn(hi) <= 0:
            roots.append(brentq(odd_fn, lo, hi, xtol=1e-14, rtol=8.9e-16))
        n += 1
    energies = sorted(k * k / inv - depth for k in roots)
    return tuple(energies)


# ---------------------------------------------------------------------------
# generic scan + bisect
# ---------------------------------------------------------------------------

def _window_grid(lo: float, hi: float, n: int) -> np.ndarray:
    span = hi - lo
    margin = max(span * 1e-9, 1e-12)
    return np.linspace(lo + margin, hi - margin, n)


def _bisect(fn: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray,
            flo: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi, flo = lo.copy(), hi.copy(), flo.copy()
    for _ in range(max_iter):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        same = np.sign(fmid) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fmid, flo)
        hi = np.where(same, hi, mid)
    root = 0.5 * (lo + hi)
    return root, np.abs(fn(root))


def _scan_roots(fn: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
                lo: float, hi: float, cfg: ScanConfig, n_grid: int,
                residual_accept: Optional[float] = None,
                ) -> tuple[list[float], list[float]]:
    """Bracket sign changes of fn on (lo, hi), bisect, drop pole brackets.

    fn maps an energy array to (values, valid); sign changes are only taken
    between two valid samples."""
    grid = _window_grid(lo, hi, n_grid)
    vals, valid = fn(grid)
    sign_change = (vals[:-1] * vals[1:] < 0) & valid[:-1] & valid[1:]
    idx = np.flatnonzero(sign_change)
    if idx.size == 0:
        return [], []
    roots, resid = _bisect(lambda E: fn(E)[0], grid[idx], grid[idx + 1], vals[idx],
                           cfg.tol, cfg.max_bisections)
    accept = cfg.residual_accept if residual_accept is None else residual_accept
    keep = resid < accept
    out_r, out_s = [], []
    for r, s in zip(roots[keep], resid[keep]):
        # adjacent brackets can close in on the same root near a tangency
        if out_r and abs(r - out_r[-1]) < 10 * cfg.tol:
            if s < out_s[-1]:
                out_r[-1], out_s[-1] = float(r), float(s)
            continue
        out_r.append(float(r))
        out_s.append(float(s))
    return out_r, out_s


def weyl_estimate(profile: PotentialProfile, m: Material,
                  e_top: Optional[float] = None) -> float:
    """Semiclassical count of states below e_top (default: the bound window top),
    (1/pi) int sqrt(2 m* (E_top - U(x)))/hbar dx."""
    lo, hi = profile.bound_window()
    if e_top is not None:
        hi = min(hi, e_top)
    inv = m.inv_length_sq_per_ev
    total = 0.0
    for seg in profile.segments:
        if isinstance(seg, ConstantSegment):
            total += math.sqrt(max(hi - seg.level, 0.0) * inv) * seg.width
        else:
            x = np.linspace(seg.start, seg.end, 2001)
            kap = np.sqrt(np.maximum(hi - seg.value(x), 0.0) * inv)
            total += float(np.trapezoid(kap, x))
    return total / math.pi


def _prepare_constant_profile(profile: PotentialProfile, cfg: ScanConfig) -> PotentialProfile:
    if all(isinstance(s, ConstantSegment) for s in profile.segments):
        return profile
    return discretize(profile, cfg.layers_per_segment)


def bound_states(profile: PotentialProfile, m: Material,
                 cfg: ScanConfig | None = None) -> BoundSpectrum:
    """All bound states of a piecewise profile via the impedance sweep.

    Parabolic segments are discretized to cfg.layers_per_segment staircase
    layers first.  Symmetric profiles are solved per parity sector unless
    cfg.parity_split == 'never'.
    """
    cfg = cfg or ScanConfig()
    work = _prepare_constant_profile(profile, cfg)
    lo, hi = work.bound_window()
    use_parity = cfg.parity_split != "never" and work.is_symmetric()

    def solve(n_grid: int) -> tuple[list[float], list[float]]:
        if use_parity:
            roots, resid = [], []
            for parity in ("even", "odd"):
                def fn(E, p=parity):
                    vals = impedance.parity_residual_grid(work, E, m, p)
                    return vals, np.isfinite(vals)
                r, s = _scan_roots(fn, lo, hi, cfg, n_grid, residual_accept=np.inf)
                roots.extend(r)
                resid.extend(s)
            order = np.argsort(roots)
            return [roots[i] for i in order], [resid[i] for i in order]
        return _scan_roots(lambda E: impedance.residual_grid(work, E, m),
                           lo, hi, cfg, n_grid)

    roots, resid = solve(cfg.grid_points)
    warnings: list[str] = []
    expected = weyl_estimate(work, m)
    if math.floor(expected) - len(roots) >= 2:
        roots, resid = solve(cfg.grid_points * cfg.refine_factor)
        if math.floor(expected) - len(roots) >= 2:
            warnings.append(
                f"possible missed roots: semiclassical estimate {expected:.1f}, found {len(roots)}"
            )
    return BoundSpectrum(
        energies=tuple(roots),
        residuals=tuple(resid),
        method="ImpedanceScan",
        warnings=tuple(warnings),
    )


def finite_well_levels(a: float, depth: float, m: Material,
                       cfg: ScanConfig | None = None) -> BoundSpectrum:
    """Bound states of the single finite well, scanned as a one-layer profile."""
    if not a > 0 or not depth > 0:
        raise ValueError("well width and depth must be positive")
    spec = bound_states(make_finite_well(a, depth), m, cfg)
    warnings = list(spec.warnings)
    expected = finite_well_state_count(a, depth, m)
    if len(spec) != expected:
        warnings.append(f"state count {len(spec)} differs from 1+floor rule {expected}")
    return BoundSpectrum(
        energies=spec.energies,
        residuals=spec.residuals,
        method="AnalyticFiniteWell",
        warnings=tuple(warnings),
    )


def parabolic_determinant_levels(a: float, x0: float, m: Material,
                                 cfg: ScanConfig | None = None) -> BoundSpectrum:
    """Bound states of the double parabolic well from the Kummer-basis
    matching determinant, solved per parity sector."""
    cfg = cfg or ScanConfig()
    lo, hi = 0.0, a * x0 * x0
    roots, resid = [], []
    for parity in ("even", "odd"):
        def fn(E, p=parity):
            E = np.atleast_1d(E)
            vals = np.array([parabolic_parity_determinant(float(e), a, x0, m, p) for e in E])
            return vals, np.isfinite(vals)
        r, s = _scan_roots(fn, lo, hi, cfg, cfg.grid_points, residual_accept=np.inf)
        roots.extend(r)
        resid.extend(s)
    order = np.argsort(roots)
    return BoundSpectrum(
        energies=tuple(roots[i] for i in order),
        residuals=tuple(resid[i] for i in order),
        method="ParabolicDeterminant",
    )
