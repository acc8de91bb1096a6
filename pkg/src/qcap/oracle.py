"""Independent Numerov shooting solver; the ground truth the impedance engine
is cross-checked against.

Integrates psi'' = f psi with the fourth-order three-point scheme on a uniform
grid over the true, continuous potential (parabolic pieces are NOT staircased
here, which is what makes the check independent of the discretize-then-sweep
path).  Both exteriors shoot toward an interior matching point; eigenvalues
are sign changes of the jointly-normalised Wronskian mismatch, refined by
bisection, with node counts recorded per state.

Exterior levels at or above model.HARD_WALL_LEVEL (the infinite-wall sentinel)
are treated as Dirichlet walls: the grid stops at the segment edge and psi is
pinned to zero there, so the sentinel never enters the integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numba import njit

from .model import HARD_WALL_LEVEL, Material, PotentialProfile
from .spectrum import BoundSpectrum, weyl_estimate

_RESCALE = 1e100


@njit(cache=True)
def _shoot(f, h, m_idx, from_left, count_bound, seed0, seed1):
    """Numerov sweep from one boundary to one point beyond m_idx.

    (seed0, seed1) are psi at the outermost two grid points; for a constant
    exterior they carry the exact decaying exponential, so no padding is
    needed at all.  Returns psi at grid indices (m_idx-1, m_idx, m_idx+1)
    plus the number of sign flips among point pairs whose newer index lies on
    this shot's side of count_bound.  psi is rescaled when it grows past
    1e100; ratios and node counts are unaffected.
    """
    n = f.shape[0]
    h2 = h * h
    step = 1 if from_left else -1
    start = 0 if from_left else n - 1
    end = m_idx + step  # final index to reach
    y0 = 0.0            # psi at i - 2*step
    y1 = seed0          # psi at i - step
    y2 = seed1          # psi at i
    nodes = 0
    i = start + step
    while i != end:
        y_next = (2.0 * y2 * (1.0 + 5.0 * h2 * f[i] / 12.0)
                  - y1 * (1.0 - h2 * f[i - step] / 12.0)) / (1.0 - h2 * f[i + step] / 12.0)
        y0, y1, y2 = y1, y2, y_next
        i += step
        if abs(y2) > _RESCALE:
            y0 /= _RESCALE
            y1 /= _RESCALE
            y2 /= _RESCALE
        on_side = i >= count_bound if step < 0 else i <= count_bound
        if on_side and y1 != 0.0 and y2 != 0.0 and (y1 > 0.0) != (y2 > 0.0):
            nodes += 1
    if from_left:
        return y0, y1, y2, nodes   # indices m-1, m, m+1
    return y2, y1, y0, nodes       # sweep ends at m-1, so reverse


@dataclass(frozen=True)
class NumerovConfig:
    dx: float = 0.001                  # nm
    padding: Optional[float] = None    # nm; None = 40 decay lengths, capped at 150
    energy_tol: float = 1e-9           # eV
    grid_points: Optional[int] = None  # energy-scan density; None = sized from Weyl count
    e_max: Optional[float] = None      # only search below this energy (eV)
    richardson: bool = True            # two-grid (2dx, dx) eigenvalue extrapolation

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if not self.energy_tol > 0:
            raise ValueError("energy_tol must be positive")


class _Workspace:
    """Grid, sampled potential, boundary seeds and matching index for one profile.

    All-soft profiles use a half-cell grid offset: every potential jump then
    falls between grid points, each point carries a pure one-sided value, and
    the half-cell pair around the symmetry point turns the parity conditions
    into exact reflection statements.  A sentinel wall (>= HARD_WALL_LEVEL)
    needs its Dirichlet point on the edge, so those profiles stay on-grid and
    any interior jump cell takes the mean of the one-sided limits.

    Soft exteriors carry two extra grid cells; the outermost psi pair seeds
    the decaying characteristic root of the recursion in that exterior, so no
    padding is needed and there is no domain-truncation error at all.
    """

    def __init__(self, profile: PotentialProfile, m: Material, cfg: NumerovConfig,
                 parity_mode: bool):
        self.inv = m.inv_length_sq_per_ev
        lo, hi = profile.bound_window()
        self.scale = math.sqrt((hi - lo) * self.inv)
        h = cfg.dx
        extra = int(round(cfg.padding / h)) if cfg.padding is not None else 0
        extra = max(extra, 0)

        self.left_exterior = profile.left_exterior
        self.right_exterior = profile.right_exterior
        self.hard_left = profile.left_exterior >= HARD_WALL_LEVEL
        self.hard_right = profile.right_exterior >= HARD_WALL_LEVEL
        self.parity = parity_mode
        self.midcell = not (self.hard_left or self.hard_right)
        cells_r = 0 if self.hard_right else 2 + extra
        if parity_mode:
            xs = profile.symmetry_point
            if self.midcell:
                x0 = xs - 0.5 * h
                n = int(round((profile.x_right - xs) / h)) + cells_r + 1
            else:
                x0 = xs - h  # one reflection cell past the symmetry point
                n = int(round((profile.x_right - xs) / h)) + cells_r + 2
            self.m_idx = 1
        else:
            cells_l = 0 if self.hard_left else 2 + extra
            x0 = profile.x_left - cells_l * h + (0.5 * h if self.midcell else 0.0)
            n = int(round((profile.x_right - profile.x_left) / h)) + cells_l + cells_r + 1
            if self.midcell:
                n -= 1  # half-cell shift on both ends drops one point
            self.m_idx = 0  # set from the potential minimum below
        self.h = h
        self.x = x0 + h * np.arange(n)
        self.u = np.asarray(profile.potential(self.x), float)
        if parity_mode:
            self.u[0] = self.u[1] if self.midcell else self.u[2]  # mirror cell
        self._average_jump_cells(profile)
        if not parity_mode:
            self.m_idx = int(min(max(np.argmin(self.u), 2), n - 3))

    def _seeds(self, E: float, left: bool) -> tuple[float, float]:
        """psi at the two outermost points: the decaying characteristic root of
        the Numerov recursion itself in the constant exterior (not the
        continuum exp(-kappa h), which is inconsistent with the discrete
        equations at O(h^2) across the edge jump), or a Dirichlet wall (0, 1)."""
        if left:
            if self.hard_left:
                return 0.0, 1.0
            level = self.left_exterior
        else:
            if self.hard_right:
                return 0.0, 1.0
            level = self.right_exterior
        w = max(level - E, 0.0) * self.inv * self.h * self.h
        b = 2.0 * (1.0 + 5.0 * w / 12.0) / (1.0 - w / 12.0)
        lam = 2.0 / (b + math.sqrt(b * b - 4.0))  # subtraction-free decaying root
        return lam, 1.0

    def _average_jump_cells(self, profile: PotentialProfile) -> None:
        """Grid points landing exactly on a potential jump take the mean of the
        one-sided limits, restoring the scheme's interior accuracy there."""
        segs = profile.segments
        bounds = profile.segment_boundaries()
        for j, b in enumerate(bounds):
            ll = profile.left_exterior if j == 0 else float(segs[j - 1].value(b))
            lr = profile.right_exterior if j == len(segs) else float(segs[j].value(b))
            if ll == lr or max(ll, lr) >= HARD_WALL_LEVEL:
                continue
            i = int(round((b - self.x[0]) / self.h))
            if 0 < i < len(self.x) - 1 and abs(self.x[i] - b) < 1e-6 * self.h + 1e-12:
                self.u[i] = 0.5 * (ll + lr)

    def full_mismatch(self, E: float) -> tuple[float, int]:
        f = (self.u - E) * self.inv
        sl = self._seeds(E, True)
        sr = self._seeds(E, False)
        lm1, l0, lp1, nodes_l = _shoot(f, self.h, self.m_idx, True, self.m_idx, *sl)
        rm1, r0, rp1, nodes_r = _shoot(f, self.h, self.m_idx, False, self.m_idx, *sr)
        dl = (lp1 - lm1) / (2 * self.h)
        dr = (rp1 - rm1) / (2 * self.h)
        w = dl * r0 - dr * l0
        denom = (abs(dl * r0) + abs(dr * l0) + self.scale * abs(l0 * r0)
                 + abs(dl * dr) / self.scale)
        return (w / denom if denom > 0 else 0.0), nodes_l + nodes_r

    def parity_mismatch(self, E: float) -> tuple[float, float, int]:
        """(even residual, odd residual, half-side nodes).

        Mid-cell grids read the parity conditions as exact reflection
        statements on the pair straddling the symmetry point; on-grid
        (hard-wall) layouts use psi'(xs) / psi(xs) via a central difference.
        Nodes are counted strictly right of the centre cell; the forced centre
        node of odd states is added by the caller, not here.
        """
        f = (self.u - E) * self.inv
        sr = self._seeds(E, False)
        if self.midcell:
            y0, y1, _, nodes = _shoot(f, self.h, 1, False, 1, *sr)
            denom = abs(y0) + abs(y1)
            if denom == 0.0:
                return 0.0, 0.0, nodes
            return (y0 - y1) / denom, (y0 + y1) / denom, nodes
        tm1, t0, tp1, nodes = _shoot(f, self.h, self.m_idx, False, self.m_idx + 1, *sr)
        d = (tp1 - tm1) / (2 * self.h)
        denom = abs(d) + self.scale * abs(t0)
        if denom == 0.0:
            return 0.0, 0.0, nodes
        return d / denom, self.scale * t0 / denom, nodes


def _scan_bisect(fn, lo: float, hi: float, n_grid: int, tol: float) -> list[float]:
    grid = np.linspace(lo, hi, n_grid)
    vals = np.array([fn(e) for e in grid])
    roots = []
    for i in np.flatnonzero(vals[:-1] * vals[1:] < 0):
        a, b, fa = grid[i], grid[i + 1], vals[i]
        while b - a > tol:
            mid = 0.5 * (a + b)
            fm = fn(mid)
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b = mid
        roots.append(0.5 * (a + b))
    return roots


def numerov_bound_states(profile: PotentialProfile, m: Material,
                         cfg: NumerovConfig | None = None) -> BoundSpectrum:
    """Full bound spectrum by Numerov shooting; node count of state k is k-1.

    Symmetric profiles are solved per parity at the symmetry point (Neumann /
    Dirichlet), the same technique the impedance engine uses, so exponentially
    degenerate double-well pairs resolve on both sides of the cross-check.
    """
    cfg = cfg or NumerovConfig()
    lo, hi = profile.bound_window()
    if cfg.e_max is not None:
        hi = min(hi, cfg.e_max)
    margin = max(1e-9 * (hi - lo), 1e-12)
    n_weyl = weyl_estimate(profile, m, e_top=hi)
    base_grid = cfg.grid_points or max(300, int(40 * min(n_weyl, 200.0)))
    parity_mode = profile.is_symmetric()

    def collect(ws: _Workspace, n_grid: int) -> list[tuple[float, int, float]]:
        found: list[tuple[float, int, float]] = []  # (energy, nodes, residual)
        if parity_mode:
            # Node labels come from the within-sector rank (even: 0,2,4...,
            # odd: 1,3,5...).  Counting sign flips is unreliable exactly for
            # near-degenerate pairs: the centre node wanders out of the centre
            # cell within the bisection tolerance.  A missed sector root still
            # breaks the merged 0..K-1 interleaving check below.
            for sel, parity in ((0, "even"), (1, "odd")):
                fn = lambda e, s=sel: ws.parity_mismatch(e)[s]
                roots = _scan_bisect(fn, lo + margin, hi - margin, n_grid, cfg.energy_tol)
                for k, r in enumerate(sorted(roots)):
                    ev, od, _ = ws.parity_mismatch(r)
                    nodes = 2 * k + (1 if parity == "odd" else 0)
                    found.append((r, nodes, abs(ev) if parity == "even" else abs(od)))
        else:
            fn = lambda e: ws.full_mismatch(e)[0]
            for r in _scan_bisect(fn, lo + margin, hi - margin, n_grid, cfg.energy_tol):
                w, nodes = ws.full_mismatch(r)
                found.append((r, nodes, abs(w)))
        found.sort()
        return found

    ws = _Workspace(profile, m, cfg, parity_mode)
    found = collect(ws, base_grid)
    if [n for _, n, _ in found] != list(range(len(found))):
        found = collect(ws, 4 * base_grid)
    node_seq = [n for _, n, _ in found]
    if node_seq != list(range(len(found))):
        raise RuntimeError(
            f"node-count sequence {node_seq} is not 0..{len(found) - 1}: "
            "reduce dx or densify the energy scan"
        )
    energies = [e for e, _, _ in found]

    if cfg.richardson:
        # Potential jumps cost the scheme two orders; the (dx, dx/2) pair
        # restores them, and on smooth profiles it only shrinks the h^4 term.
        # dx/2 (not 2 dx) keeps lattice-aligned jumps aligned on both grids.
        ws2 = _Workspace(profile, m, replace(cfg, dx=0.5 * cfg.dx), parity_mode)
        finer = collect(ws2, base_grid)
        by_nodes = {n: e for e, n, _ in finer}
        energies = [
            (4.0 * by_nodes[n] - e) / 3.0 if n in by_nodes else e
            for e, (_, n, _) in zip(energies, found)
        ]

    # extrapolation noise can swap truly degenerate pair members
    order = sorted(range(len(found)), key=lambda i: (energies[i], found[i][1]))
    return BoundSpectrum(
        energies=tuple(energies[i] for i in order),
        residuals=tuple(found[i][2] for i in order),
        method="Numerov",
        node_counts=tuple(found[i][1] for i in order),
    )
