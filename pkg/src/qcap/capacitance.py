"""Zero-temperature 2DEG sheet density and quantum capacitance staircase.

Each bound level E_j carries a 2D subband with constant density of states
m*/(pi hbar^2), so

    n(mu)  = sum_j m*/(pi hbar^2) (mu - E_j) theta(mu - E_j)
    C_q    = e^2 dn/dmu = e^2 m*/(pi hbar^2) #{j : E_j <= mu}

with the convention theta(0) = 1 (a level exactly at mu counts as occupied,
making C_q right-continuous).  The staircase over density inverts n(mu) in
closed form: with j subbands filled, mu(n) = (n pi hbar^2 / m* + sum E_i) / j,
and subband j+1 opens at n_j+1 = m*/(pi hbar^2) sum_{i<=j} (E_j+1 - E_i).

Densities at the interface are in cm^-2 (the lg(n) axis of the plots);
capacitances in F/m^2, with 1 F/m^2 = 100 uF/cm^2.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .model import CQ_UNIT, DOS2D_UNIT, Material
from .spectrum import BoundSpectrum

F_PER_M2_TO_UF_PER_CM2 = 100.0
CM2_TO_M2 = 1.0e4  # 1/cm^2 -> 1/m^2


def concentration(mu: float, spectrum: BoundSpectrum, m: Material) -> float:
    """Sheet density n(mu) in 1/m^2 at T = 0."""
    dos = m.effective_mass_ratio * DOS2D_UNIT
    return dos * sum(mu - e for e in spectrum.energies if mu >= e)


def capacitance_at_mu(mu: float, spectrum: BoundSpectrum, m: Material) -> float:
    """C_q(mu) in F/m^2: one quantum unit e^2 m*/(pi hbar^2) per occupied subband."""
    occupied = sum(1 for e in spectrum.energies if e <= mu)
    return m.effective_mass_ratio * CQ_UNIT * occupied


@dataclass(frozen=True)
class CapacitanceCurve:
    """Exact staircase of C_q against sheet density.

    step_densities[j] is the density (1/cm^2) at which subband j+1 starts to
    fill (the first entry is 0: any positive density occupies subband 1);
    step_heights[j] is C_q after that step, in F/m^2.  Sub-tolerance split
    double-well pairs give two steps at nearly equal density; they are kept
    as distinct steps, never merged.
    """

    step_densities: tuple[float, ...]
    step_heights: tuple[float, ...]
    samples: tuple[tuple[float, float], ...]  # (lg10 n [cm^-2], C_q [F/m^2])
    occupied: tuple[int, ...]                 # occupied subbands per sample

    def __post_init__(self):
        if not self.step_densities or self.step_densities[0] != 0.0:
            raise ValueError("step_densities must start at 0")
        if any(b < a for a, b in zip(self.step_densities, self.step_densities[1:])):
            raise ValueError("step_densities must be non-decreasing")


def step_densities_m2(spectrum: BoundSpectrum, m: Material) -> np.ndarray:
    """Density (1/m^2) at which each subband begins to fill."""
    E = np.asarray(spectrum.energies)
    dos = m.effective_mass_ratio * DOS2D_UNIT
    prefix = np.concatenate(([0.0], np.cumsum(E)))
    j = np.arange(len(E))  # subband j+1 opens when mu = E[j]
    steps = dos * (j * E - prefix[:-1])
    steps[0] = 0.0
    # degenerate pair members open at the same density; rounding must not
    # order their steps backwards
    return np.maximum.accumulate(steps)


def mu_of_density(n_m2: float, spectrum: BoundSpectrum, m: Material) -> float:
    """Chemical potential at sheet density n (1/m^2), inverting n(mu) exactly."""
    E = np.asarray(spectrum.energies)
    dos = m.effective_mass_ratio * DOS2D_UNIT
    steps = step_densities_m2(spectrum, m)
    j = int(np.searchsorted(steps, n_m2, side="right"))  # occupied subbands
    j = max(j, 1)
    return (n_m2 / dos + float(np.sum(E[:j]))) / j


def capacitance_vs_density(spectrum: BoundSpectrum, m: Material,
                           n_grid: Sequence[float]) -> CapacitanceCurve:
    """Closed-form staircase sampled on a positive, sorted grid of n in 1/cm^2.

    Beyond the last step every bound subband is occupied and the curve is
    flat; densities there map to chemical potentials above the confinement
    window, which the model deliberately ignores.
    """
    n_grid = np.asarray(n_grid, float)
    if n_grid.size == 0 or np.any(n_grid <= 0) or np.any(np.diff(n_grid) < 0):
        raise ValueError("n_grid must be positive and sorted ascending")
    unit = m.effective_mass_ratio * CQ_UNIT
    steps_m2 = step_densities_m2(spectrum, m)
    occupied = np.searchsorted(steps_m2, n_grid * CM2_TO_M2, side="right")
    occupied = np.maximum(occupied, 1)
    cq = unit * occupied
    return CapacitanceCurve(
        step_densities=tuple(float(s) / CM2_TO_M2 for s in steps_m2),
        step_heights=tuple(unit * (j + 1) for j in range(len(steps_m2))),
        samples=tuple((float(math.log10(n)), float(c)) for n, c in zip(n_grid, cq)),
        occupied=tuple(int(j) for j in occupied),
    )


def default_density_grid(lg_min: float = 10.0, lg_max: float = 15.0,
                         points: int = 500) -> np.ndarray:
    """Default lg(n) in [10, 15] (cm^-2), 500 points, as on the staircase plots."""
    return 10.0 ** np.linspace(lg_min, lg_max, points)


def write_capacitance_csv(curve: CapacitanceCurve, out: TextIO) -> None:
    """CSV with a single header line; '.' decimal separator, no thousands
    separators, '\\n' line endings -- byte-stable for golden-file comparison."""
    out.write("lg_n_cm2,Cq_F_per_m2,Cq_uF_per_cm2,occupied_subbands\n")
    for (lg_n, cq), j in zip(curve.samples, curve.occupied):
        out.write(f"{lg_n!r},{cq!r},{cq * F_PER_M2_TO_UF_PER_CM2!r},{j}\n")


def capacitance_csv_bytes(curve: CapacitanceCurve) -> bytes:
    buf = io.StringIO()
    write_capacitance_csv(curve, buf)
    return buf.getvalue().encode("utf-8")
