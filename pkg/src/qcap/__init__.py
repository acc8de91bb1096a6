"""Quantum capacitance of a 2DEG from bound-state spectra of 1D wells."""

from .capacitance import (
    CapacitanceCurve,
    capacitance_at_mu,
    capacitance_vs_density,
    concentration,
    default_density_grid,
    write_capacitance_csv,
)
from .model import (
    CQ_UNIT,
    DOS2D_UNIT,
    HBAR2_OVER_2M0,
    INFINITE_WALL,
    ConstantSegment,
    Material,
    ParabolaSegment,
    PhysConstants,
    PotentialProfile,
    discretize,
    load_profile_json,
    make_double_rect_well,
    make_finite_well,
    make_infinite_well,
    make_parabolic_double_well,
)
from .oracle import NumerovConfig, numerov_bound_states
from .spectrum import (
    BoundSpectrum,
    ScanConfig,
    bound_states,
    finite_well_levels,
    finite_well_levels_closed_form,
    finite_well_state_count,
    infinite_well_levels,
    parabolic_determinant_levels,
    weyl_estimate,
)

__version__ = "0.1.0"
