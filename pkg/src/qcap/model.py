"""Physical constants, unit conventions and the piecewise potential-profile data model.

Units throughout the package: energies in eV, lengths in nm, masses as
ratios of the bare electron mass m0.  The single conversion constant is
hbar^2/(2 m0) expressed in eV nm^2; everything else follows from it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

# CODATA 2018 values, SI
HBAR = 1.054571817e-34      # J s
M0 = 9.1093837015e-31       # kg
E_CHARGE = 1.602176634e-19  # C

# hbar^2 / (2 m0) in eV nm^2 (= 0.0380998...)
HBAR2_OVER_2M0 = HBAR**2 / (2.0 * M0 * E_CHARGE) * 1e18

# e^2 m0 / (pi hbar^2) in F/m^2: the quantum-capacitance step per occupied
# subband for m*/m0 = 1 (= 0.66928...)
CQ_UNIT = E_CHARGE**2 * M0 / (math.pi * HBAR**2)

# m0 e / (pi hbar^2): 2D density of states per subband for m*/m0 = 1,
# in 1/(eV m^2)
DOS2D_UNIT = M0 * E_CHARGE / (math.pi * HBAR**2)

# Finite sentinel standing in for an infinite wall, in eV.  The analytic
# infinite-well path never evaluates it; the generic engines accept it.
INFINITE_WALL = 1.0e6

# Exterior levels at or above this are treated as hard (Dirichlet) walls
# by solvers that need a grid, e.g. the Numerov oracle.
HARD_WALL_LEVEL = 0.5 * INFINITE_WALL


@dataclass(frozen=True)
class PhysConstants:
    """Bundle of the derived constants, for callers that want them together."""

    hbar2_over_2m0: float = HBAR2_OVER_2M0
    cq_unit: float = CQ_UNIT


@dataclass(frozen=True)
class Material:
    """Carrier effective mass in units of the bare electron mass."""

    effective_mass_ratio: float

    def __post_init__(self):
        if not self.effective_mass_ratio > 0:
            raise ValueError(
                f"effective_mass_ratio must be positive, got {self.effective_mass_ratio}"
            )

    @property
    def inv_length_sq_per_ev(self) -> float:
        """2 m* / hbar^2 in 1/(eV nm^2): converts (E - U) to a squared wavenumber."""
        return self.effective_mass_ratio / HBAR2_OVER_2M0


@dataclass(frozen=True)
class ConstantSegment:
    """Flat piece of potential at `level` eV on [start, end) nm."""

    level: float
    start: float
    end: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"segment needs start < end, got [{self.start}, {self.end}]")

    @property
    def width(self) -> float:
        return self.end - self.start

    def value(self, x):
        return self.level if np.isscalar(x) else np.full_like(np.asarray(x, float), self.level)

    def min_level(self) -> float:
        return self.level


@dataclass(frozen=True)
class ParabolaSegment:
    """Parabolic piece a (x - center)^2, a in eV/nm^2, on [start, end) nm."""

    a: float
    center: float
    start: float
    end: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"segment needs start < end, got [{self.start}, {self.end}]")
        if not self.a > 0:
            raise ValueError(f"parabola coefficient must be positive, got {self.a}")

    @property
    def width(self) -> float:
        return self.end - self.start

    def value(self, x):
        x = np.asarray(x, float) if not np.isscalar(x) else x
        return self.a * (x - self.center) ** 2

    def min_level(self) -> float:
        # minimum over [start, end]
        if self.start <= self.center <= self.end:
            return 0.0
        return min(self.value(self.start), self.value(self.end))


Segment = Union[ConstantSegment, ParabolaSegment]

#: absolute slack allowed when gluing segment edges (nm)
_CONTIGUITY_TOL = 1e-9


def _merge_constant_runs(segments: Sequence[Segment]) -> tuple[Segment, ...]:
    """Drop zero-width pieces and merge adjacent constants at equal level."""
    merged: list[Segment] = []
    for seg in segments:
        if seg.width <= 0:
            continue
        if (
            merged
            and isinstance(seg, ConstantSegment)
            and isinstance(merged[-1], ConstantSegment)
            and merged[-1].level == seg.level
        ):
            prev = merged.pop()
            seg = ConstantSegment(level=seg.level, start=prev.start, end=seg.end)
        merged.append(seg)
    return tuple(merged)


@dataclass(frozen=True)
class PotentialProfile:
    """1D potential: ordered contiguous segments plus two semi-infinite exterior levels.

    The profile minimum must lie strictly below both exteriors, otherwise no
    bound state can exist and the solvers have nothing to do.
    """

    left_exterior: float
    segments: tuple[Segment, ...]
    right_exterior: float

    def __post_init__(self):
        if not self.segments:
            raise ValueError("profile needs at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.end - b.start) > _CONTIGUITY_TOL:
                raise ValueError(
                    f"segments not contiguous: [{a.start},{a.end}] then [{b.start},{b.end}]"
                )
        if not self.min_potential() < min(self.left_exterior, self.right_exterior):
            raise ValueError(
                "profile minimum must lie below both exterior levels "
                "(otherwise there are no bound states)"
            )

    @property
    def x_left(self) -> float:
        return self.segments[0].start

    @property
    def x_right(self) -> float:
        return self.segments[-1].end

    def min_potential(self) -> float:
        return min(seg.min_level() for seg in self.segments)

    def bound_window(self) -> tuple[float, float]:
        """Open energy interval that can hold bound states."""
        return self.min_potential(), min(self.left_exterior, self.right_exterior)

    def potential(self, x):
        """Evaluate U(x) for scalar or array x, exteriors included."""
        if np.isscalar(x):
            if x < self.x_left:
                return self.left_exterior
            if x >= self.x_right:
                return self.right_exterior
            for seg in self.segments:
                if seg.start <= x < seg.end:
                    return float(seg.value(x))
            return self.right_exterior  # unreachable, floats willing
        x = np.asarray(x, float)
        out = np.empty_like(x)
        out[x < self.x_left] = self.left_exterior
        out[x >= self.x_right] = self.right_exterior
        edges = np.array([s.start for s in self.segments] + [self.x_right])
        idx = np.searchsorted(edges, x, side="right") - 1
        for i, seg in enumerate(self.segments):
            m = (idx == i) & (x >= self.x_left) & (x < self.x_right)
            if m.any():
                out[m] = seg.value(x[m])
        return out

    def is_symmetric(self, tol: float = 1e-9) -> bool:
        """True if the profile is mirror-symmetric about its midpoint."""
        if abs(self.left_exterior - self.right_exterior) > tol:
            return False
        mid = 0.5 * (self.x_left + self.x_right)
        rev = list(reversed(self.segments))
        for a, b in zip(self.segments, rev):
            if abs(a.width - b.width) > tol:
                return False
            if isinstance(a, ConstantSegment) != isinstance(b, ConstantSegment):
                return False
            if isinstance(a, ConstantSegment):
                if abs(a.level - b.level) > tol:
                    return False
            else:
                if abs(a.a - b.a) > tol:
                    return False
                # centers must mirror about the midpoint
                if abs((a.center - mid) + (b.center - mid)) > tol:
                    return False
            if abs((a.start - mid) + (b.end - mid)) > tol:
                return False
        return True

    @property
    def symmetry_point(self) -> float:
        return 0.5 * (self.x_left + self.x_right)

    def segment_boundaries(self) -> np.ndarray:
        return np.array([self.segments[0].start] + [s.end for s in self.segments])


def make_infinite_well(a: float) -> PotentialProfile:
    """Rectangular well of width `a` nm with (sentinel) infinite walls."""
    if not a > 0:
        raise ValueError(f"well width must be positive, got {a}")
    return PotentialProfile(
        left_exterior=INFINITE_WALL,
        segments=(ConstantSegment(level=0.0, start=0.0, end=a),),
        right_exterior=INFINITE_WALL,
    )


def make_finite_well(a: float, depth: float) -> PotentialProfile:
    """Well of width `a` nm and depth `depth` eV; exteriors at 0, bottom at -depth."""
    if not a > 0:
        raise ValueError(f"well width must be positive, got {a}")
    if not depth > 0:
        raise ValueError(f"well depth must be positive, got {depth}")
    return PotentialProfile(
        left_exterior=0.0,
        segments=(ConstantSegment(level=-depth, start=0.0, end=a),),
        right_exterior=0.0,
    )


def make_double_rect_well(b: float, gap: float, depth: float) -> PotentialProfile:
    """Symmetric pair of rectangular wells (width `b`, depth `depth`) split by `gap` nm.

    gap = 0 collapses to a single well of width 2b (the zero-width barrier is
    dropped and the equal-level wells merge).
    """
    if not b > 0:
        raise ValueError(f"well width must be positive, got {b}")
    if gap < 0:
        raise ValueError(f"gap must be non-negative, got {gap}")
    if not depth > 0:
        raise ValueError(f"well depth must be positive, got {depth}")
    segs: list[Segment] = [ConstantSegment(level=-depth, start=0.0, end=b)]
    if gap > 0:
        segs.append(ConstantSegment(level=0.0, start=b, end=b + gap))
    segs.append(ConstantSegment(level=-depth, start=b + gap, end=2 * b + gap))
    return PotentialProfile(
        left_exterior=0.0,
        segments=_merge_constant_runs(segs),
        right_exterior=0.0,
    )


def make_parabolic_double_well(a: float, x0: float) -> PotentialProfile:
    """Two parabolic wells a (x -+ x0)^2 meeting at x = 0, exteriors at a x0^2.

    U is even, continuous, zero at the two minima +-x0, equal to the exterior
    level a x0^2 both at the central hump x = 0 and for |x| >= 2 x0.
    """
    if not a > 0:
        raise ValueError(f"parabola coefficient must be positive, got {a}")
    if not x0 > 0:
        raise ValueError(f"well offset must be positive, got {x0}")
    return PotentialProfile(
        left_exterior=a * x0**2,
        segments=(
            ParabolaSegment(a=a, center=-x0, start=-2 * x0, end=0.0),
            ParabolaSegment(a=a, center=+x0, start=0.0, end=2 * x0),
        ),
        right_exterior=a * x0**2,
    )


#: uniform-to-cosine blend of the staircase sub-interval widths; 0 is uniform
_MESH_BLEND = 0.5


def discretize(profile: PotentialProfile, n_layers: int) -> PotentialProfile:
    """Staircase approximation: each non-constant segment becomes `n_layers`
    constant sub-layers at the midpoint value.  Constant segments pass through
    unchanged; total width is preserved exactly.

    Sub-interval widths shrink toward the segment ends (a half-cosine blend):
    for the parabolic pieces the staircase error concentrates where the slope
    is largest, and the graded mesh roughly halves the worst eigenvalue error
    of the rim states at fixed layer count.
    """
    if n_layers < 1:
        raise ValueError(f"n_layers must be >= 1, got {n_layers}")
    t = np.linspace(0.0, 1.0, n_layers + 1)
    frac = (1.0 - _MESH_BLEND) * t + _MESH_BLEND * 0.5 * (1.0 - np.cos(np.pi * t))
    segs: list[Segment] = []
    for seg in profile.segments:
        if isinstance(seg, ConstantSegment):
            segs.append(seg)
            continue
        edges = seg.start + (seg.end - seg.start) * frac
        mids = 0.5 * (edges[:-1] + edges[1:])
        for lo, hi, xm in zip(edges[:-1], edges[1:], mids):
            segs.append(ConstantSegment(level=float(seg.value(xm)), start=float(lo), end=float(hi)))
    return PotentialProfile(
        left_exterior=profile.left_exterior,
        segments=tuple(segs),
        right_exterior=profile.right_exterior,
    )


# ---------------------------------------------------------------------------
# JSON profile description
#
# {"material": {"m_star": 0.1},
#  "profile": {"left": 0.0, "right": 0.0,
#              "segments": [{"kind": "constant", "level": -10.0, "start": 0.0, "end": 5.0},
#                           {"kind": "parabola", "a": 0.4, "center": 5.0,
#                            "start": 0.0, "end": 5.0}]}}
# ---------------------------------------------------------------------------

def _segment_from_dict(d: dict) -> Segment:
    kind = d.get("kind")
    if kind == "constant":
        return ConstantSegment(level=float(d["level"]), start=float(d["start"]), end=float(d["end"]))
    if kind == "parabola":
        return ParabolaSegment(
            a=float(d["a"]), center=float(d["center"]),
            start=float(d["start"]), end=float(d["end"]),
        )
    raise ValueError(f"unknown segment kind {kind!r} (expected 'constant' or 'parabola')")


def _segment_to_dict(seg: Segment) -> dict:
    if isinstance(seg, ConstantSegment):
        return {"kind": "constant", "level": seg.level, "start": seg.start, "end": seg.end}
    return {"kind": "parabola", "a": seg.a, "center": seg.center, "start": seg.start, "end": seg.end}


def profile_from_dict(doc: dict) -> tuple[Material, PotentialProfile]:
    try:
        mat = Material(effective_mass_ratio=float(doc["material"]["m_star"]))
        prof = doc["profile"]
        profile = PotentialProfile(
            left_exterior=float(prof["left"]),
            segments=tuple(_segment_from_dict(s) for s in prof["segments"]),
            right_exterior=float(prof["right"]),
        )
    except KeyError as exc:
        raise ValueError(f"profile document missing field {exc.args[0]!r}") from exc
    return mat, profile


def profile_to_dict(material: Material, profile: PotentialProfile) -> dict:
    return {
        "material": {"m_star": material.effective_mass_ratio},
        "profile": {
            "left": profile.left_exterior,
            "right": profile.right_exterior,
            "segments": [_segment_to_dict(s) for s in profile.segments],
        },
    }


def load_profile_json(path) -> tuple[Material, PotentialProfile]:
    with open(path, "r", encoding="utf-8") as fh:
        return profile_from_dict(json.load(fh))
