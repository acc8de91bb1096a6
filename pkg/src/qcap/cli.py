"""qcap command line: bound-state spectra and quantum-capacitance staircases.

    qcap levels     --well finite --a 5 --depth 10 --mstar 0.1
    qcap cq         --figure 4 --out outdir/
    qcap crosscheck --well parabolic --x0 5 --layers 400

Profiles come either from the --well family of flags or from a JSON file
(--profile); the bundled figure presets 1..6 regenerate the staircase curves
for the four reference well geometries.  Every flag has a JSON-config
equivalent; QCAP_CONFIG names a default config file and explicit flags win.

Exit codes: 0 ok, 1 usage error, 2 solver warning under --strict (or a
crosscheck tolerance failure), 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from . import capacitance as cap
from . import oracle, spectrum
from .model import (
    Material,
    PotentialProfile,
    load_profile_json,
    make_double_rect_well,
    make_finite_well,
    make_infinite_well,
    make_parabolic_double_well,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


_CONFIG_KEYS = ("well", "a", "depth", "gap", "x0", "mstar", "count", "layers",
                "tol", "figure", "profile", "out", "format", "strict")


@dataclass(frozen=True)
class RunManifest:
    """One resolved CLI invocation."""

    command: str                      # levels | cq | crosscheck
    well: Optional[str] = None
    a: float = 5.0
    depth: float = 10.0
    gap: float = 2.0
    x0: float = 5.0
    mstar: float = 0.1
    count: int = 10
    layers: int = 400
    tol: Optional[float] = None
    figure: Optional[int] = None
    profile_path: Optional[str] = None
    out: Optional[str] = None
    format: str = "csv"
    strict: bool = False

    def material(self) -> Material:
        return Material(effective_mass_ratio=self.mstar)

    def scan_config(self) -> spectrum.ScanConfig:
        kw = {"layers_per_segment": self.layers}
        if self.tol is not None:
            kw["tol"] = self.tol
        return spectrum.ScanConfig(**kw)


@dataclass(frozen=True)
class CurveSpec:
    label: str
    well: str
    params: dict


@dataclass(frozen=True)
class FigurePreset:
    number: int
    curves: tuple[CurveSpec, ...]
    assumptions: tuple[str, ...] = ()


FIGURE_PRESETS: dict[int, FigurePreset] = {
    1: FigurePreset(1, (
        CurveSpec("infinite_a5", "infinite", {"a": 5.0}),
        CurveSpec("infinite_a10", "infinite", {"a": 10.0}),
    )),
    2: FigurePreset(2, (
        CurveSpec("finite_a5_U10", "finite", {"a": 5.0, "depth": 10.0}),
        CurveSpec("infinite_a5", "infinite", {"a": 5.0}),
    ), ("finite-well depth 10 eV assumed; the source description states only the width",)),
    3: FigurePreset(3, (
        CurveSpec("finite_a5_U10", "finite", {"a": 5.0, "depth": 10.0}),
        CurveSpec("finite_a2_U10", "finite", {"a": 2.0, "depth": 10.0}),
    ), ("finite-well depth 10 eV assumed; the source description states only the widths",)),
    4: FigurePreset(4, (
        CurveSpec("double_b5_g2", "double", {"a": 5.0, "gap": 2.0, "depth": 10.0}),
        CurveSpec("double_b5_g10", "double", {"a": 5.0, "gap": 10.0, "depth": 10.0}),
        CurveSpec("double_b10_g2", "double", {"a": 10.0, "gap": 2.0, "depth": 10.0}),
        CurveSpec("double_b10_g10", "double", {"a": 10.0, "gap": 10.0, "depth": 10.0}),
    )),
    5: FigurePreset(5, (
        CurveSpec("double_g2_b5", "double", {"a": 5.0, "gap": 2.0, "depth": 10.0}),
        CurveSpec("double_g2_b10", "double", {"a": 10.0, "gap": 2.0, "depth": 10.0}),
        CurveSpec("double_g10_b5", "double", {"a": 5.0, "gap": 10.0, "depth": 10.0}),
        CurveSpec("double_g10_b10", "double", {"a": 10.0, "gap": 10.0, "depth": 10.0}),
    ), ("well depth 10 eV assumed by continuity with preset 4",)),
    6: FigurePreset(6, (
        CurveSpec("parabolic_x10", "parabolic", {"x0": 10.0, "depth": 10.0}),
        CurveSpec("parabolic_x5", "parabolic", {"x0": 5.0, "depth": 10.0}),
        CurveSpec("parabolic_x2", "parabolic", {"x0": 2.0, "depth": 10.0}),
    )),
}


def build_profile(well: str, a: float, depth: float, gap: float, x0: float) -> PotentialProfile:
    if well == "infinite":
        return make_infinite_well(a)
    if well == "finite":
        return make_finite_well(a, depth)
    if well == "double":
        return make_double_rect_well(a, gap, depth)
    if well == "parabolic":
        return make_parabolic_double_well(depth / x0**2, x0)
    raise UsageError(f"unknown well kind {well!r}")


def _solve_levels(man: RunManifest, well: str, params: dict) -> spectrum.BoundSpectrum:
    m = man.material()
    cfg = man.scan_config()
    if well == "infinite":
        return spectrum.infinite_well_levels(params.get("a", man.a), m,
                                             params.get("count", man.count))
    if well == "finite":
        return spectrum.finite_well_levels(params.get("a", man.a),
                                           params.get("depth", man.depth), m, cfg)
    profile = build_profile(well, params.get("a", man.a), params.get("depth", man.depth),
                            params.get("gap", man.gap), params.get("x0", man.x0))
    return spectrum.bound_states(profile, m, cfg)


def _infinite_levels_covering(a: float, m: Material, n_max_cm2: float) -> spectrum.BoundSpectrum:
    """Enough levels that the staircase's last step lies beyond the plot grid."""
    count = 8
    while count < 4096:
        spec = spectrum.infinite_well_levels(a, m, count)
        steps = cap.step_densities_m2(spec, m)
        if steps[-1] > n_max_cm2 * cap.CM2_TO_M2:
            return spec
        count *= 2
    return spec


def _curve_for(man: RunManifest, curve: CurveSpec,
               n_grid: np.ndarray) -> tuple[cap.CapacitanceCurve, tuple[str, ...]]:
    m = man.material()
    if curve.well == "infinite":
        a = curve.params.get("a", man.a)
        spec = _infinite_levels_covering(a, m, float(n_grid[-1]))
    else:
        spec = _solve_levels(man, curve.well, curve.params)
    return cap.capacitance_vs_density(spec, m, n_grid), spec.warnings


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _open_out(path: Optional[str]):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_levels(spec: spectrum.BoundSpectrum, fmt: str, out: TextIO) -> None:
    if fmt == "json":
        out.write(json.dumps(spec.to_json_dict(), indent=2))
        out.write("\n")
        return
    out.write("index,energy_eV,residual\n")
    for i, (e, r) in enumerate(zip(spec.energies, spec.residuals), start=1):
        out.write(f"{i},{e!r},{r!r}\n")


def _write_curve(curve: cap.CapacitanceCurve, fmt: str, out: TextIO) -> None:
    if fmt == "json":
        doc = {
            "steps": {
                "densities_cm2": list(curve.step_densities),
                "heights_F_per_m2": list(curve.step_heights),
            },
            "samples": {
                "lg_n_cm2": [s[0] for s in curve.samples],
                "Cq_F_per_m2": [s[1] for s in curve.samples],
                "occupied_subbands": list(curve.occupied),
            },
        }
        out.write(json.dumps(doc, indent=2))
        out.write("\n")
        return
    cap.write_capacitance_csv(curve, out)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _resolve_profile(man: RunManifest) -> tuple[Material, PotentialProfile]:
    if man.profile_path is not None:
        try:
            return load_profile_json(man.profile_path)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise UsageError(f"invalid profile JSON: {exc}")
    well = man.well or "finite"
    return man.material(), build_profile(well, man.a, man.depth, man.gap, man.x0)


def cmd_levels(man: RunManifest) -> int:
    if man.profile_path is not None:
        m, profile = _resolve_profile(man)
        spec = spectrum.bound_states(profile, m, man.scan_config())
    else:
        spec = _solve_levels(man, man.well or "finite", {})
    out, close = _open_out(man.out)
    try:
        _write_levels(spec, man.format, out)
    finally:
        if close:
            out.close()
    if spec.warnings:
        for w in spec.warnings:
            print(f"warning: {w}", file=sys.stderr)
        if man.strict:
            return EXIT_SOLVER
    return EXIT_OK


def cmd_cq(man: RunManifest) -> int:
    n_grid = cap.default_density_grid()
    if man.figure is not None:
        preset = FIGURE_PRESETS.get(man.figure)
        if preset is None:
            raise UsageError(f"--figure must be 1..6, got {man.figure}")
        outdir = man.out or "."
        os.makedirs(outdir, exist_ok=True)
        for note in preset.assumptions:
            print(f"note: {note}", file=sys.stderr)
        status = EXIT_OK
        for curve_spec in preset.curves:
            curve, warnings = _curve_for(man, curve_spec, n_grid)
            path = os.path.join(outdir, f"figure{preset.number}_{curve_spec.label}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                cap.write_capacitance_csv(curve, fh)
            print(path)
            if warnings and man.strict:
                for w in warnings:
                    print(f"warning: {w}", file=sys.stderr)
                status = EXIT_SOLVER
        return status
    if man.profile_path is not None:
        m, profile = _resolve_profile(man)
        spec = spectrum.bound_states(profile, m, man.scan_config())
        curve = cap.capacitance_vs_density(spec, m, n_grid)
        warnings = spec.warnings
    else:
        well = man.well or "finite"
        curve, warnings = _curve_for(man, CurveSpec("cli", well, {}), n_grid)
    out, close = _open_out(man.out)
    try:
        _write_curve(curve, man.format, out)
    finally:
        if close:
            out.close()
    if warnings and man.strict:
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_crosscheck(man: RunManifest) -> int:
    m, profile = _resolve_profile(man)
    well = man.well or ("finite" if man.profile_path is None else "custom")
    cfg = man.scan_config()

    has_parabola = any(not hasattr(s, "level") for s in profile.segments)
    tol_cmp = man.tol if man.tol is not None else (1e-4 if has_parabola else 1e-6)

    if well == "infinite":
        engine = spectrum.infinite_well_levels(man.a, m, man.count)
        e_next = engine.energies[-1] * (man.count + 1) ** 2 / man.count**2
        ncfg = oracle.NumerovConfig(e_max=0.5 * (engine.energies[-1] + e_next))
    else:
        engine = spectrum.bound_states(profile, m, cfg)
        ncfg = oracle.NumerovConfig()
    ref = oracle.numerov_bound_states(profile, m, ncfg)

    print(f"engine: {engine.method} ({len(engine)} states)   "
          f"oracle: Numerov ({len(ref)} states)   tolerance {tol_cmp:g} eV")
    ok = len(engine) == len(ref)
    if not ok:
        print("state count mismatch")
    for j, (ee, eo) in enumerate(zip(engine.energies, ref.energies), start=1):
        delta = abs(ee - eo)
        flag = "" if delta <= tol_cmp else "  <-- exceeds tolerance"
        print(f"{j:3d}  engine {ee: .9f}  oracle {eo: .9f}  delta {delta:.3e}{flag}")
        ok = ok and delta <= tol_cmp
    return EXIT_OK if ok else EXIT_SOLVER


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="qcap", description=__doc__, add_help=True,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("levels", "cq", "crosscheck"):
        sp = sub.add_parser(name)
        sp.add_argument("--well", choices=["infinite", "finite", "double", "parabolic"])
        sp.add_argument("--a", type=float, help="well width, nm (each-well width for double)")
        sp.add_argument("--depth", type=float, help="well depth, eV")
        sp.add_argument("--gap", type=float, help="barrier width of the double well, nm")
        sp.add_argument("--x0", type=float, help="parabolic half-offset, nm")
        sp.add_argument("--mstar", type=float, help="effective mass ratio m*/m0")
        sp.add_argument("--count", type=int, help="number of levels (infinite well)")
        sp.add_argument("--layers", type=int, help="staircase layers per parabolic segment")
        sp.add_argument("--tol", type=float,
                        help="solver tolerance, eV (crosscheck: per-level delta tolerance)")
        sp.add_argument("--profile", dest="profile_path", help="profile JSON file")
        sp.add_argument("--out", help="output path (directory for --figure)")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--strict", action="store_true", default=None)
        if name == "cq":
            sp.add_argument("--figure", type=int, help="bundled preset 1..6")
    return p


def _load_env_config() -> dict:
    path = os.environ.get("QCAP_CONFIG")
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    unknown = set(doc) - set(_CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys in {path}: {sorted(unknown)}")
    return doc


def _manifest_from(args: argparse.Namespace, config: dict) -> RunManifest:
    def pick(flag_val, key, default):
        if flag_val is not None:
            return flag_val
        if key in config and config[key] is not None:
            return config[key]
        return default

    man = RunManifest(
        command=args.command,
        well=pick(args.well, "well", None),
        a=float(pick(args.a, "a", 5.0)),
        depth=float(pick(args.depth, "depth", 10.0)),
        gap=float(pick(args.gap, "gap", 2.0)),
        x0=float(pick(args.x0, "x0", 5.0)),
        mstar=float(pick(args.mstar, "mstar", 0.1)),
        count=int(pick(args.count, "count", 10)),
        layers=int(pick(args.layers, "layers", 400)),
        tol=pick(args.tol, "tol", None),
        figure=pick(getattr(args, "figure", None), "figure", None),
        profile_path=pick(args.profile_path, "profile", None),
        out=pick(args.out, "out", None),
        format=pick(args.format, "format", "csv" if args.command != "levels" else "json"),
        strict=bool(pick(args.strict, "strict", False)),
    )
    if man.profile_path is not None and man.well is not None:
        raise UsageError("--profile and --well are mutually exclusive profile sources")
    if man.figure is not None and (man.well is not None or man.profile_path is not None):
        raise UsageError("--figure is itself a profile source; drop --well/--profile")
    for nm, v in (("--a", man.a), ("--depth", man.depth), ("--x0", man.x0),
                  ("--mstar", man.mstar)):
        if not v > 0:
            raise UsageError(f"{nm} must be positive, got {v}")
    if man.gap < 0:
        raise UsageError(f"--gap must be non-negative, got {man.gap}")
    if man.count < 1:
        raise UsageError(f"--count must be >= 1, got {man.count}")
    if man.layers < 1:
        raise UsageError(f"--layers must be >= 1, got {man.layers}")
    return man


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        man = _manifest_from(args, _load_env_config())
        if man.command == "levels":
            return cmd_levels(man)
        if man.command == "cq":
            return cmd_cq(man)
        return cmd_crosscheck(man)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
