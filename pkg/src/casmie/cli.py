"""Batch front end: JSON job config in, CSV sweep results out.

The config is the experiment record: all science parameters live there,
never in flags.  Schema (strict, unknown keys rejected):

    {
      "materials": {"<name>": {"eps_poles": [{"plasma_strength": ..,
                                              "resonance": ..,
                                              "damping": ..}, ...],
                               "mu_poles": [...],
                               "eps_infinity": 1.0, "mu_infinity": 1.0}},
      "geometry":  {"layers": [{"radius": .., "material": "<name>"}, ...],
                    "exterior": "<name>"},
      "sweep":     {"axis": "radius_scale" | "temperature"
                            | "material_parameter",
                    "parameter_path": "<name>.eps_poles[0].damping",
                    "values": [..]            # or
                    "range": {"start": .., "stop": .., "count": ..,
                              "spacing": "log" | "linear"}},
      "numerics":  {"mode": "matsubara" | "zero_T" | "real_axis_diag",
                    "tol": 1e-4, "temperature": 0.1, "l_cap": 512,
                    "n_cap": 200000, "standoff": 0.0,
                    "omega_max": 400.0, "quad_limit": 400},
      "output":    {"path": "out.csv", "units": "reduced" | "SI",
                    "radius_m": 1e-6, "timing": false}
    }

Lengths are in units of a reference radius, frequencies in c over that
radius, temperature as k_B T R/(hbar c); reduced output is in hbar c/R^4
and SI output in pascal (requires radius_m).  Exit codes: 0 success,
2 config/schema error, 3 convergence failure (completed rows are still
flushed), 4 I/O error.
"""

from __future__ import annotations

import argparse
import concurrent.futures as futures
import json
import math
import os
import sys
import time
from dataclasses import dataclass

from .errors import CasmieError, ConfigError, ConvergenceError
from .materials import LorentzPole, MaterialModel, QuadratureSpec
from .mie import Layer, SphereGeometry
from .stress import (StressMode, StressResult, stress_finite_T,
                     stress_real_axis_diagnostic, stress_zero_T)

HBAR_C = 1.054571817e-34 * 2.99792458e8   # J m

_CSV_HEADER = "sweep_value,T_RR,l_max,n_max,tail,seconds"

_SCHEMA = {
    "materials": None,   # validated structurally below
    "geometry": {"layers": None, "exterior": None},
    "sweep": {"axis": None, "parameter_path": None, "values": None,
              "range": {"start": None, "stop": None, "count": None,
                        "spacing": None}},
    "numerics": {"mode": None, "tol": None, "temperature": None,
                 "l_cap": None, "n_cap": None, "standoff": None,
                 "omega_max": None, "quad_limit": None},
    "output": {"path": None, "units": None, "radius_m": None,
               "timing": None},
}

_MATERIAL_KEYS = {"eps_poles", "mu_poles", "eps_infinity", "mu_infinity"}
_POLE_KEYS = {"plasma_strength", "resonance", "damping"}
_MODES = {"matsubara": StressMode.MATSUBARA,
          "zero_T": StressMode.IMAG_AXIS_T0,
          "real_axis_diag": StressMode.REAL_AXIS_DIAGNOSTIC}


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding, locatable by JSON path."""

    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    t_rr: float
    l_max: int
    n_max: int | None
    tail: float
    seconds: float | None

    def csv(self, timing: bool) -> str:
        n_s = "" if self.n_max is None else str(self.n_max)
        sec = "" if (self.seconds is None or not timing) \
            else f"{self.seconds:.12e}"
        return (f"{self.sweep_value:.12e},{self.t_rr:.12e},{self.l_max},"
                f"{n_s},{self.tail:.12e},{sec}")


def _check_keys(obj, allowed, path, out):
    for key in obj:
        if key not in allowed:
            out.append(Diagnostic(f"{path}.{key}", "unknown key"))


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) \
        and math.isfinite(v)


def validate_config(config: dict) -> list[Diagnostic]:
    """Structural and semantic validation; empty list means runnable."""
    out: list[Diagnostic] = []
    if not isinstance(config, dict):
        return [Diagnostic("$", "config must be a JSON object")]
    _check_keys(config, _SCHEMA, "$", out)
    missing = False
    for req in ("materials", "geometry", "sweep", "numerics", "output"):
        if req not in config:
            out.append(Diagnostic(f"$.{req}", "missing required section"))
            missing = True
    if missing:
        return out

    mats = config["materials"]
    if not isinstance(mats, dict) or not mats:
        out.append(Diagnostic("$.materials", "must be a non-empty object"))
        mats = {}
    for name, m in mats.items():
        mp = f"$.materials.{name}"
        if not isinstance(m, dict):
            out.append(Diagnostic(mp, "material must be an object"))
            continue
        _check_keys(m, _MATERIAL_KEYS, mp, out)
        for side in ("eps_poles", "mu_poles"):
            for i, p in enumerate(m.get(side, [])):
                pp = f"{mp}.{side}[{i}]"
                if not isinstance(p, dict):
                    out.append(Diagnostic(pp, "pole must be an object"))
                    continue
                _check_keys(p, _POLE_KEYS, pp, out)
                for k in _POLE_KEYS:
                    if not _is_num(p.get(k, 0.0)):
                        out.append(Diagnostic(f"{pp}.{k}",
                                              "must be a finite number"))
                if _is_num(p.get("damping", 0.0)) and p.get("damping", 0.0) <= 0:
                    out.append(Diagnostic(
                        f"{pp}.damping",
                        "damping must be > 0 (strictly lossy media only)"))
                if _is_num(p.get("plasma_strength", 0.0)) \
                        and p.get("plasma_strength", 0.0) < 0:
                    out.append(Diagnostic(f"{pp}.plasma_strength",
                                          "must be >= 0"))
                if _is_num(p.get("resonance", 0.0)) \
                        and p.get("resonance", 0.0) < 0:
                    out.append(Diagnostic(f"{pp}.resonance", "must be >= 0"))
        for inf_key in ("eps_infinity", "mu_infinity"):
            v = m.get(inf_key, 1.0)
            if not _is_num(v) or v < 1.0:
                out.append(Diagnostic(f"{mp}.{inf_key}",
                                      "must be a finite number >= 1"))

    geo = config["geometry"]
    if not isinstance(geo, dict):
        out.append(Diagnostic("$.geometry", "must be an object"))
        geo = {}
    _check_keys(geo, _SCHEMA["geometry"], "$.geometry", out)
    layers = geo.get("layers", [])
    if not isinstance(layers, list) or not layers:
        out.append(Diagnostic("$.geometry.layers", "need at least one layer"))
        layers = []
    prev_r = 0.0
    for i, ly in enumerate(layers):
        lp = f"$.geometry.layers[{i}]"
        if not isinstance(ly, dict):
            out.append(Diagnostic(lp, "layer must be an object"))
            continue
        _check_keys(ly, {"radius", "material"}, lp, out)
        r = ly.get("radius")
        if not _is_num(r) or r <= 0:
            out.append(Diagnostic(f"{lp}.radius", "must be > 0"))
        elif r <= prev_r:
            out.append(Diagnostic(
                f"{lp}.radius",
                f"radii must strictly increase ({r} after {prev_r})"))
        else:
            prev_r = r
        if ly.get("material") not in mats:
            out.append(Diagnostic(f"{lp}.material",
                                  f"unresolved material {ly.get('material')!r}"))
    if geo.get("exterior") not in mats:
        out.append(Diagnostic("$.geometry.exterior",
                              f"unresolved material {geo.get('exterior')!r}"))

    sweep = config["sweep"]
    if not isinstance(sweep, dict):
        out.append(Diagnostic("$.sweep", "must be an object"))
        sweep = {}
    _check_keys(sweep, _SCHEMA["sweep"], "$.sweep", out)
    axis = sweep.get("axis")
    if axis not in ("radius_scale", "temperature", "material_parameter"):
        out.append(Diagnostic("$.sweep.axis",
                              f"unknown sweep axis {axis!r}"))
    if axis == "material_parameter":
        pathspec = sweep.get("parameter_path")
        if not isinstance(pathspec, str) or not _parse_parameter_path(
                pathspec, mats):
            out.append(Diagnostic("$.sweep.parameter_path",
                                  f"cannot resolve {pathspec!r}"))
    has_values = "values" in sweep
    has_range = "range" in sweep
    if has_values == has_range:
        out.append(Diagnostic(
            "$.sweep", "exactly one of 'values' or 'range' is required"))
    vals = []
    if has_values:
        vals = sweep["values"]
        if not isinstance(vals, list) or not vals \
                or not all(_is_num(v) for v in vals):
            out.append(Diagnostic("$.sweep.values",
                                  "must be a non-empty list of finite numbers"))
            vals = []
    if has_range:
        rng = sweep["range"]
        if not isinstance(rng, dict):
            out.append(Diagnostic("$.sweep.range", "must be an object"))
        else:
            _check_keys(rng, _SCHEMA["sweep"]["range"], "$.sweep.range", out)
            for k in ("start", "stop"):
                if not _is_num(rng.get(k)):
                    out.append(Diagnostic(f"$.sweep.range.{k}",
                                          "must be a finite number"))
            if not isinstance(rng.get("count"), int) or rng.get("count", 0) < 1:
                out.append(Diagnostic("$.sweep.range.count",
                                      "must be a positive integer"))
            if rng.get("spacing", "linear") not in ("linear", "log"):
                out.append(Diagnostic("$.sweep.range.spacing",
                                      "must be 'linear' or 'log'"))
            elif rng.get("spacing") == "log" and _is_num(rng.get("start")) \
                    and rng.get("start") <= 0:
                out.append(Diagnostic("$.sweep.range.start",
                                      "log spacing needs start > 0"))
    if axis in ("radius_scale", "temperature"):
        for i, v in enumerate(vals):
            if _is_num(v) and v <= 0.0:
                out.append(Diagnostic(f"$.sweep.values[{i}]",
                                      f"{axis} values must be > 0"))

    num = config["numerics"]
    if not isinstance(num, dict):
        out.append(Diagnostic("$.numerics", "must be an object"))
        num = {}
    _check_keys(num, _SCHEMA["numerics"], "$.numerics", out)
    mode = num.get("mode")
    if mode not in _MODES:
        out.append(Diagnostic("$.numerics.mode", f"unknown mode {mode!r}"))
    if not _is_num(num.get("tol")) or num.get("tol", 0) <= 0:
        out.append(Diagnostic("$.numerics.tol", "must be > 0"))
    needs_temp = mode in ("matsubara", "real_axis_diag")
    if needs_temp and axis != "temperature":
        if not _is_num(num.get("temperature")) or num.get("temperature", 0) <= 0:
            out.append(Diagnostic("$.numerics.temperature",
                                  f"mode {mode!r} needs temperature > 0"))
    if not isinstance(num.get("l_cap", 512), int) or num.get("l_cap", 512) < 4:
        out.append(Diagnostic("$.numerics.l_cap", "must be an integer >= 4"))
    if not isinstance(num.get("n_cap", 200000), int) \
            or num.get("n_cap", 200000) < 4:
        out.append(Diagnostic("$.numerics.n_cap", "must be an integer >= 4"))
    st = num.get("standoff", 0.0)
    if not _is_num(st) or st < 0.0:
        out.append(Diagnostic("$.numerics.standoff", "must be >= 0"))

    outspec = config["output"]
    if not isinstance(outspec, dict):
        out.append(Diagnostic("$.output", "must be an object"))
        outspec = {}
    _check_keys(outspec, _SCHEMA["output"], "$.output", out)
    if not isinstance(outspec.get("path"), str) or not outspec.get("path"):
        out.append(Diagnostic("$.output.path", "must be a non-empty string"))
    units = outspec.get("units", "reduced")
    if units not in ("reduced", "SI"):
        out.append(Diagnostic("$.output.units", "must be 'reduced' or 'SI'"))
    if units == "SI" and (not _is_num(outspec.get("radius_m"))
                          or outspec.get("radius_m", 0) <= 0):
        out.append(Diagnostic("$.output.radius_m",
                              "SI output needs radius_m > 0"))
    if not isinstance(outspec.get("timing", False), bool):
        out.append(Diagnostic("$.output.timing", "must be a boolean"))
    return out


def _parse_parameter_path(spec: str, materials: dict):
    """'<mat>.<eps_poles|mu_poles>[<i>].<field>' -> tuple or None."""
    try:
        mat, rest = spec.split(".", 1)
        side, rest = rest.split("[", 1)
        idx_s, rest = rest.split("]", 1)
        field = rest.lstrip(".")
        idx = int(idx_s)
    except ValueError:
        return None
    if mat not in materials or side not in ("eps_poles", "mu_poles"):
        return None
    if field not in _POLE_KEYS:
        return None
    if idx < 0 or idx >= len(materials[mat].get(side, [])):
        return None
    return mat, side, idx, field


def _build_material(m: dict) -> MaterialModel:
    def poles(lst):
        return tuple(LorentzPole(p["plasma_strength"], p.get("resonance", 0.0),
                                 p["damping"]) for p in lst)
    return MaterialModel(poles(m.get("eps_poles", [])),
                         poles(m.get("mu_poles", [])),
                         m.get("eps_infinity", 1.0),
                         m.get("mu_infinity", 1.0))


def _sweep_values(sweep: dict) -> list[float]:
    if "values" in sweep:
        return [float(v) for v in sweep["values"]]
    rng = sweep["range"]
    n = rng["count"]
    a, b = float(rng["start"]), float(rng["stop"])
    if n == 1:
        return [a]
    if rng.get("spacing", "linear") == "log":
        la, lb = math.log(a), math.log(b)
        return [math.exp(la + (lb - la) * i / (n - 1)) for i in range(n)]
    return [a + (b - a) * i / (n - 1) for i in range(n)]


def _point_config(config: dict, value: float):
    """Geometry and temperature for one sweep point."""
    mats_raw = {k: json.loads(json.dumps(v))
                for k, v in config["materials"].items()}
    sweep = config["sweep"]
    axis = sweep["axis"]
    num = config["numerics"]
    temperature = num.get("temperature")
    radius_scale = 1.0
    if axis == "temperature":
        temperature = value
    elif axis == "radius_scale":
        radius_scale = value
    else:
        mat, side, idx, fieldname = _parse_parameter_path(
            sweep["parameter_path"], mats_raw)
        mats_raw[mat][side][idx][fieldname] = value

    materials = {k: _build_material(v) for k, v in mats_raw.items()}
    geo = config["geometry"]
    layers = tuple(Layer(ly["radius"] * radius_scale,
                         materials[ly["material"]])
                   for ly in geo["layers"])
    geom = SphereGeometry(layers, materials[geo["exterior"]])
    return geom, temperature


def _run_point(config: dict, value: float) -> StressResult:
    geom, temperature = _point_config(config, value)
    num = config["numerics"]
    mode = num["mode"]
    tol = num["tol"]
    l_cap = num.get("l_cap", 512)
    standoff = num.get("standoff", 0.0)
    if mode == "matsubara":
        return stress_finite_T(geom, temperature, tol, l_cap=l_cap,
                               n_cap=num.get("n_cap", 200000),
                               standoff=standoff, collect_per_n=False)
    if mode == "zero_T":
        return stress_zero_T(geom, tol, l_cap=l_cap, standoff=standoff)
    grid = QuadratureSpec(omega_max=num.get("omega_max", 400.0),
                          rel_tol=tol,
                          limit=num.get("quad_limit", 400))
    return stress_real_axis_diagnostic(geom, temperature, grid,
                                       l_cap=l_cap, standoff=standoff)


def _worker(args):
    config, value = args
    t0 = time.perf_counter()
    try:
        res = _run_point(config, value)
        err = None
    except ConvergenceError as exc:
        res, err = exc.partial, str(exc)
    except CasmieError as exc:
        res, err = None, str(exc)
    return value, res, err, time.perf_counter() - t0


def _unit_factor(outspec: dict) -> float:
    if outspec.get("units", "reduced") == "SI":
        return HBAR_C / outspec["radius_m"] ** 4
    return 1.0


def run_job(config: dict, out_path: str | None = None,
            threads: int = 1, verbose: bool = False,
            stream=None) -> int:
    """Run the sweep; returns the process exit code (0/2/3/4)."""
    stream = stream if stream is not None else sys.stderr
    diags = validate_config(config)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=stream)
        return 2

    values = _sweep_values(config["sweep"])
    outspec = config["output"]
    path = out_path or outspec["path"]
    factor = _unit_factor(outspec)
    timing = bool(outspec.get("timing", False))

    tasks = [(config, v) for v in values]
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads > 1 and len(tasks) > 1:
        with futures.ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]

    rows: list[ResultRow] = []
    failures = []
    for value, res, err, secs in results:
        if err is not None:
            failures.append((value, err))
            if verbose:
                print(f"sweep point {value:g}: {err}", file=stream)
            if res is None:
                continue
        if res is not None and err is None:
            n_max = res.n_max_used if res.mode is StressMode.MATSUBARA else None
            rows.append(ResultRow(value, factor * res.t_rr, res.l_max_used,
                                  n_max, factor * res.tail_estimate, secs))
            if verbose:
                print(emit_convergence_report(res), file=stream)

    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(_CSV_HEADER + "\n")
            for row in rows:
                fh.write(row.csv(timing) + "\n")
    except OSError as exc:
        print(f"I/O error writing {path}: {exc}", file=stream)
        return 4
    if failures:
        for value, err in failures:
            print(f"non-convergence at sweep value {value:g}: {err}",
                  file=stream)
        return 3
    return 0


def emit_convergence_report(result: StressResult) -> str:
    """Human-readable convergence summary for one stress result."""
    lines = [f"mode: {result.mode.value}",
             f"T_RR = {result.t_rr:.12e} (hbar c / R^4 units)"]
    if result.mode is not StressMode.IMAG_AXIS_T0:
        lines.append(f"reduced temperature: {result.temperature:.6g}")
    lines.append(f"l_max used: {result.l_max_used}")
    if result.mode is StressMode.MATSUBARA:
        lines.append(f"Matsubara terms: n_max = {result.n_max_used}")
    scale = abs(result.t_rr)
    if result.converged and (scale == 0.0
                             or result.tail_estimate <= result.tolerance * scale):
        lines.append(f"tail < tol: {result.tail_estimate:.3e} <= "
                     f"{result.tolerance:.1e} x |T_RR|")
    else:
        lines.append(f"NOT converged: partial sum {result.t_rr:.6e}, "
                     f"largest tail {result.tail_estimate:.3e}")
    if result.imag_residue:
        lines.append(f"imaginary residue: {result.imag_residue:.3e}")
    if result.mode is StressMode.MATSUBARA and result.per_n:
        lines.append("  n      y_n        l_used   term")
        shown = list(result.per_n[:8])
        if len(result.per_n) > 11:
            shown += [None] + list(result.per_n[-3:])
        else:
            shown += list(result.per_n[8:])
        for row in shown:
            if row is None:
                lines.append("  ...")
                continue
            n, y, l_used, term = row
            lines.append(f"  {n:<6d} {y:<10.4g} {l_used:<8d} {term:+.6e}")
    if result.cross_check is not None:
        dev = abs(result.t_rr - result.cross_check) / max(abs(result.t_rr),
                                                          1e-300)
        lines.append(f"real-axis cross-check: {result.cross_check:.12e} "
                     f"(rel dev {dev:.3e})")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="casmie",
        description="Casimir radial stress on layered magnetodielectric "
                    "spheres (batch sweeps).")
    parser.add_argument("--config", required=True, help="JSON job config")
    parser.add_argument("--out", default=None,
                        help="override output CSV path")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes (0 = auto)")
    parser.add_argument("--verbose", action="store_true",
                        help="print per-point convergence reports")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        print(f"I/O error reading {args.config}: {exc}", file=sys.stderr)
        return 4
    except json.JSONDecodeError as exc:
        print(f"config error: $: invalid JSON ({exc})", file=sys.stderr)
        return 2
    return run_job(config, out_path=args.out, threads=args.threads,
                   verbose=args.verbose)


if __name__ == "__main__":
    sys.exit(main())
