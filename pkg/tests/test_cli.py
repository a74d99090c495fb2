"""Batch CLI: validation diagnostics, determinism, units, reports."""

import copy
import json
import math
import subprocess
import sys

import pytest

from casmie.cli import (HBAR_C, Diagnostic, emit_convergence_report, main,
                        run_job, validate_config)
from casmie.materials import LorentzPole, MaterialModel
from casmie.mie import homogeneous_sphere
from casmie.stress import StressMode, StressResult, stress_finite_T

BASE = {
    "materials": {
        "diel": {"eps_poles": [{"plasma_strength": 1.0, "resonance": 1.0,
                                "damping": 0.1}]},
        "vac": {},
    },
    "geometry": {"layers": [{"radius": 1.0, "material": "diel"}],
                 "exterior": "vac"},
    "sweep": {"axis": "temperature", "values": [0.1, 0.2]},
    "numerics": {"mode": "matsubara", "tol": 1e-5, "standoff": 0.1},
    "output": {"path": "out.csv", "units": "reduced"},
}


def cfg(**overrides):
    c = copy.deepcopy(BASE)
    for key, val in overrides.items():
        c[key] = val
    return c


def test_validate_well_formed():
    assert validate_config(cfg()) == []


def test_validate_negative_damping():
    c = cfg()
    c["materials"]["diel"]["eps_poles"][0]["damping"] = -0.1
    diags = validate_config(c)
    assert len(diags) == 1
    assert diags[0].path == "$.materials.diel.eps_poles[0].damping"


def test_validate_decreasing_radii():
    c = cfg()
    c["geometry"]["layers"] = [{"radius": 2.0, "material": "diel"},
                               {"radius": 1.0, "material": "diel"}]
    diags = validate_config(c)
    assert len(diags) == 1
    assert "2.0" in diags[0].message and "1.0" in diags[0].message


def test_validate_unknown_key_and_unresolved_material():
    c = cfg()
    c["geometry"]["exterior"] = "ghost"
    c["mystery"] = 1
    msgs = {d.path for d in validate_config(c)}
    assert "$.mystery" in msgs
    assert "$.geometry.exterior" in msgs


def test_validate_mode_and_sweep():
    c = cfg()
    c["numerics"]["mode"] = "nope"
    assert any(d.path == "$.numerics.mode" for d in validate_config(c))
    c = cfg()
    c["sweep"] = {"axis": "temperature"}
    assert any(d.path == "$.sweep" for d in validate_config(c))
    c = cfg()
    c["sweep"] = {"axis": "material_parameter",
                  "parameter_path": "diel.eps_poles[5].damping",
                  "values": [0.1]}
    assert any(d.path == "$.sweep.parameter_path" for d in validate_config(c))


def test_vacuum_sweep_zero_rows(tmp_path):
    c = cfg()
    c["geometry"]["layers"] = [{"radius": 1.0, "material": "vac"}]
    c["sweep"] = {"axis": "radius_scale", "values": [0.5, 1.0, 2.0]}
    c["numerics"] = {"mode": "matsubara", "tol": 1e-6, "temperature": 0.3,
                     "standoff": 0.0}
    out = tmp_path / "vac.csv"
    assert run_job(c, out_path=str(out)) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "sweep_value,T_RR,l_max,n_max,tail,seconds"
    assert len(lines) == 4
    for line in lines[1:]:
        assert line.split(",")[1] == "0.000000000000e+00"


def test_repeat_runs_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_job(cfg(), out_path=str(a)) == 0
    assert run_job(cfg(), out_path=str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_invalid_config_exits_2_without_csv(tmp_path):
    c = cfg()
    c["geometry"]["exterior"] = "ghost"
    out = tmp_path / "never.csv"
    assert run_job(c, out_path=str(out)) == 2
    assert not out.exists()


def test_sweep_point_matches_direct_call(tmp_path):
    c = cfg()
    c["sweep"] = {"axis": "temperature", "values": [0.1]}
    out = tmp_path / "one.csv"
    assert run_job(c, out_path=str(out)) == 0
    row = out.read_text(encoding="utf-8").splitlines()[1].split(",")
    direct = stress_finite_T(
        homogeneous_sphere(
            1.0, MaterialModel(eps_poles=(LorentzPole(1.0, 1.0, 0.1),))),
        0.1, 1e-5, standoff=0.1, collect_per_n=False)
    assert row[1] == f"{direct.t_rr:.12e}"
    assert int(row[2]) == direct.l_max_used
    assert int(row[3]) == direct.n_max_used


def test_si_units_factor(tmp_path):
    a, b = tmp_path / "red.csv", tmp_path / "si.csv"
    c = cfg()
    c["sweep"] = {"axis": "temperature", "values": [0.1]}
    assert run_job(c, out_path=str(a)) == 0
    c_si = cfg()
    c_si["sweep"] = {"axis": "temperature", "values": [0.1]}
    c_si["output"] = {"path": "si.csv", "units": "SI", "radius_m": 2.5e-6}
    assert run_job(c_si, out_path=str(b)) == 0
    red = float(a.read_text().splitlines()[1].split(",")[1])
    si = float(b.read_text().splitlines()[1].split(",")[1])
    factor = HBAR_C / 2.5e-6 ** 4
    assert abs(si - red * factor) <= 1e-12 * abs(si)


def test_csv_schema_stable_across_modes(tmp_path):
    c = cfg()
    c["sweep"] = {"axis": "radius_scale", "values": [1.0]}
    c["numerics"] = {"mode": "zero_T", "tol": 1e-4, "standoff": 0.1}
    out = tmp_path / "z.csv"
    assert run_job(c, out_path=str(out)) == 0
    header, row = out.read_text(encoding="utf-8").splitlines()
    assert header == "sweep_value,T_RR,l_max,n_max,tail,seconds"
    cells = row.split(",")
    assert len(cells) == 6
    assert cells[3] == ""    # no Matsubara index in zero-T mode
    assert cells[5] == ""    # timing disabled by default


def test_material_parameter_sweep(tmp_path):
    c = cfg()
    c["sweep"] = {"axis": "material_parameter",
                  "parameter_path": "diel.eps_poles[0].damping",
                  "values": [0.1, 0.2]}
    c["numerics"]["temperature"] = 0.1
    out = tmp_path / "m.csv"
    assert run_job(c, out_path=str(out)) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    v1 = float(lines[1].split(",")[1])
    v2 = float(lines[2].split(",")[1])
    assert v1 != v2


def test_range_sweep_log(tmp_path):
    c = cfg()
    c["sweep"] = {"axis": "temperature",
                  "range": {"start": 0.1, "stop": 1.0, "count": 3,
                            "spacing": "log"}}
    out = tmp_path / "r.csv"
    assert run_job(c, out_path=str(out)) == 0
    vals = [float(line.split(",")[0]) for line
            in out.read_text().splitlines()[1:]]
    assert vals[0] == pytest.approx(0.1)
    assert vals[1] == pytest.approx(math.sqrt(0.1 * 1.0))
    assert vals[2] == pytest.approx(1.0)


def test_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "ser.csv", tmp_path / "par.csv"
    assert run_job(cfg(), out_path=str(a), threads=1) == 0
    assert run_job(cfg(), out_path=str(b), threads=2) == 0
    assert a.read_bytes() == b.read_bytes()


def test_convergence_report_contents():
    geom = homogeneous_sphere(
        1.0, MaterialModel(eps_poles=(LorentzPole(1.0, 1.0, 0.1),)))
    res = stress_finite_T(geom, 0.1, 1e-5, standoff=0.1)
    rep = emit_convergence_report(res)
    assert "tail < tol" in rep
    assert "n_max" in rep and "matsubara" in rep

    partial = StressResult(t_rr=res.t_rr, temperature=0.1, l_max_used=10,
                           n_max_used=5, tail_estimate=1.0,
                           mode=StressMode.MATSUBARA, converged=False,
                           tolerance=1e-5)
    rep2 = emit_convergence_report(partial)
    assert "NOT converged" in rep2 and "partial sum" in rep2
    assert "largest tail" in rep2

    from casmie.stress import stress_zero_T
    z = stress_zero_T(geom, 1e-4, standoff=0.1)
    rep3 = emit_convergence_report(z)
    assert "Matsubara" not in rep3
    assert "n_max" not in rep3


def test_entry_point_subprocess(tmp_path):
    config = cfg()
    config["sweep"] = {"axis": "temperature", "values": [0.2]}
    path = tmp_path / "job.json"
    out = tmp_path / "cli.csv"
    config["output"]["path"] = str(out)
    path.write_text(json.dumps(config), encoding="utf-8")
    proc = subprocess.run(
        [sys.executable, "-m", "casmie.cli", "--config", str(path)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()


def test_main_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json", encoding="utf-8")
    assert main(["--config", str(p)]) == 2
    assert main(["--config", str(tmp_path / "missing.json")]) == 4


def test_diagnostic_str():
    d = Diagnostic("$.a.b", "broken")
    assert str(d) == "$.a.b: broken"
