import json
import math
import subprocess
import sys

import pytest

from holonomy.cli import EXIT_GEOMETRY, EXIT_NUMERICAL, EXIT_OK, EXIT_SCHEMA, EXIT_TOLERANCE, main, run


def test_check_passes_on_catalog_bundle():
    code, report = run(["check", "--geometry", "sphere_monopole", "--param", "n=2"])
    assert code == EXIT_OK and report["passed"]
    assert report["result"]["bundle"]["pass"]
    assert report["result"]["bundle"]["sample_counts"]["B1"] > 0


def test_transport_of_equator_loop_is_half_the_flux():
    code, report = run(["transport", "--geometry", "sphere_monopole", "--map", "equator", "--expect",
                        str(math.pi), "--tolerance", "1e-9"])
    assert code == EXIT_OK
    assert report["result"]["expected_defect"] < 1e-9


def test_surface_expectation_mismatch_exits_with_tolerance_code():
    argv = ["surface", "--geometry", "torus_global_B", "--param", "theta=0.5", "--map", "identity",
            "--resolution", "4"]
    assert run(argv + ["--expect", "0.5"])[0] == EXIT_OK
    code, report = run(argv + ["--expect", "1.5"])
    assert code == EXIT_TOLERANCE and not report["passed"]


@pytest.mark.parametrize("argv, code, kind", [
    (["check"], EXIT_SCHEMA, "schema"),
    (["check", "--geometry", "klein_bottle"], EXIT_SCHEMA, "schema"),
    (["check", "--geometry", "box_gerbe", "--param", "charts=5"], EXIT_SCHEMA, "schema"),
    (["transport", "--geometry", "sphere_monopole", "--map", "cap"], EXIT_SCHEMA, "schema"),
    (["transport", "--geometry", "sphere_monopole", "--map", "meridian", "--breakpoints", "0,3.14",
      "--labels", "0"], EXIT_GEOMETRY, "geometry"),
    (["transport", "--geometry", "sphere_monopole", "--map", "latitude", "--tol", "1e-16", "--max-depth", "0"],
     EXIT_NUMERICAL, "numerical"),
])
def test_error_exit_codes(argv, code, kind):
    got, report = run(argv)
    assert got == code
    assert report["error"]["kind"] == kind


def test_scene_file_is_merged_with_flags(tmp_path):
    scene = {"geometry": {"name": "sphere_monopole", "params": {"n": 1}},
             "object": {"map": "cap", "params": {"theta0": 1.0}},
             "partition": {"resolution": [6, 8]}}
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(scene))
    code, report = run(["stokes", "--scene", str(path), "--map-param", "theta0=2.0"])
    assert code == EXIT_OK
    assert report["scene"]["object"]["params"]["theta0"] == 2.0
    assert report["result"]["curvature_phase"]["phase_accumulated"] == pytest.approx(
        math.pi * (1 - math.cos(2.0)), abs=1e-9)


@pytest.mark.parametrize("content", ['{"colour": {}}', "[1, 2]", "not json", '{"quad": {"speed": 3}}'])
def test_bad_scene_files(tmp_path, content):
    path = tmp_path / "scene.json"
    path.write_text(content)
    assert run(["check", "--scene", str(path), "--geometry", "circle_flat"])[0] == EXIT_SCHEMA


def test_threads_flag_and_env_are_recorded(monkeypatch):
    _, report = run(["check", "--geometry", "circle_flat", "--threads", "3"])
    assert report["scene"]["options"]["threads"] == 3
    monkeypatch.setenv("HOLONOMY_THREADS", "2")
    _, report = run(["check", "--geometry", "circle_flat"])
    assert report["scene"]["options"]["threads"] == 2


def test_axiom_suites_and_mutant():
    base = ["axioms", "--geometry", "sphere_monopole", "--trials", "3"]
    assert run(base)[0] == EXIT_OK
    assert run(base + ["--mutant"])[0] == EXIT_TOLERANCE


def test_reconstruct_recovers_transition():
    code, report = run(["reconstruct", "--geometry", "sphere_monopole", "--n-points", "2"])
    assert code == EXIT_OK, report


def test_main_prints_json(capsys):
    code = main(["check", "--geometry", "circle_flat"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK and out["passed"] is True


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "holonomy", "check", "--geometry", "klein_bottle"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_SCHEMA
    assert json.loads(proc.stdout)["error"]["type"] == "SchemaError"
