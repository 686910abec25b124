"""End-to-end runs of the levilens command."""
import csv
import io
import json
import os
import subprocess
import sys

import pytest

QUADRIC = {"defining": {"kind": "builtin", "name": "quadric", "params": [1, -1]}, "q": 1}


def run(args, payload=None, env=None):
    stdin = payload if isinstance(payload, str) or payload is None else json.dumps(payload)
    full_env = os.environ.copy()
    full_env.update(env or {})
    return subprocess.run(
        [sys.executable, "-m", "levilens", *args],
        input=stdin,
        capture_output=True,
        text=True,
        env=full_env,
        timeout=300,
    )


def test_analyze_quadric():
    done = run(["analyze"], QUADRIC)
    assert done.returncode == 0, done.stderr
    out = json.loads(done.stdout)
    assert out["conditions"] == {"Y": False, "Z": False, "gamma_q_member": True}
    assert out["levi"]["signature"] == {"n_minus": 1, "n_plus": 1}
    assert out["levi"]["eigenvalues"] == pytest.approx([1.0, -1.0], rel=1e-14)


def test_analyze_sphere_csv():
    request = {"defining": {"kind": "builtin", "name": "sphere", "n": 2}, "point": [1, 0, 0, 0], "q": 0}
    done = run(["analyze", "--format", "csv"], request)
    assert done.returncode == 0, done.stderr
    rows = dict(csv.reader(io.StringIO(done.stdout)))
    assert rows["conditions.gamma_q_member"] == "true"
    assert rows["conditions.Z"] == "false"


def test_malformed_json_is_input_error():
    done = run(["analyze"], "{bad")
    assert done.returncode == 2
    assert "malformed JSON" in done.stderr


def test_unknown_flag_is_input_error():
    assert run(["analyze", "--bogus"], QUADRIC).returncode == 2


def test_point_off_boundary_is_domain_error():
    request = {"defining": {"kind": "builtin", "name": "sphere", "n": 2}, "point": [0.5, 0, 0, 0], "q": 0}
    assert run(["analyze"], request).returncode == 3


def test_leading_bergman():
    done = run(["leading"], {"kind": "bergman", "lambda": [-1], "q": 1})
    assert done.returncode == 0, done.stderr
    lead = json.loads(done.stdout)["leading"]
    assert lead["kind"] == "bergman"
    entries = lead["a0"]["entries"]
    nonzero = [pair for row in entries for pair in row if any(pair)]
    assert len(nonzero) == 1


def test_leading_wrong_degree_reports_signature():
    done = run(["leading"], {"kind": "szego", "lambda": [1, -2], "q": 0})
    assert done.returncode == 3
    assert "(1, 1)" in done.stderr


def test_leading_csv_rows():
    done = run(["leading", "--format", "csv"], {"kind": "bergman", "lambda": [-1], "q": 1})
    rows = list(csv.reader(io.StringIO(done.stdout)))
    assert rows[0] == ["operator", "row", "col", "re", "im"]
    assert {r[0] for r in rows[1:]} == {"b0", "a0", "F"}


def test_phase_output():
    done = run(["phase"], {"kind": "szego", "lambda": [1, -2]})
    assert done.returncode == 0, done.stderr
    phase = json.loads(done.stdout)["phase"]
    assert phase["n"] == 3 and len(phase["labels"]) == 10


def test_kernel_eval_routes_agree():
    request = {"kind": "szego", "n": 2, "s_coeffs": [1, 0.5, 0.25, 0.125], "phi": [0.3, 1], "include_smooth": True}
    done = run(["kernel-eval"], request)
    assert done.returncode == 0, done.stderr
    out = json.loads(done.stdout)
    (((re, im),),) = out["value"]["entries"]
    (((dre, dim),),) = out["direct_moment_sum"]["entries"]
    assert complex(re, im) == pytest.approx(complex(dre, dim), rel=1e-10)


def test_kernel_eval_from_eigenvalues():
    done = run(["kernel-eval", "--truncation", "0"], {"kind": "szego", "lambda": [1], "q": 1, "phi": [0, 1]})
    assert done.returncode == 0, done.stderr
    assert json.loads(done.stdout)["expansion"]["order"] == 2


def test_verify_kernels_suite():
    done = run(["verify", "--suite", "kernels"])
    assert done.returncode == 0, done.stderr
    assert [line.split()[0] for line in done.stderr.splitlines()] == ["PASS"] * 3
    assert json.loads(done.stdout)["pass"] is True


def test_verify_detects_injected_perturbation():
    done = run(["verify", "--suite", "kernels", "--inject-det-perturbation", "1e-6"])
    assert done.returncode == 1
    assert done.stderr.splitlines()[0].startswith("FAIL [1]")


def test_verify_oracles_with_schedule():
    done = run(["verify", "--suite", "oracles", "--eps-schedule", "0.1,0.01,0.001"])
    assert done.returncode == 0, done.stderr
    measured = json.loads(done.stdout)["results"][0]["measured"]
    assert measured["n=2"]["slope"] == pytest.approx(-3.0, rel=1e-2)
    assert "slope_vs_eps" in measured["n=1"]


def test_verify_bad_schedule():
    assert run(["verify", "--suite", "oracles", "--eps-schedule", "0.01,0.1"]).returncode == 2


def test_repeat_runs_are_byte_identical():
    first = run(["analyze"], QUADRIC).stdout
    second = run(["analyze"], QUADRIC).stdout
    assert first == second


def test_thread_count_does_not_change_results():
    serial = json.loads(run(["verify", "--suite", "heat"]).stdout)
    threaded = json.loads(run(["verify", "--suite", "heat"], env={"LEVILENS_THREADS": "4"}).stdout)
    for a, b in zip(serial["results"], threaded["results"]):
        assert a["measured"] == b["measured"]
        assert a["criterion"] == b["criterion"]
