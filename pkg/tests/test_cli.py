import json
import subprocess
import sys
import time
from importlib import resources

import numpy as np
import pytest

from qanomaly.cli import main
from qanomaly.problemfile import ProblemFile, encode_matrix

from helpers import REF_DH1, REF_DS1, REF_H, REF_S, commuting_pair

DATA = resources.files("qanomaly") / "data"
REF_FILE = str(DATA / "three_level.json")
NONDEG_FILE = str(DATA / "nondegenerate.json")
UNOBSTRUCTED_FILE = str(DATA / "unobstructed_degenerate.json")


def write_problem(path, H, S, dH=None, dS=None, tolerances=None):
    data = {
        "schema_version": "1",
        "dim": len(H),
        "H": encode_matrix(H),
        "S": encode_matrix(S),
        "tolerances": tolerances or {},
    }
    if dH is not None:
        data["delta_H1"] = encode_matrix(dH)
    if dS is not None:
        data["delta_S1"] = encode_matrix(dS)
    path.write_text(json.dumps(data))
    return str(path)


def run_json(capsys, *argv):
    code = main(["--output", "json", *argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_spectrum_three_level(capsys):
    code, rep = run_json(capsys, "spectrum", REF_FILE)
    assert code == 0
    assert [s["multiplicity"] for s in rep["result"]["sectors"]] == [1, 2]
    assert rep["effective_tolerances"]["cluster"] > 0


def test_spectrum_text(capsys):
    assert main(["spectrum", REF_FILE]) == 0
    assert capsys.readouterr().out.startswith("2 sector(s)")


def test_spectrum_zero_pair(tmp_path, capsys):
    f = write_problem(tmp_path / "z.json", np.zeros((3, 3)), np.zeros((3, 3)))
    code, rep = run_json(capsys, "spectrum", f)
    assert code == 0 and len(rep["result"]["sectors"]) == 1


def test_non_commuting_exit_2(tmp_path, capsys):
    f = write_problem(tmp_path / "bad.json", np.diag([1.0, 0.0]), np.array([[0, 1.0], [1.0, 0]]))
    assert main(["spectrum", f]) == 2
    err = capsys.readouterr().err
    assert "do not commute" in err and "||[H,S]||" in err


@pytest.mark.parametrize(
    "content, message",
    [
        ("not json", "invalid JSON"),
        ('{"schema_version": "2", "dim": 1}', "schema_version"),
        ('{"schema_version": "1", "dim": 2, "H": [[[1, 0]]], "S": [[[1, 0]]]}', "H"),
        ('{"schema_version": "1", "dim": 1, "H": [[[1, 0]]], "S": [[[1, 0]]], '
         '"tolerances": {"bogus": 1}}', "bogus"),
    ],
)
def test_validation_errors(tmp_path, capsys, content, message):
    f = tmp_path / "p.json"
    f.write_text(content)
    assert main(["spectrum", str(f)]) == 2
    assert message in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path, capsys):
    assert main(["spectrum", str(tmp_path / "nope.json")]) == 2


def test_anomaly_requires_perturbation(tmp_path, capsys):
    f = write_problem(tmp_path / "p.json", REF_H, REF_S)
    assert main(["anomaly", f]) == 2
    assert "delta_H1" in capsys.readouterr().err


def test_cohomology_three_level_both(capsys):
    code, rep = run_json(capsys, "cohomology", REF_FILE)
    assert code == 0
    assert rep["result"] == {"theorem": [5, 10, 5], "brute_force": [5, 10, 5], "agree": True}


def test_cohomology_nondegenerate(tmp_path, capsys):
    f = write_problem(tmp_path / "n.json", np.diag([0.0, 1.0, 2.0, 3.0]), np.zeros((4, 4)))
    code, rep = run_json(capsys, "cohomology", f, "--method", "theorem")
    assert code == 0 and rep["result"] == {"theorem": [4, 8, 4]}


def test_cohomology_disagreement_exit_3(tmp_path, capsys):
    # a cluster tolerance that merges sectors makes the theorem count wrong
    H = np.diag([0.0, 0.0, 1e-3, 1.0])
    f = write_problem(tmp_path / "m.json", H, np.zeros((4, 4)))
    assert main(["cohomology", f, "--tol-cluster", "1e-2"]) == 3


def test_brute_force_n12_fast(tmp_path, capsys):
    rng = np.random.default_rng(0)
    pair, _, _ = commuting_pair(rng, [3, 3, 2, 2, 1, 1], labels=[(k, 0) for k in range(6)])
    f = write_problem(tmp_path / "big.json", pair.hamiltonian, pair.symmetry)
    start = time.perf_counter()
    code, rep = run_json(capsys, "cohomology", f, "--method", "brute")
    assert time.perf_counter() - start < 10
    assert code == 0 and rep["result"]["brute_force"] == [28, 56, 28]


def test_anomaly_three_level(capsys):
    code, rep = run_json(capsys, "anomaly", REF_FILE)
    res = rep["result"]
    assert code == 0
    assert res["anomaly"] is True and res["anomaly_order"] == 2
    assert res["obstruction"]["norm"] == pytest.approx(np.sqrt(2), abs=1e-10)
    assert res["series"] == {"obstructed_at": 2, "norm": res["obstruction"]["norm"]}
    assert res["first_order"]["source"] == "input"


def test_anomaly_cartan_series(tmp_path, capsys):
    f = write_problem(
        tmp_path / "c.json", REF_H, REF_S, np.diag([0.3, -0.2, 0.5]), np.diag([0.1, 0.4, 0.0])
    )
    code, rep = run_json(capsys, "anomaly", f, "--order", "4")
    res = rep["result"]
    assert code == 0 and res["anomaly"] is False
    assert res["series"]["order"] == 4 and len(res["series"]["delta_H"]) == 4
    assert res["series"]["slope"] is None  # exact: no truncation error at all


@pytest.mark.parametrize("path", [NONDEG_FILE, UNOBSTRUCTED_FILE])
def test_bundled_unobstructed(capsys, path):
    code, rep = run_json(capsys, "anomaly", path)
    res = rep["result"]
    assert code == 0 and res["anomaly"] is False
    assert abs(res["series"]["slope"] - 7) <= 0.3


def test_three_level_input_matches_solver_plus_e22(tmp_path, capsys):
    _, rep = run_json(
        capsys, "anomaly", write_problem(tmp_path / "solver.json", REF_H, REF_S, REF_DH1)
    )
    solver = np.array(rep["result"]["first_order"]["delta_S1"])[..., 0]
    shifted = solver + np.diag([0.0, 1.0, 0.0])
    _, a = run_json(
        capsys, "anomaly", write_problem(tmp_path / "s.json", REF_H, REF_S, REF_DH1, shifted)
    )
    _, b = run_json(capsys, "anomaly", REF_FILE)
    assert a["result"]["obstruction"] == b["result"]["obstruction"]
    assert rep["result"]["anomaly"] is False


def test_tolerance_flag_wins(tmp_path, capsys):
    f = write_problem(
        tmp_path / "t.json", REF_H, REF_S, REF_DH1, REF_DS1, {"obstruction": 1e-3}
    )
    _, rep = run_json(capsys, "anomaly", f)
    assert rep["effective_tolerances"]["obstruction"] == 1e-3
    # order 1 skips the series, which cannot close once a class is ignored
    _, rep = run_json(capsys, "anomaly", f, "--tol-obstruction", "10", "--order", "1")
    assert rep["effective_tolerances"]["obstruction"] == 10.0
    assert rep["result"]["anomaly"] is False
    assert main(["anomaly", f, "--tol-obstruction", "10"]) == 3


def test_report_round_trip(tmp_path, capsys):
    _, first = run_json(capsys, "anomaly", REF_FILE)
    again = tmp_path / "again.json"
    again.write_text(json.dumps(first))
    _, second = run_json(capsys, "anomaly", str(again))
    assert first["result"] == second["result"]
    reread, original = ProblemFile.from_dict(first), ProblemFile.load(REF_FILE)
    for key in ("H", "S", "delta_H1", "delta_S1"):
        assert np.array_equal(getattr(reread, key), getattr(original, key))


def test_deterministic_subprocess():
    cmd = [sys.executable, "-m", "qanomaly.cli", "--output", "json", "anomaly", UNOBSTRUCTED_FILE]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_global_flags_after_subcommand(capsys):
    code = main(["spectrum", REF_FILE, "--output", "json"])
    assert code == 0
    json.loads(capsys.readouterr().out)


def test_verma_check(capsys):
    code, rep = run_json(capsys, "verma-check", "--lambda", "7/3", "--degree", "8")
    assert code == 0
    assert rep["result"]["cocycle"] is True
    assert rep["result"]["verified_degrees"] == [0, 6]
    code, rep = run_json(
        capsys, "verma-check", "--lambda", "3", "--degree", "6", "--delta-f-power", "2"
    )
    assert rep["result"]["cocycle"] is False


def test_verma_bad_lambda(capsys):
    assert main(["verma-check", "--lambda", "abc", "--degree", "5"]) == 2
