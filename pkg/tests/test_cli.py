import io
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from revpref.cli import dump_dataset, main, parse_dataset, write_dataset
from revpref.core import Dataset, InputError

DATA = Path(__file__).resolve().parent.parent / "data"
PAIRS = sorted(p.stem for p in DATA.glob("*.csv"))


def run(*argv, env=None):
    """Run the CLI in-process; returns (exit code, stdout)."""
    buf = io.StringIO()
    old = os.environ.copy()
    if env:
        os.environ.update(env)
    try:
        code = main([str(a) for a in argv], out=buf)
    finally:
        os.environ.clear()
        os.environ.update(old)
    return code, buf.getvalue()


def run_json(*argv, env=None):
    code, text = run(*argv, "--format", "json", env=env)
    return code, json.loads(text)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_bytes(text.encode())
        return p

    return _write


def test_csv_single_observation(write):
    d = parse_dataset(str(write("a.csv", "id,q1,q2,p1,p2\na,1,1,1,1\n")))
    assert d.n == 1 and d.dimension == 2 and d.labels == ["a"]


def test_crlf_accepted(write):
    d = parse_dataset(str(write("a.csv", "id,q1,q2,p1,p2\r\na,1,2,3,4\r\nb,5,6,7,8\r\n")))
    np.testing.assert_array_equal(d.quantities, [[1, 2], [5, 6]])
    np.testing.assert_array_equal(d.prices, [[3, 4], [7, 8]])


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("id,q1,q2,p1,p2\na,0,1,1,1\n", "row 2, column 2 (q1)"),
        ("id,q1,q2,p1,p2\na,1,1,1\n", "row 2: expected 5 columns"),
        ("id,q1,q2,p1,p2\na,1,1,1,-3\n", "row 2, column 5 (p2)"),
        ("id,q1,q2,p1,p2\na,1,1,1,1\nb,1,\"1,5\",1,1\n", "row 3, column 3 (q2)"),
        ("id,q1,q2,p1,p2\na,1,nan,1,1\n", "row 2, column 3"),
        ("id,q1,q2,p1,p2\na,1,1_0,1,1\n", "row 2, column 3"),
        ("id,x1,q2,p1,p2\na,1,1,1,1\n", "row 1, column 2"),
        ("id,q1,p1,p2\n", "row 1"),
        ("id,q1,q2,p1,p2\na,1,1,1,1\na,2,2,2,2\n", "duplicate id"),
        ("id,q1,q2,p1,p2\n", "no observations"),
    ],
)
def test_csv_errors(write, text, fragment):
    with pytest.raises(InputError, match=None) as exc:
        parse_dataset(str(write("bad.csv", text)))
    assert fragment in str(exc.value)


@pytest.mark.parametrize(
    "doc,fragment",
    [
        ({"dimension": 2, "observations": [{"id": "a", "quantities": [1, 0], "prices": [1, 1]}]}, "quantities[2]"),
        ({"dimension": 2, "observations": [{"id": "a", "quantities": [1], "prices": [1, 1]}]}, "expected 2 values"),
        ({"dimension": 2, "observations": [{"id": "a", "prices": [1, 1]}]}, "missing field"),
        ({"dimension": 2, "observations": [{"id": "a", "quantities": [1, "x"], "prices": [1, 1]}]}, "expected a number"),
        ({"dimension": 0, "observations": []}, "dimension"),
        ([1, 2], "expected an object"),
    ],
)
def test_json_errors(write, doc, fragment):
    with pytest.raises(InputError) as exc:
        parse_dataset(str(write("bad.json", json.dumps(doc))))
    assert fragment in str(exc.value)


def test_malformed_json(write):
    with pytest.raises(InputError, match="line 1"):
        parse_dataset(str(write("bad.json", "{")))


def test_unknown_extension(write):
    p = write("data.txt", "id,q1,p1\na,1,1\n")
    with pytest.raises(InputError):
        parse_dataset(str(p))
    assert parse_dataset(str(p), "csv").n == 1


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_fixpoint(tmp_path, violating, fmt):
    first = dump_dataset(Dataset.from_arrays(violating.quantities, violating.prices, ["a", "b"]), fmt)
    p = tmp_path / f"d.{fmt}"
    p.write_text(first)
    second = dump_dataset(parse_dataset(str(p)), fmt)
    assert first == second


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_exact_floats(tmp_path, fmt):
    rng = np.random.default_rng(5)
    d = Dataset.from_arrays(np.exp(rng.normal(size=(4, 3))), np.exp(rng.normal(size=(4, 3))), list("abcd"))
    p = tmp_path / f"d.{fmt}"
    write_dataset(d, str(p))
    assert parse_dataset(str(p)) == d


def test_ids_with_commas_survive(tmp_path):
    d = Dataset.from_arrays([[1, 2]], [[3, 4]], ['x,"y"'])
    p = tmp_path / "d.csv"
    write_dataset(d, str(p))
    assert parse_dataset(str(p)).labels == ['x,"y"']


def test_check_violating():
    code, rep = run_json("check", "--harp", DATA / "violating.csv")
    assert code == 1
    assert rep["verdict"]["witness"] == [1, 2]
    assert rep["verdict"]["cycle_sum"] == pytest.approx(-3.238, abs=1e-3)
    assert rep["tolerance"] == 1e-9 and rep["seed"] == 0


@pytest.mark.parametrize("method", ["--harp", "--garp", "--brute-force"])
def test_check_satisfying_and_single(method):
    assert run("check", method, DATA / "swapped.csv")[0] == 0
    assert run("check", method, DATA / "single.json")[0] == 0


def test_check_zero_quantity_exit_2(capsys):
    code, _ = run("check", DATA / "invalid" / "zero_quantity.csv")
    assert code == 2
    assert "row 2, column 2" in capsys.readouterr().err


def test_check_missing_file():
    assert run("check", "/nonexistent/file.csv")[0] == 2


def test_brute_force_cap(tmp_path):
    d = Dataset.from_arrays(np.ones((9, 2)), np.ones((9, 2)))
    p = tmp_path / "big.csv"
    write_dataset(d, str(p))
    assert run("check", "--brute-force", p)[0] == 2
    assert run("check", "--harp", p)[0] == 0


def test_three_cycle_witness():
    code, rep = run_json("check", DATA / "three_cycle.json")
    assert code == 1
    assert sorted(rep["verdict"]["witness"]) == [1, 2, 3]


def test_tolerance_env_and_flag():
    assert run("check", DATA / "three_cycle.csv", env={"REVPREF_TOLERANCE": "0.5"})[0] == 0
    assert run("check", DATA / "three_cycle.csv", "--tolerance", "0.5")[0] == 0
    code, rep = run_json("check", DATA / "three_cycle.csv", env={"REVPREF_TOLERANCE": "0.5"})
    assert rep["tolerance"] == 0.5
    assert run("check", DATA / "three_cycle.csv", env={"REVPREF_TOLERANCE": "x"})[0] == 2


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["check", "--harp", "--garp", str(DATA / "single.csv")])
    assert exc.value.code == 2


def test_utility_homogeneous_cobb_douglas():
    code, rep = run_json("utility", "--homogeneous", DATA / "cobb_douglas_pair.csv", "--verify-samples", 200)
    assert code == 0
    assert rep["utility_at_data"] == pytest.approx([1.0, 0.75], abs=1e-12)
    assert rep["verification"]["passed"]
    assert rep["verification"]["samples"] == 200


@pytest.mark.parametrize("cert", ["lp", "homogeneous"])
def test_utility_afriat(cert):
    code, rep = run_json("utility", "--afriat", "--certificate", cert, DATA / "cobb_douglas_pair.json")
    assert code == 0
    assert rep["afriat_residual"] <= 1e-9
    assert min(rep["multipliers"]) > 0


@pytest.mark.parametrize("model", ["--homogeneous", "--afriat"])
def test_utility_violating(model):
    code, rep = run_json("utility", model, DATA / "violating.csv")
    assert code == 1
    assert rep["verdict"]["witness"] == [1, 2]


def test_transport_violating():
    code, rep = run_json("transport", "--diagonal-check", DATA / "violating.csv")
    assert code == 1
    assert rep["identity_value"] == pytest.approx(np.log(10201), rel=1e-11)
    assert rep["optimal_value"] == pytest.approx(np.log(400), rel=1e-11)
    assert rep["optimal_permutation"] == [2, 1]
    assert rep["cost_decomposition_residual"] <= 1e-12


def test_transport_satisfying_and_single():
    assert run("transport", DATA / "swapped.csv")[0] == 0
    assert run("transport", DATA / "single.csv")[0] == 0


def test_transport_instance_solve():
    code, rep = run_json("transport", "--solve", DATA / "instance_weighted.json")
    assert code == 0
    assert rep["marginal_error"] <= 1e-12
    assert rep["duals"]["dual_value"] == pytest.approx(rep["optimal_value"], abs=1e-9)
    assert rep["duals"]["feasibility_gap"] <= 1e-9
    assert run("transport", "--diagonal-check", DATA / "instance_weighted.json")[0] == 2


def test_generate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("generate", "--cobb-douglas", "-n", 2, "-m", 2, "--seed", 7, "--out", a)[0] == 0
    assert run("generate", "--cobb-douglas", "-n", 2, "-m", 2, "--seed", 7, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run("check", "--harp", a)[0] == 0


def test_generate_to_stdout_matches_file(tmp_path):
    out = tmp_path / "g.json"
    run("generate", "--ces", "--rho", "-2", "-n", 4, "-m", 3, "--seed", 1, "--out", out)
    code, text = run("generate", "--ces", "--rho", "-2", "-n", 4, "-m", 3, "--seed", 1, "--output-format", "json")
    assert code == 0 and text == out.read_text()


def test_generate_invalid_parameters():
    assert run("generate", "--cobb-douglas", "--alpha", "0.5,0.6")[0] == 2
    assert run("generate", "--ces", "--rho", "1.0")[0] == 2
    assert run("generate", "--inject-violation")[0] == 2
    assert run("generate", "--inject-violation", "--input", DATA / "single.csv")[0] == 2


def test_inject_violation_fails_check(tmp_path):
    failures = 0
    for seed in range(40):
        g, bad = tmp_path / f"g{seed}.csv", tmp_path / f"b{seed}.csv"
        run("generate", "--cobb-douglas", "-n", 5, "-m", 3, "--seed", seed, "--out", g)
        run("generate", "--inject-violation", "--input", g, "--seed", seed, "--out", bad)
        failures += run("check", "--harp", bad)[0] == 1
    assert failures >= 38


def test_fields_default_pass():
    code, rep = run_json("fields")
    assert code == 0 and rep["result"] == "PASS"
    assert len(rep["path_integral"]["paths"]) == 3


def test_fields_non_potential_fail():
    assert run("fields", "--field", "non-potential")[0] == 1


def test_fields_constant_path_zeros():
    code, rep = run_json("fields", "--constant-path")
    assert code == 0
    assert rep["path_integral"]["paths"][0]["sums"] == [0.0, 0.0]


def test_fields_inverse_demand():
    code, rep = run_json("fields", "--inverse-demand", "--alpha", "0.2,0.3,0.5")
    assert code == 0 and rep["inverse_demand"]["points"] == 50
    assert run("fields", "--inverse-demand", "--field", "non-potential")[0] == 2


def test_fields_custom_n_and_loops():
    code, rep = run_json("fields", "--N", "50,500,5000", "--loops", 5, "--seed", 3)
    assert code == 0
    assert all(len(p["sums"]) == 3 for p in rep["path_integral"]["paths"])
    assert len(rep["path_integral"]["paths"]) == 5


def test_json_reports_byte_identical():
    for argv in (["check", DATA / "ces_n6.csv"], ["utility", DATA / "cobb_douglas_n6.json"], ["fields"]):
        assert run(*argv, "--format", "json")[1] == run(*argv, "--format", "json")[1]


def test_report_numbers_have_12_digits():
    _, text = run("transport", DATA / "violating.csv", "--format", "json")
    rep = json.loads(text)
    assert rep["identity_value"] == float(f"{np.log(10201):.12g}")
    _, human = run("transport", DATA / "violating.csv")
    assert "identity_value: 9.23024\n" in human


def test_batch_out_dir(tmp_path):
    files = [DATA / f"{s}.csv" for s in ("violating", "swapped", "single")] + [DATA / "invalid" / "ragged.csv"]
    code, _ = run("check", *files, "--jobs", 3, "--out-dir", tmp_path, "--format", "json")
    assert code == 2
    reports = {p.name: json.loads(p.read_text()) for p in tmp_path.glob("*.json")}
    assert reports["violating.check.json"]["result"] == "VIOLATED"
    assert reports["swapped.check.json"]["result"] == "RATIONALIZABLE"
    assert "row 2" in reports["ragged.check.json"]["error"]
    assert not list(tmp_path.glob("*.tmp"))


def test_batch_stdout_json():
    code, rep = run_json("check", DATA / "swapped.csv", DATA / "single.csv", "--jobs", 2)
    assert code == 0
    assert [r["input"] for r in rep["reports"]] == [str(DATA / "swapped.csv"), str(DATA / "single.csv")]


@pytest.mark.parametrize("stem", PAIRS)
def test_csv_json_agree(stem):
    for argv in (["check", "--harp"], ["check", "--garp"], ["transport"], ["utility", "--verify-samples", "50"]):
        c1, r1 = run_json(*argv, DATA / f"{stem}.csv")
        c2, r2 = run_json(*argv, DATA / f"{stem}.json")
        assert c1 == c2
        r1.pop("input"), r2.pop("input")
        assert r1 == r2


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "revpref", "check", str(DATA / "violating.csv")], capture_output=True, text=True
    )
    assert out.returncode == 1
    assert out.stdout.startswith("VIOLATED")
