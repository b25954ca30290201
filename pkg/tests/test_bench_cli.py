import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from mlpagerank import random_problem, serialize_problem
from mlpagerank.bench import (CSV_HEADER, BenchRecord, performance_profile,
                              profile_to_csv, random_instances, read_records, records_to_csv,
                              run_benchmark, solve_with)
from mlpagerank.cli import main
from mlpagerank.perron import deflate


@pytest.fixture
def scalar_file(tmp_path):
    path = tmp_path / "one.mlpr"
    path.write_text("1\n1.0\n1.0\n")
    return path


def run_cli(*argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def parse_output(out):
    return dict(line.split(": ", 1) for line in out.strip().splitlines())


# -- solve -------------------------------------------------------------------

def test_solve_scalar_pn(scalar_file, capsys):
    code, out, _ = run_cli("solve", "--tensor", scalar_file, "--alpha", 0.9, "--method", "pn",
                           capsys=capsys)
    fields = parse_output(out)
    assert code == 0
    assert fields["status"] == "converged"
    assert float(fields["x"]) == pytest.approx(1.0)


def test_solve_subcritical_perron_is_input_error(scalar_file, capsys):
    code, _, err = run_cli("solve", "--tensor", scalar_file, "--alpha", 0.4, "--method", "p",
                           capsys=capsys)
    assert code == 2
    assert "supercritical" in err


def test_solve_unknown_method(scalar_file, capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve", "--tensor", str(scalar_file), "--alpha", "0.9", "--method", "zz"])
    assert info.value.code == 2


def test_solve_missing_file(tmp_path, capsys):
    code, _, err = run_cli("solve", "--tensor", tmp_path / "nope.mlpr", "--alpha", 0.9,
                           "--method", "n", capsys=capsys)
    assert code == 2 and "nope" in err


def test_solve_bad_file(tmp_path, capsys):
    path = tmp_path / "bad.mlpr"
    path.write_text("2\n0.5 0.25 0 0.25\n0.5 0.25 1 0.75\n0.3 0.7\n")
    code, _, err = run_cli("solve", "--tensor", path, "--alpha", 0.9, "--method", "n",
                           capsys=capsys)
    assert code == 2 and "column 1" in err


def test_solve_history_length(tmp_path, capsys):
    path = tmp_path / "p.mlpr"
    path.write_text(serialize_problem(random_problem(4, 3)))
    code, out, _ = run_cli("solve", "--tensor", path, "--alpha", 0.9, "--method", "n",
                           "--history", "--x0", "uniform", capsys=capsys)
    fields = parse_output(out)
    assert code == 0
    assert len(fields["history"].split()) == int(fields["iterations"]) > 0


def test_solve_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "p.mlpr"
    path.write_text(serialize_problem(random_problem(4, 3)))
    code, out, _ = run_cli("solve", "--tensor", path, "--alpha", 0.99, "--method", "f",
                           "--max-iter", 2, capsys=capsys)
    assert code == 1
    assert parse_output(out)["status"] == "max_iter_exceeded"


def test_solve_x0_file_and_continuation(tmp_path, capsys):
    path = tmp_path / "p.mlpr"
    path.write_text(serialize_problem(random_problem(3, 3)))
    x0 = tmp_path / "x0.txt"
    x0.write_text("0.2 0.3 0.5\n")
    code, out, _ = run_cli("solve", "--tensor", path, "--alpha", 0.99, "--method", "pn-ext",
                           "--x0", x0, "--tau", 0.001, capsys=capsys)
    assert code == 0
    assert int(parse_output(out)["stages"]) > 2


def test_module_entry_point(scalar_file):
    proc = subprocess.run([sys.executable, "-m", "mlpagerank", "solve", "--tensor",
                           str(scalar_file), "--alpha", "0.9", "--method", "p"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "status: converged" in proc.stdout


# -- benchmark ---------------------------------------------------------------

def test_iteration_conventions():
    p = random_problem(4, 5, alpha=0.99)
    rep, its, _ = solve_with("pn", p)
    assert its == rep.iterations + deflate(p).newton_iterations
    rep, its, trace = solve_with("pn-t1", p)
    assert its == trace.total_inner_iterations
    rep, its, _ = solve_with("f", p)
    assert its == rep.iterations


def test_empty_directory(tmp_path):
    records = run_benchmark(tmp_path, [0.9], ["n", "pn"])
    assert records == []
    assert records_to_csv(records) == ",".join(CSV_HEADER) + "\n"


def test_single_scalar_problem(tmp_path):
    (tmp_path / "one.mlpr").write_text("1\n1.0\n1.0\n")
    records = run_benchmark(tmp_path, [0.9], ["n", "pn"])
    assert [(r.problem_id, r.method) for r in records] == [("one", "n"), ("one", "pn")]
    assert all(r.converged for r in records)


def test_failures_are_recorded_not_raised():
    inst = {"sub": random_problem(3, 1)}
    records = run_benchmark(inst, [0.4], ["f", "p", "pn-t1"])
    by = {r.method: r for r in records}
    assert by["f"].converged
    assert by["p"].status.startswith("error:") and math.isnan(by["p"].iterations)
    row = dict(zip(CSV_HEADER, by["p"].as_row()))
    assert row["iterations"] == ""


def test_sweep_shape_and_determinism(monkeypatch):
    monkeypatch.delenv("MLPR_SEED", raising=False)
    inst = random_instances(29, seed=3)
    assert {p.n for p in inst.values()} == {3, 4, 6}
    methods = ["f", "n", "pn", "pn-t1", "pn-ext"]
    records = run_benchmark(inst, [0.99], methods)
    assert len(records) == 29 * len(methods)
    fails = {m: sum(not r.converged for r in records if r.method == m) for m in methods}
    assert fails["pn-t1"] <= fails["f"] and fails["pn-ext"] <= fails["f"]
    strip = lambda rs: [r.as_row()[:5] for r in rs]  # noqa: E731
    assert strip(run_benchmark(inst, [0.99], methods)) == strip(records)


def test_parallel_matches_serial():
    inst = random_instances(4, seed=1)
    a = run_benchmark(inst, [0.9], ["n", "pn"], jobs=1)
    b = run_benchmark(inst, [0.9], ["n", "pn"], jobs=2)
    assert [r.as_row()[:5] for r in a] == [r.as_row()[:5] for r in b]


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("MLPR_SEED", "77")
    a = random_instances(3, seed=1)
    b = random_instances(3, seed=2)
    assert all(a[k] == b[k] for k in a)


def test_csv_round_trip():
    records = run_benchmark(random_instances(2, seed=0), [0.9], ["f", "pn"])
    back = read_records(io.StringIO(records_to_csv(records)))
    assert [r.as_row() for r in back] == [r.as_row() for r in records]


def test_bench_cli_writes_csv_and_profile(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MLPR_SEED", "5")
    out, prof = tmp_path / "r.csv", tmp_path / "p.csv"
    code, _, _ = run_cli("bench", "--random", 3, "--alphas", "0.9,0.99", "--methods", "n,pn",
                         "--out", out, "--profile", prof, capsys=capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 * 2 * 2
    prof_rows = list(csv.reader(prof.open()))
    assert prof_rows[0] == ["ratio", "n", "pn"]
    code, text, _ = run_cli("profile", out, "--measure", "time", capsys=capsys)
    assert code == 0 and text.startswith("ratio,n,pn")


def test_bench_directory_cli(tmp_path, capsys):
    (tmp_path / "a.mlpr").write_text(serialize_problem(random_problem(3, 1)))
    code, text, _ = run_cli("bench", tmp_path, "--alphas", "0.9", "--methods", "p",
                            capsys=capsys)
    assert code == 0
    assert text.splitlines()[1].startswith("a,0.9,p,converged")


def test_generate_cli(tmp_path, capsys):
    path = tmp_path / "g.mlpr"
    assert run_cli("generate", "--n", 3, "--seed", 4, "--out", path, capsys=capsys)[0] == 0
    assert path.read_text() == serialize_problem(random_problem(3, 4))


# -- performance profiles ----------------------------------------------------

def rec(pid, method, its):
    status = "converged" if its is not None else "max_iter_exceeded"
    return BenchRecord(pid, 0.9, method, status, float("nan") if its is None else its, 0.1, 0.0)


def test_profile_single_method():
    grid, curves = performance_profile([rec("a", "n", 3), rec("b", "n", None), rec("c", "n", 5)])
    assert np.allclose(curves["n"], 2 / 3)


def test_profile_twice_as_slow():
    records = []
    for i in range(5):
        records += [rec(f"p{i}", "n", 3 + i), rec(f"p{i}", "pn", 2 * (3 + i))]
    grid, curves = performance_profile(records)
    assert curves["n"][0] == 1.0
    slow = np.array(curves["pn"])
    assert np.all(slow[grid < 2] == 0) and np.all(slow[grid >= 2] == 1)


def test_profile_properties():
    records = run_benchmark(random_instances(6, seed=2), [0.9, 0.99], ["f", "n", "p", "pn"])
    grid, curves = performance_profile(records)
    assert grid[0] == 1 and grid[-1] == 64
    for m, c in curves.items():
        success = np.mean([r.converged for r in records if r.method == m])
        assert np.all(np.diff(c) >= 0)
        assert c[-1] <= success + 1e-12
    text = profile_to_csv(grid, curves)
    assert len(text.splitlines()) == len(grid) + 1


def test_profile_rejects_empty():
    with pytest.raises(ValueError):
        performance_profile([])
