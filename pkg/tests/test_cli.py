from daqp.harness.cli import EXIT_FAILURE, EXIT_INFEASIBLE, EXIT_OPTIMAL, main
from daqp.harness.fileformat import parse_problem, parse_solution, write_problem


def write(tmp_path, name, qp):
    path = tmp_path / name
    path.write_text(write_problem(qp))
    return str(path)


def test_solve_and_check(tmp_path, capsys, two_constraint):
    problem = write(tmp_path, "qp.txt", two_constraint)
    out = str(tmp_path / "qp.sol")
    assert main(["solve", problem, "--out", out]) == EXIT_OPTIMAL
    printed = capsys.readouterr().out
    assert "status Optimal" in printed
    assert "iterations 3" in printed
    assert parse_solution((tmp_path / "qp.sol").read_text(), n=2).working

    assert main(["solve", problem, "--warm", out]) == EXIT_OPTIMAL
    assert "iterations 1" in capsys.readouterr().out

    assert main(["check", problem, out]) == EXIT_OPTIMAL
    lines = dict(line.split() for line in capsys.readouterr().out.splitlines())
    assert float(lines["stationarity"]) <= 1e-12


def test_solve_infeasible(tmp_path, infeasible_scalar):
    assert main(["solve", write(tmp_path, "bad.txt", infeasible_scalar)]) == EXIT_INFEASIBLE


def test_solve_prox(tmp_path, capsys, halfspace):
    assert main(["solve", write(tmp_path, "qp.txt", halfspace), "--prox", "--eps", "0.01"]) == EXIT_OPTIMAL
    assert "outer_iterations" in capsys.readouterr().out


def test_iteration_limit_exit_code(tmp_path, two_constraint):
    assert main(["solve", write(tmp_path, "qp.txt", two_constraint), "--iter-max", "1"]) == EXIT_FAILURE


def test_format_error(tmp_path, capsys):
    path = tmp_path / "broken.txt"
    path.write_text("not a problem\n")
    assert main(["solve", str(path)]) == EXIT_FAILURE
    assert capsys.readouterr().err.startswith("error:")


def test_gen_bench_seq(tmp_path):
    problem = tmp_path / "gen.txt"
    assert main(["gen", "--n", "3", "--m", "4", "--seed", "5", "--out", str(problem)]) == EXIT_OPTIMAL
    qp = parse_problem(problem.read_text())
    assert (qp.n, qp.m) == (3, 4)

    csv_path = tmp_path / "bench.csv"
    summary = tmp_path / "summary.csv"
    args = ["bench", "--kappa", "10", "--count", "2", "--n", "3", "--m", "4", "--repeat", "1",
            "--seed", "1", "--out", str(csv_path), "--summary", str(summary)]
    assert main(args) == EXIT_OPTIMAL
    assert len(csv_path.read_text().splitlines()) == 5
    assert summary.read_text().startswith("variant,kappa")

    seq = tmp_path / "seq.csv"
    assert main(["seq", str(problem), "--steps", "3", "--scale", "0", "--out", str(seq)]) == EXIT_OPTIMAL
    assert len(seq.read_text().splitlines()) == 4


def test_malformed_number(tmp_path, capsys, halfspace):
    path = tmp_path / "typo.txt"
    path.write_text(write_problem(halfspace).replace("-2 -2", "-2 abc"))
    assert main(["solve", str(path)]) == EXIT_FAILURE
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "abc" in err


def test_prox_rejects_warm_start(tmp_path, capsys, two_constraint):
    problem = write(tmp_path, "qp.txt", two_constraint)
    out = str(tmp_path / "qp.sol")
    assert main(["solve", problem, "--out", out]) == EXIT_OPTIMAL
    capsys.readouterr()
    assert main(["solve", problem, "--prox", "--warm", out]) == EXIT_FAILURE
    assert "--prox" in capsys.readouterr().err
