import numpy as np
import pytest
from numpy.testing import assert_array_equal

from daqp.errors import BadMagic, BadNumber, DimensionMismatch, MissingSection, TriviallyInfeasible
from daqp.harness.fileformat import parse_problem, parse_solution, write_problem, write_solution
from daqp.harness.generator import GeneratorConfig, generate_random
from daqp.solver import Side, solve_qp

PROBLEM = """DAQP 1
# halfspace projection
2 1 0 1
H
1 0
0 1
f
-2 -2
A
1 1
b
1
"""


def assert_same_problem(a, b):
    for name in ("H", "f", "A", "bu", "G", "h"):
        assert_array_equal(getattr(a, name), getattr(b, name))
    if a.bl is None:
        assert b.bl is None
    else:
        assert_array_equal(a.bl, b.bl)


def test_parse_example():
    qp = parse_problem(PROBLEM)
    assert (qp.n, qp.m, qp.me) == (2, 1, 0)
    assert_array_equal(qp.f, [-2.0, -2.0])
    assert_array_equal(qp.bu, [1.0])


def test_round_trip_random_problems():
    for k in range(20):
        cfg = GeneratorConfig(n=1 + k % 5, m=k % 7, me=k % 3 if k % 5 > 1 else 0,
                              kappa=10.0 ** (k % 5), two_sided=bool(k % 2), seed=k)
        qp = generate_random(cfg)
        assert_same_problem(parse_problem(write_problem(qp)), qp)


def test_round_trip_infinite_bounds():
    qp = parse_problem(PROBLEM.replace("b\n1\n", "b\ninf\n"))
    assert np.isinf(qp.bu[0])
    assert_same_problem(parse_problem(write_problem(qp)), qp)


def test_row_count_mismatch():
    text = PROBLEM.replace("A\n1 1\n", "A\n1 1\n0 1\n0 2\n").replace("2 1 0 1", "2 2 0 1")
    with pytest.raises(DimensionMismatch):
        parse_problem(text)


def test_bad_header_and_magic():
    with pytest.raises(BadMagic):
        parse_problem(PROBLEM.replace("DAQP 1", "QP 1"))
    with pytest.raises(DimensionMismatch):
        parse_problem(PROBLEM.replace("2 1 0 1", "2 1 0 3"))
    with pytest.raises(DimensionMismatch):
        parse_problem(PROBLEM.replace("2 1 0 1", "2 one 0 1"))


def test_missing_section():
    with pytest.raises(MissingSection):
        parse_problem(PROBLEM.replace("f\n-2 -2\n", ""))


def test_non_numeric_entries():
    with pytest.raises(BadNumber):
        parse_problem(PROBLEM.replace("-2 -2", "-2 abc"))
    with pytest.raises(BadNumber):
        parse_problem(PROBLEM.replace("1 1", "1 1,5"))
    with pytest.raises(BadNumber):
        parse_solution("DAQP-SOL 1\nx\nnan?\n")
    with pytest.raises(BadNumber):
        parse_solution("DAQP-SOL 1\nx\n1\nworking\nfirst+\n")


def test_crossed_bounds():
    text = PROBLEM.replace("2 1 0 1", "2 1 0 2").replace("b\n1\n", "bl\n2\nbu\n1\n")
    with pytest.raises(TriviallyInfeasible):
        parse_problem(text)


def test_solution_round_trip(box_scalar):
    result = solve_qp(box_scalar)
    sol = parse_solution(write_solution(result), n=1)
    assert_array_equal(sol.x, result.x)
    assert_array_equal(sol.lam, result.lam)
    assert sol.working == [(0, Side.UPPER)]
    ws = sol.working_set(box_scalar.m, box_scalar.me)
    assert ws.order == [0]


def test_solution_errors():
    with pytest.raises(BadMagic):
        parse_solution("DAQP 1\nx\n1\n")
    with pytest.raises(DimensionMismatch):
        parse_solution("DAQP-SOL 1\nx\n1 2\n", n=3)
    with pytest.raises(DimensionMismatch):
        parse_solution("DAQP-SOL 1\nx\n1\nworking\n0\n")
    with pytest.raises(DimensionMismatch):
        parse_solution("DAQP-SOL 1\nx\n1\nworking\n4+\n").working_set(1, 0)
