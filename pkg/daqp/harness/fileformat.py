"""Line-oriented text formats for problems and solutions.

Problem file::

    DAQP 1
    n m me sided
    H
    <n rows of n numbers>
    f
    <n numbers>
    A
    <m rows>
    b            (sided = 1)   or   bl / bu   (sided = 2)
    <m numbers>
    G            (only when me > 0)
    <me rows>
    h
    <me numbers>

Lines starting with ``#`` are comments. Numbers are written with 17
significant digits so that a write/parse round trip is exact.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from daqp.core import QProblem
from daqp.errors import BadMagic, BadNumber, DimensionMismatch, MissingSection
from daqp.solver import Side, SolveResult, WorkingSet

MAGIC = "DAQP 1"
SOLUTION_MAGIC = "DAQP-SOL 1"
PROBLEM_SECTIONS = {"H", "f", "A", "b", "bl", "bu", "G", "h"}
SOLUTION_SECTIONS = {"x", "lambda", "nu", "working"}
SIDE_MARK = {Side.UPPER: "+", Side.LOWER: "-"}


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _row(values) -> str:
    return " ".join(_fmt(v) for v in values)


def _numbers(tokens: List[str], name: str) -> List[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise BadNumber(f"section {name}: {exc}") from exc


def _content_lines(text: str) -> List[str]:
    lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


def _sections(lines: List[str], labels) -> Dict[str, List[List[str]]]:
    sections: Dict[str, List[List[str]]] = {}
    current = None
    for line in lines:
        if line in labels:
            current = line
            sections[current] = []
        elif current is None:
            raise MissingSection(f"data before any section label: {line!r}")
        else:
            sections[current].append(line.split())
    return sections


def _matrix(sections, name: str, rows: int, cols: int) -> np.ndarray:
    if name not in sections:
        if rows == 0:
            return np.zeros((0, cols))
        raise MissingSection(f"section {name} is missing")
    data = sections[name]
    if len(data) != rows or any(len(r) != cols for r in data):
        raise DimensionMismatch(
            f"section {name} has {len(data)} rows, expected {rows} rows of {cols} numbers"
        )
    return np.array([_numbers(r, name) for r in data], dtype=float).reshape(rows, cols)


def _vector(sections, name: str, length: int) -> np.ndarray:
    if name not in sections:
        if length == 0:
            return np.zeros(0)
        raise MissingSection(f"section {name} is missing")
    values = _numbers([v for r in sections[name] for v in r], name)
    if len(values) != length:
        raise DimensionMismatch(f"section {name} has {len(values)} numbers, expected {length}")
    return np.array(values, dtype=float)


def write_problem(qp: QProblem) -> str:
    out = [MAGIC, f"{qp.n} {qp.m} {qp.me} {2 if qp.two_sided else 1}", "H"]
    out += [_row(r) for r in qp.H]
    out += ["f", _row(qp.f), "A"]
    out += [_row(r) for r in qp.A]
    if qp.two_sided:
        out += ["bl", _row(qp.bl), "bu", _row(qp.bu)]
    else:
        out += ["b", _row(qp.bu)]
    if qp.me:
        out += ["G"] + [_row(r) for r in qp.G] + ["h", _row(qp.h)]
    return "\n".join(out) + "\n"


def parse_problem(text: str) -> QProblem:
    lines = _content_lines(text)
    if not lines or lines[0].split() != MAGIC.split():
        raise BadMagic(f"expected {MAGIC!r} on the first line")
    if len(lines) < 2:
        raise MissingSection("header line is missing")
    header = lines[1].split()
    try:
        n, m, me, sided = (int(v) for v in header)
    except ValueError as exc:
        raise DimensionMismatch(f"malformed header {lines[1]!r}") from exc
    if sided not in (1, 2):
        raise DimensionMismatch(f"sided must be 1 or 2, got {sided}")

    sections = _sections(lines[2:], PROBLEM_SECTIONS)
    H = _matrix(sections, "H", n, n)
    f = _vector(sections, "f", n)
    A = _matrix(sections, "A", m, n)
    if sided == 2:
        bl = _vector(sections, "bl", m)
        bu = _vector(sections, "bu", m)
    else:
        bl = None
        bu = _vector(sections, "b", m)
    G = _matrix(sections, "G", me, n)
    h = _vector(sections, "h", me)
    return QProblem(H=H, f=f, A=A, bu=bu, bl=bl, G=G, h=h)


# ===== SOLUTIONS =====

@dataclass
class Solution:
    x: np.ndarray
    lam: np.ndarray
    nu: np.ndarray
    working: List[Tuple[int, Side]]

    def working_set(self, m: int, me: int) -> WorkingSet:
        ws = WorkingSet(m, me)
        for i, side in self.working:
            try:
                ws.add(i, side)
            except ValueError as exc:
                raise DimensionMismatch(f"working set: {exc}") from exc
        return ws


def write_solution(result: SolveResult) -> str:
    ws = result.working_set
    out = [
        SOLUTION_MAGIC,
        f"# status {result.status.value} iterations {result.iterations}",
        "x", _row(result.x),
        "lambda", _row(result.lam),
        "nu", _row(result.nu),
        "working", " ".join(f"{i}{SIDE_MARK[ws.side[i]]}" for i in ws.order),
    ]
    return "\n".join(out) + "\n"


def _parse_member(token: str) -> Tuple[int, Side]:
    mark = token[-1]
    if mark not in "+-":
        raise DimensionMismatch(f"working-set entry {token!r} needs a + or - suffix")
    try:
        index = int(token[:-1])
    except ValueError as exc:
        raise BadNumber(f"working-set entry {token!r} has no integer index") from exc
    return index, (Side.UPPER if mark == "+" else Side.LOWER)


def parse_solution(text: str, n: Optional[int] = None) -> Solution:
    lines = _content_lines(text)
    if not lines or lines[0] != SOLUTION_MAGIC:
        raise BadMagic(f"expected {SOLUTION_MAGIC!r} on the first line")
    sections = _sections(lines[1:], SOLUTION_SECTIONS)
    if "x" not in sections:
        raise MissingSection("section x is missing")
    x = np.array(_numbers([v for r in sections["x"] for v in r], "x"))
    if n is not None and x.shape[0] != n:
        raise DimensionMismatch(f"x has {x.shape[0]} entries, expected {n}")
    lam = np.array(_numbers([v for r in sections.get("lambda", []) for v in r], "lambda"))
    nu = np.array(_numbers([v for r in sections.get("nu", []) for v in r], "nu"))
    working = [_parse_member(t) for r in sections.get("working", []) for t in r]
    return Solution(x, lam, nu, working)
