"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test prints a single ``[PASS]``/``[FAIL]`` line (also when pytest
captures output).  Run ``python tests/test_acceptance.py`` for the lines
alone.
"""

import functools
import sys

import pytest

from currentext.suites import SUITE_FUNCTIONS, SuiteConfig


@functools.lru_cache(maxsize=None)
def suite_result(name):
    return SUITE_FUNCTIONS[name](SuiteConfig(name))


def _select(name, keep=lambda check: True):
    return [c for c in suite_result(name).checks if keep(c)]


CRITERIA = {
    1: ("C5 of the rotated degree-1 instanton is -1/2 mod Z, epsilon = -1, runtime <= 60 s",
        lambda: _select("witten", lambda c: "degree-0" not in c.name)),
    2: ("epsilon = +1 for the rotation of a degree-0 exp-generator map",
        lambda: _select("witten", lambda c: "degree-0" in c.name)),
    3: ("Polyakov-Wiegmann integer gap <= 5e-3 on >= 10 pairs; doubled beta is rejected",
        lambda: _select("polyakov-wiegmann")),
    4: ("descent residuals <= 1e-3 with >= 4x reduction under refinement",
        lambda: _select("descent")),
    5: ("su(2) cochains vanish pointwise to 1e-10 on 20 triples",
        lambda: _select("su2-vanishing")),
    6: ("gamma, beta and alpha cocycle identities and the chi phase gap",
        lambda: _select("mickelsson-cocycle")),
    7: ("extension group law: associativity, identity, inverse, equivariance, normality",
        lambda: _select("extension-law")),
    8: ("commutator matches i omega to 1e-2, exact bracket antisymmetry, Jacobi <= 5e-3",
        lambda: _select("jacobi", lambda c: "closedness" not in c.name)),
    9: ("adjoint action matches the group-law oracle and the bracket; normalization reported",
        lambda: _select("adjoint")),
    10: ("degrees of instantons, additivity and homotopy invariance",
         lambda: _select("degree")),
    11: ("chi on embedded su(2) pairs is +-1 and equals epsilon",
         lambda: _select("restriction")),
}


def _line(number, checks):
    failed = [c for c in checks if not c.passed]
    worst = max(checks, key=lambda c: c.residual / c.tolerance if c.tolerance else c.residual)
    status = "PASS" if checks and not failed else "FAIL"
    detail = f"worst: {worst.name} residual {worst.residual:.3e} tol {worst.tolerance:.1e}"
    if failed:
        detail = f"{len(failed)} failing, first: {failed[0].name} residual {failed[0].residual:.3e}"
    return f"[{status}] criterion {number}: {CRITERIA[number][0]} ({detail})", status == "PASS"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_acceptance_criterion(number, capsys):
    checks = CRITERIA[number][1]()
    line, ok = _line(number, checks)
    with capsys.disabled():
        print("\n" + line, flush=True)
    assert checks, "no checks were produced"
    assert ok, line


def main():
    ok = True
    for number in sorted(CRITERIA):
        line, passed = _line(number, CRITERIA[number][1]())
        print(line, flush=True)
        ok &= passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
