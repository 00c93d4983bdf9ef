import numpy as np
import pytest

from gapcopula.families import CopulaParams, Kind, parse_family
from reference_fits import ROWS


def params_for(family, a, b=None):
    if family.kind is Kind.STUDENT_T:
        return CopulaParams(a, nu=b)
    if b is None:
        return CopulaParams(a)
    return CopulaParams(a, delta=b)


# (family, params) at every reference fit
TABLE_FITS = [(parse_family(r[0]), params_for(parse_family(r[0]), r[1], r[2])) for r in ROWS]


def fit_id(case):
    return case[0].key


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
