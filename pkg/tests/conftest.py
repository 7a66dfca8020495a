import pytest

from nonlocal_semilinear import (
    Domain,
    GreenKernel,
    SemilinearProblem,
    WeightedMeasure,
    assemble,
    lambda_star,
    make_graded_grid,
    normalize,
)

UNIT = Domain.interval(0.0, 1.0)


@pytest.fixture(scope="session")
def unit():
    return UNIT


@pytest.fixture(scope="session")
def rfl():
    return GreenKernel.rfl(0.25, UNIT)


@pytest.fixture(scope="session")
def sfl():
    return GreenKernel.sfl(0.25, UNIT)


def _op(kernel, n):
    return assemble(kernel, make_graded_grid(kernel.domain, n, 2.0))


@pytest.fixture(scope="session")
def rfl128(rfl):
    return _op(rfl, 128)


@pytest.fixture(scope="session")
def rfl256(rfl):
    return _op(rfl, 256)


@pytest.fixture(scope="session")
def sfl256(sfl):
    return _op(sfl, 256)


@pytest.fixture(scope="session")
def sfl512(sfl):
    return _op(sfl, 512)


@pytest.fixture(scope="session")
def center_mu(rfl):
    return normalize(WeightedMeasure.dirac(0.5), rfl.gamma)


@pytest.fixture(scope="session")
def template256(rfl256, center_mu):
    """RFL s = 1/4 with the normalized center Dirac and p = 1.5 (below p* = 5/3)."""
    return SemilinearProblem(rfl256, 1.5, 0.0, center_mu)


@pytest.fixture(scope="session")
def lam_star256(template256):
    return lambda_star(template256)


# -- acceptance summary ---------------------------------------------------------------

_CRITERIA: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        number, label = name[len("test_criterion_"):].split("_", 1)
        terminalreporter.write_line(f"criterion {int(number):2d} {_CRITERIA[name]}  {label.replace('_', ' ')}")
