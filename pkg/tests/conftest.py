import pytest

from cuspzeros import forms, lfunc, mollifier

N_MAX = 100_000


@pytest.fixture(scope="session")
def delta_table():
    return lfunc.attach_root_number(forms.build_coeff_table(forms.DELTA, N_MAX))


@pytest.fixture(scope="session")
def f23_table():
    return lfunc.attach_root_number(forms.build_coeff_table(forms.F23, N_MAX))


@pytest.fixture(scope="session")
def delta_mollifier(delta_table):
    return mollifier.build_mollifier(delta_table, 300.0)


@pytest.fixture(scope="session")
def detector_params():
    return mollifier.DetectorParams(0.05, 0.3, 300.0)


_ACCEPTANCE_LINES: list[str] = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _ACCEPTANCE_LINES.extend(v for k, v in report.user_properties if k == "acceptance")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
