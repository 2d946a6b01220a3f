import pytest

from ftbessel import SigmaProfile


@pytest.fixture(scope="session")
def indicator():
    return SigmaProfile.indicator()


@pytest.fixture(scope="session")
def fermi():
    return SigmaProfile.fermi(0.5)


@pytest.fixture(scope="session")
def zero():
    return SigmaProfile.zero()


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
