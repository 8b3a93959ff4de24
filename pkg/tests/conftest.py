import pytest

from frontpulse.model import ModelParams, derive_coefficients


@pytest.fixture
def params():
    return ModelParams(tau=0.17)


@pytest.fixture
def coeffs(params):
    return derive_coefficients(params)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record a ``PASS``/``FAIL`` line for the acceptance summary."""

    def _report(criterion: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        request.config.acceptance_lines.append(line)
        print(line)
        return ok

    return _report
