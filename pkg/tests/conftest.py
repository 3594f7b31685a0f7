import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "askopt",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("askopt")

_CRITERIA = []


@pytest.fixture
def criterion():
    """Report one acceptance criterion's outcome; prints in the summary."""

    def report(name, passed, detail=""):
        _CRITERIA.append((name, bool(passed), detail))
        return bool(passed)

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
