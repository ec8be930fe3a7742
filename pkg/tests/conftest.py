import os

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# (number, name, passed, detail) for each acceptance criterion that ran
ACCEPTANCE = []


@pytest.fixture
def criterion():
    def record(number, name, passed, detail=""):
        ACCEPTANCE.append((number, name, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {name} [{detail}]")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {name} [{detail}]")
