import os

import pytest
from hypothesis import HealthCheck, settings

from cmthermo.bath import BathModel

settings.register_profile(
    "default", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

BATHS = [
    BathModel.fermionic(),
    BathModel.bosonic("1+"),
    BathModel.bosonic(1.5),
    BathModel.bosonic(2),
    BathModel.bosonic(3),
]


@pytest.fixture(params=BATHS, ids=lambda b: b.label())
def bath(request):
    return request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
