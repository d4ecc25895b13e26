import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("lcqft", max_examples=25, deadline=None)
settings.load_profile("lcqft")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, summary_lines

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in summary_lines():
            terminalreporter.write_line(line)
