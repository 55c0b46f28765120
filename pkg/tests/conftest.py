import os
import sys

from hypothesis import HealthCheck, settings

# property tests run with a fixed derandomised profile so reruns are identical
settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

sys.path.insert(0, os.path.dirname(__file__))


# acceptance lines ("criterion N: PASS ...") collected during the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
