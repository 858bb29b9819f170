import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=(HealthCheck.too_slow,))
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=(HealthCheck.too_slow,))
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

# criterion -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
