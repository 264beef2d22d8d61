import sys


def pytest_runtest_logreport(report):
    # one visible line per acceptance check, even under -q
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    status = "PASSED" if report.passed else "FAILED"
    print(f"\n[acceptance] {name}: {status}", file=sys.stderr)
