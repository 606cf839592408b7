"""Collects the acceptance criteria outcomes and prints one line per criterion."""

_criteria = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            _criteria.append((value, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed in sorted(_criteria, key=lambda x: int(x[0].split(":")[0])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {label}")
