"""Collect one pass/fail line per acceptance criterion and print them at the end."""

_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _RESULTS[props["criterion"]] = (report.passed, props.get("summary", ""))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        passed, summary = _RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if passed else 'FAIL'}  {summary}")
