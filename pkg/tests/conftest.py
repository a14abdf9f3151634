import _report


def pytest_terminal_summary(terminalreporter):
    ids = {r.nodeid for key, reports in terminalreporter.stats.items() if key != "deselected"
           for r in reports if hasattr(r, "nodeid")}
    attempted = [k for k in sorted(_report.TITLES) if any(f"test_criterion_{k:02d}" in i for i in ids)]
    if not attempted:
        return
    terminalreporter.section("acceptance criteria")
    for number in attempted:
        terminalreporter.write_line(_report.line(number))
