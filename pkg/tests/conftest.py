_outcomes: dict[int, tuple[str, str, str]] = {}
_titles: dict[str, tuple[int, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _titles[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    if report.nodeid not in _titles:
        return
    number, title = _titles[report.nodeid]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.skipped:
            reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
            _outcomes[number] = ("SKIP", title, reason.removeprefix("Skipped: "))
        elif report.failed:
            _outcomes[number] = ("FAIL", title, f"{report.duration:.1f}s")
        else:
            _outcomes[number] = ("PASS", title, f"{report.duration:.1f}s")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        status, title, detail = _outcomes[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}  ({detail})")

