"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion after the run."""

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        outcome = "PASS" if report.passed else "FAIL"
        _ACCEPTANCE[props["criterion"]] = (outcome, props.get("title", ""), props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        outcome, title, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"[{outcome}] criterion {k:>2}: {title}" + (f" | {detail}" if detail else ""))
