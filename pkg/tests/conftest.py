import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# acceptance tests tag themselves with record_property("criterion", n) and ("title", ...)
_criteria: dict = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _criteria.get(props["criterion"], (None, "passed"))[1]
        outcome = report.outcome if prev == "passed" else prev
        _criteria[props["criterion"]] = (props.get("title", ""), outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        title, outcome = _criteria[num]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {title}")
