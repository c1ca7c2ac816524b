"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

_outcomes: dict[str, object] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        _outcomes.setdefault(report.nodeid, report)
        if report.failed:
            _outcomes[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, rep in sorted(_outcomes.items(), key=lambda kv: kv[0]):
        props = dict(rep.user_properties)
        label = props.get("criterion", nodeid.split("::")[-1])
        status = "PASS" if rep.passed else "FAIL"
        terminalreporter.write_line(f"{status}  {label}  {props.get('detail', '')}".rstrip())
