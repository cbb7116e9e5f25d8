import pytest

_outcomes: dict = {}
_details: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")


@pytest.fixture
def report(request):
    """Attach a one-line detail string to the current acceptance criterion."""
    def add(text):
        _details.setdefault(request.node.nodeid, []).append(str(text))
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _outcomes[item.nodeid] = (mark.args[0], mark.args[1], rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (num, title, outcome) in sorted(_outcomes.items(), key=lambda kv: kv[1][0]):
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        detail = "; ".join(_details.get(nodeid, []))
        terminalreporter.write_line(f"criterion {num:>2} {verdict}  {title}" + (f"  [{detail}]" if detail else ""))
