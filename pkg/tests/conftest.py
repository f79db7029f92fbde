import pytest

_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, name): acceptance criterion reported in the summary")


@pytest.fixture
def detail(request):
    """Callable that attaches a one-line measurement to the criterion report."""

    def note(text):
        request.node.user_properties.append(("detail", text))
        print(text)

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.outcome != "passed"):
        return
    num, name = mark.args
    details = "; ".join(v for k, v in item.user_properties if k == "detail")
    if hasattr(rep, "wasxfail"):
        status = "FAIL (known)" if rep.skipped else "PASS (unexpected)"
    else:
        status = "PASS" if rep.passed else "FAIL"
    if status.startswith("FAIL") and call.excinfo is not None:
        msg = str(call.excinfo.value).strip().splitlines()
        details = (details + "; " if details else "") + (msg[0] if msg else call.excinfo.typename)
    _LINES.append(f"criterion {num} [{name}]: {status}" + (f" - {details}" if details else ""))


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
