import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.fixture
def measured(request):
    """Attach measured values to the acceptance line printed at the end of the run."""
    notes = []
    request.node.user_properties.append(("measured", notes))
    return notes.append


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return rep
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        notes = next((v for k, v in item.user_properties if k == "measured"), [])
        if rep.skipped:
            status = "SKIP"
        else:
            status = "PASS" if rep.passed else "FAIL"
        _RESULTS[number] = (status, title, "; ".join(notes))
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title, notes = _RESULTS[number]
        line = f"{status} criterion {number}: {title}"
        if notes:
            line += f" | {notes}"
        terminalreporter.write_line(line)
