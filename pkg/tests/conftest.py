import pytest

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; call it with the outcome once the checks ran."""
    def record(number, title, passed, detail=""):
        ACCEPTANCE_RESULTS[number] = (title, passed, detail)
    return record


def pytest_runtest_makereport(item, call):
    # a criterion whose test raised before recording still gets a FAIL line
    if call.when == "call" and call.excinfo is not None:
        number = getattr(item.function, "criterion_number", None)
        if number is not None:
            title = ACCEPTANCE_RESULTS.get(number, (item.function.__doc__ or item.name,))[0]
            ACCEPTANCE_RESULTS[number] = (title, False, str(call.excinfo.value).splitlines()[0][:120])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        line = f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))
