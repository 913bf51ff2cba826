import pytest


def pytest_configure(config):
    config.criterion_lines = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    line = f"{'PASS' if rep.passed else 'FAIL'} criterion {number:>2}: {title}" + (f" [{detail}]" if detail else "")
    item.config.criterion_lines.append((number, line))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "criterion_lines", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
