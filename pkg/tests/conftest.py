import sys


def _criterion_key(item):
    criterion = item[0]
    return int(criterion.rstrip("abc")), criterion


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(results, key=_criterion_key):
        terminalreporter.write_line(line)
