import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    import acceptance_lib as acc

    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(acc.line(n, results[n]))
