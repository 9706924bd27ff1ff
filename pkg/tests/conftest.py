import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        head = key[1:].split("[")[0]
        return int(head), key

    for key in sorted(mod.RESULTS, key=order):
        terminalreporter.write_line(mod.RESULTS[key][1])
