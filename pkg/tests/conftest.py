import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the acceptance verdict lines after the run summary."""
    mod = (sys.modules.get("test_acceptance")
           or sys.modules.get("tests.test_acceptance"))
    if mod is None or not getattr(mod, "VERDICTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.VERDICTS:
        terminalreporter.write_line(line)
