import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Repeat the acceptance-criteria verdict lines at the end of the run."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("=== acceptance criteria ===")
    for line in lines:
        terminalreporter.write_line(line)
