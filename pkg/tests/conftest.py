LINES = []


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance")
        for line in sorted(LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
