ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=_order):
        terminalreporter.write_line(line)


def _order(line):
    key = line.split("]", 1)[1].split()[0]
    return (int(key.rstrip("s")) if key[0].isdigit() else 99, key)
