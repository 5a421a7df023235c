from hypothesis import settings

# fixed seed so the property suite is reproducible
settings.register_profile("singmod", derandomize=True, deadline=None, max_examples=40)
settings.load_profile("singmod")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
