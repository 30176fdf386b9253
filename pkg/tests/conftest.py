import pytest

# filled by test_acceptance through the `criterion` fixture
VERDICTS = []


@pytest.fixture
def criterion():
    def record(number, name, ok, detail, seconds, limit=None):
        timed = limit is None or seconds < limit
        passed = bool(ok and timed)
        limit_txt = f" (limit {limit:g} s)" if limit is not None else ""
        VERDICTS.append(f"{'PASS' if passed else 'FAIL'} {number:>2}. {name}: {detail}; {seconds:.2f} s{limit_txt}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1].rstrip("."))):
            terminalreporter.write_line(line)
