import pytest

_ACCEPTANCE = []


@pytest.fixture(scope='session')
def acceptance_log():
    """Collects one verdict line per acceptance criterion."""
    def log(number, title, passed, detail=''):
        line = '[{0}] criterion {1}: {2}'.format(
            'PASS' if passed else 'FAIL', number, title)
        if detail:
            line += ' -- ' + detail
        _ACCEPTANCE.append(line)
        print(line)
    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section('acceptance criteria')
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
