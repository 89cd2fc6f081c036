import pytest

from solgeom import catalog
from solgeom.sampling import random_points

_VERDICTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, title = mark.args
    ok = rep.passed and _VERDICTS.get(number, (True, title))[0]
    _VERDICTS[number] = (ok, title)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS, key=lambda n: (int(n.rstrip("ab")), n)):
        ok, title = _VERDICTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number:>3}  {title}")


@pytest.fixture(scope="session")
def points50():
    return random_points(50, 0, 3)


@pytest.fixture(scope="session")
def sol():
    return catalog.sol()
