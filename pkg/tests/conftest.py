import sys
from pathlib import Path

import pytest

from astaxon.synthetic import bundled_corpus
from astaxon.textprep import default_stopwords

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

_criteria = {}


@pytest.fixture(scope="session")
def stoplist():
    return default_stopwords()


@pytest.fixture(scope="session")
def corpus120():
    return bundled_corpus()


@pytest.fixture
def data_dir():
    return DATA


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = _criteria.get(number, (title, True))[1] and report.outcome == "passed"
        _criteria[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title}")
