import numpy as np
import pytest

from dptune import fixtures
from dptune.learners import TrainSet


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    fixtures.write_fixtures(out)
    return out


@pytest.fixture(scope="session")
def corpus():
    return fixtures.generate_corpus()


def blobs(n=60, d=4, seed=0, shift=1.5):
    """Two Gaussian classes separated along every axis."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    x = rng.normal(size=(n, d)) + shift * y[:, None]
    return TrainSet(x, y)


_CRITERIA: dict[int, tuple[str, str, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    # A setup error counts as a failure; a passing setup is overwritten by the call phase.
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA[number] = (title, "PASS" if rep.passed else "FAIL", call.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, verdict, secs = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2} {verdict}  {title} ({secs:.1f}s)")
