import numpy as np
import pytest

from cartansplit.cutoff import build_cutoff
from cartansplit.geometry import JordanDomain, make_cartan_pair
from cartansplit.iteration import constants


@pytest.fixture(scope="session")
def ellipse():
    return JordanDomain.ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def ellipse_pair(ellipse):
    return make_cartan_pair(ellipse, -0.3, 0.3)


@pytest.fixture(scope="session")
def ellipse_cut(ellipse_pair):
    return build_cutoff(ellipse_pair)


@pytest.fixture(scope="session")
def tau(ellipse):
    # the largest margin allowed by 5 tau <= tau0 = mu / 1024
    return ellipse.min_curvature_radius() / 8 / 1024 / 5


@pytest.fixture(scope="session")
def practical(ellipse_pair, ellipse_cut, tau):
    return constants(ellipse_pair, ellipse_cut, tau, mode="practical")


@pytest.fixture(scope="session")
def certified(ellipse_pair, ellipse_cut, tau):
    return constants(ellipse_pair, ellipse_cut, tau, mode="certified")


@pytest.fixture(scope="session")
def disc_pair():
    return make_cartan_pair(JordanDomain.disc(1.0), -0.3, 0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per criterion; printed in the terminal summary."""
    lines = request.config.stash.setdefault(_LINES, [])

    def record(n, name, ok, detail, elapsed, budget):
        ok = bool(ok) and elapsed <= budget
        line = f"{'PASS' if ok else 'FAIL'} criterion {n} {name}: {detail} [{elapsed:.1f}s / {budget}s]"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
