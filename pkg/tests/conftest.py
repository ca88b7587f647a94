import pytest

from fracstep.models import PredatorPreyParams

# (params, R0, P2 or None, marginal alpha or None) for each reference scenario
SCENARIOS = {
    "lost_positivity": (PredatorPreyParams(s=0.2, K=25, q=1, q1=0.1, beta=2, s0=0.5, E=1.3),
                        7.9365, (0.9890, 0.2111), 0.9947),
    "lost_stability": (PredatorPreyParams(s=0.1, K=25, q=1, q1=2, beta=5, s0=0.7, E=0.3),
                       2.4510, (0.3333, 0.1644), 0.9501),
    "dynamical_behavior": (PredatorPreyParams(s=0.1, K=5, q=1, q1=2, beta=5, s0=0.7, E=0.3),
                           2.2727, (0.3333, 0.1556), 0.9587),
    "large_prey_growth": (PredatorPreyParams(s=5, K=5, q=0.1, q1=2, beta=4, s0=0.5, E=0.3),
                          2.2727, (0.3333, 77.7778), 0.6576),
    "high_predation": (PredatorPreyParams(s=0.1, K=5, q=1, q1=2, beta=15, s0=0.7, E=0.3),
                       6.8182, (0.0769, 0.1136), 0.9874),
    "near_P1": (PredatorPreyParams(s=0.5, K=5, q=1, q1=2, beta=0.02, s0=0.7, E=0.3),
                0.0091, None, None),
}


@pytest.fixture(params=sorted(SCENARIOS))
def scenario(request):
    return request.param, SCENARIOS[request.param]


_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA.append((marker.args[0], rep.passed, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, duration in _CRITERIA:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name} ({duration:.2f} s)")
