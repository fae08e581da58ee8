import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(problem, rng, amplitude=0.1, modes=2):
    """Smooth random displacement and angles with the Dirichlet datum applied."""
    from magnetolin.mesh import StateFields, apply_dirichlet

    x = problem.grid.nodes
    u = np.zeros_like(x)
    for k in range(1, modes + 1):
        c = rng.normal(size=(2, 2))
        u[:, 0] += c[0, 0] * np.sin(k * np.pi * x[:, 0]) * np.cos(k * np.pi * x[:, 1]) / k
        u[:, 1] += c[1, 1] * np.cos(k * np.pi * x[:, 0]) * np.sin(k * np.pi * x[:, 1]) / k
        u += c[0, 1] * np.sin(k * np.pi * x) / k**2
    phi = rng.uniform(-np.pi, np.pi) + 0.8 * rng.normal(size=len(x))
    state = StateFields(amplitude * u, phi)
    return apply_dirichlet(problem.grid, state, problem.boundary)


@pytest.fixture
def make_state():
    return random_state


def pytest_configure(config):
    config._criteria = {}


@pytest.fixture
def record_criterion(request):
    """Record one pass/fail line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config._criteria[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criteria", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
