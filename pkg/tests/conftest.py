import numpy as np
import pytest

from doublephase.exprparse import eval_on_grid, parse_expr
from doublephase.grid import DomainSpec, build_grid
from doublephase.varexp import ExponentField

DEFAULT_G = "2.5+0.2*sin(3*x1)*cos(2*y1)"

_acceptance_lines = []


def exponent(grid, text=DEFAULT_G):
    return ExponentField.from_values(eval_on_grid(parse_expr(text, grid.n, grid.m), grid), grid)


@pytest.fixture(scope="session")
def grid17():
    return build_grid(DomainSpec.box(1, 2, resolution=17))


@pytest.fixture(scope="session")
def grid9():
    return build_grid(DomainSpec.box(1, 2, resolution=9))


@pytest.fixture(scope="session")
def G17(grid17):
    return exponent(grid17)


@pytest.fixture(scope="session")
def G9(grid9):
    return exponent(grid9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    label = marker.args[0] if marker.args else item.name
    _acceptance_lines.append(f"{'PASS' if rep.passed else 'FAIL'}  {label}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def nested_pairs(grid, count, rng, shrink=0.75):
    """Bump pairs ``(u, v)`` with the support of ``v`` inside the inner part of
    the support of ``u``.

    On the support of ``v`` the field ``u`` then stays above
    ``amplitude * cos(pi shrink / 2)^(2N)``, far from the kink of ``|u|^s`` at
    zero, so central differences of the energy at ``h = 1e-5`` are accurate.
    """
    from doublephase.grid import make_bump, random_bumps

    pairs = []
    for b in random_bumps(rng, count, grid.spec):
        inner_r = [shrink * r for r in b.radii]
        c_v = [rng.uniform(c - 0.5 * r, c + 0.5 * r) for c, r in zip(b.center, inner_r)]
        r_v = [0.5 * r for r in inner_r]
        u = make_bump(grid, b.center, b.radii, b.amplitude)
        v = make_bump(grid, c_v, r_v, rng.uniform(-2.0, 2.0))
        pairs.append((u, v))
    return pairs
