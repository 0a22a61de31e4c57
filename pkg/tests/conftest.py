import numpy as np
import pytest

from curvlab.zoo import perturbation, product_spheres, sample_points, sphere


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def s2xs2():
    return product_spheres(2, 1.0, 2, 1.0)


@pytest.fixture(scope="session")
def s2xs2_unequal():
    return product_spheres(2, 1.0, 2, 2.0)


@pytest.fixture(scope="session")
def s4():
    return sphere(4, 1.0)


@pytest.fixture(scope="session")
def pert4():
    m = perturbation(4, 7, 0.02)
    return m, sample_points(m, 6, 0)


ACCEPTANCE_LINES = {}


def record_acceptance(number: int, ok: bool, summary: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {summary}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
