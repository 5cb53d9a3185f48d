import math

import numpy as np
import pytest

from holonomy.phase import wrap_angle


def phase_gap(a, b) -> float:
    """Distance on U(1) between two angles or Phase objects."""
    a = getattr(a, "angle", a)
    b = getattr(b, "angle", b)
    return abs(wrap_angle(a - b))


def leggauss_integral(f, a: float, b: float, n: int = 64) -> float:
    """Plain fixed Gauss-Legendre rule from numpy, used as an independent oracle."""
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (b - a) * x + 0.5 * (b + a)
    return float(0.5 * (b - a) * np.sum(w * f(t)))


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line for an acceptance criterion, bypassing capture."""
    def emit(criterion: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        return ok
    return emit


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


TWO_PI = 2.0 * math.pi
