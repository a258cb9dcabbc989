import sys

import numpy as np
import pytest

from ancf_bridge import BezierSurface, BSplineSurface

THREE_SPAN_KNOTS_U = [0, 0, 0, 0, 1, 1, 1, 1]
THREE_SPAN_KNOTS_V = [0, 0, 0, 0, 0.4, 0.7, 1, 1, 1, 1]


def random_bezier(rng, m, n, scale=10.0):
    return BezierSurface(rng.uniform(-scale, scale, (m + 1, n + 1, 3)))


def random_knots(rng, degree, n_ctrl, lo=0.0, hi=1.0, min_gap=0.02):
    """Clamped knot vector with well-separated random interior knots."""
    n_int = n_ctrl - degree - 1
    while True:
        interior = np.sort(rng.uniform(lo, hi, n_int))
        pts = np.r_[lo, interior, hi]
        if n_int == 0 or np.diff(pts).min() > min_gap * (hi - lo):
            break
    return np.r_[[lo] * (degree + 1), interior, [hi] * (degree + 1)]


def random_bspline(rng, k, l, n_int_u=None, n_int_v=None, scale=10.0):
    n_int_u = rng.integers(1, 5) if n_int_u is None else n_int_u
    n_int_v = rng.integers(1, 5) if n_int_v is None else n_int_v
    nu, nv = k + 1 + n_int_u, l + 1 + n_int_v
    return BSplineSurface(
        k, l, random_knots(rng, k, nu), random_knots(rng, l, nv), rng.uniform(-scale, scale, (nu, nv, 3))
    )


def three_span_surface():
    """Bicubic surface with one u-span and three v-spans and a wavy 4x6 net."""
    i, j = np.meshgrid(np.arange(4), np.arange(6), indexing="ij")
    net = np.stack([i / 3.0, j / 5.0, 0.3 * np.sin(1.3 * i) * np.cos(0.9 * j) + 0.05 * i * j], axis=-1)
    return BSplineSurface(3, 3, THREE_SPAN_KNOTS_U, THREE_SPAN_KNOTS_V, net)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def three_span():
    return three_span_surface()


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts, one line per criterion, at the end of the run."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
