import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entropy_rigidity._kernels import HAVE_NUMBA, birkhoff_sum_distribution, convex_polygon_distance


def regular_polygon(n, centre, radius, phase=0.0):
    t = phase + 2 * np.pi * np.arange(n) / n
    return np.c_[centre[0] + radius * np.cos(t), centre[1] + radius * np.sin(t)]


def test_polygon_distance_known_values():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    for use in (False, True):
        assert abs(convex_polygon_distance(sq, sq + [3, 0], use) - 2) < 1e-14
        assert abs(convex_polygon_distance(sq, sq + [3, 4], use) - np.hypot(2, 3)) < 1e-14
        assert convex_polygon_distance(sq, sq + [0.5, 0], use) < 0


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not importable")
@settings(max_examples=30)
@given(st.integers(3, 64), st.floats(0.5, 5), st.floats(-3, 3), st.floats(0, 6.28))
def test_polygon_kernels_agree(n, dx, dy, phase):
    P = regular_polygon(n, (0, 0), 1.0, phase)
    Q = regular_polygon(n + 1, (2 + dx, dy), 0.7)
    assert abs(convex_polygon_distance(P, Q, True) - convex_polygon_distance(P, Q, False)) < 1e-12


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not importable")
@settings(max_examples=20)
@given(st.integers(0, 2 ** 31), st.integers(1, 40))
def test_sum_distribution_kernels_agree(seed, N):
    rng = np.random.default_rng(seed)
    P = rng.random((3, 3)) + 0.05
    P /= P.sum(axis=1, keepdims=True)
    pi = np.linalg.matrix_power(P, 200)[0]
    W = rng.integers(0, 3, (3, 3))
    a = birkhoff_sum_distribution(P, pi, W, N, True)
    b = birkhoff_sum_distribution(P, pi, W, N, False)
    assert np.max(np.abs(a - b)) < 1e-13
    assert abs(a.sum() - 1) < 1e-12


def test_sum_distribution_of_a_coin():
    p = np.array([[0.5, 0.5], [0.5, 0.5]])
    W = np.array([[0, 1], [0, 1]])
    law = birkhoff_sum_distribution(p, np.array([0.5, 0.5]), W, 4)
    assert np.allclose(law, np.array([1, 4, 6, 4, 1]) / 16)


def test_pure_numpy_flag():
    env = dict(os.environ, ENTROPY_RIGIDITY_PURE_NUMPY="1")
    code = "from entropy_rigidity import _kernels as k; print(k.HAVE_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
