import math

import numpy as np
import pytest

from d2deh.numerics import (ConvergenceError, chebyshev_grid,
                            integrate_semi_infinite, solve_fixed_point)


def test_chebyshev_nodes():
    g = chebyshev_grid(4, 100.0)
    k = np.arange(1, 5)
    assert np.allclose(g.nodes_x, np.cos((2 * k - 1) * np.pi / 8))
    assert np.all((g.nodes_a > 0) & (g.nodes_a < 100.0))
    assert np.all((g.nodes_b > 0) & (g.nodes_b < 200.0))
    with pytest.raises(ValueError):
        chebyshev_grid(0, 100.0)


def test_chebyshev_quadrature_integrates_radial_density():
    # The outage integrals use (pi / (R K)) sum a_k sqrt(1 - x_k^2) f(a_k)
    # to approximate the average of f against the radial density 2r/R^2 on
    # (0, R); with f = 1 the exact value is 1, and the rule's error decays
    # like 1/K^2 (about 1e-4 at K = 64).
    R = 2.0
    g = chebyshev_grid(64, R)
    total = (np.pi / (R * g.order)) * np.sum(g.nodes_a
                                             * np.sqrt(1.0 - g.nodes_x ** 2))
    assert total == pytest.approx(1.0, abs=2e-4)
    g = chebyshev_grid(1000, R)
    total = (np.pi / (R * g.order)) * np.sum(g.nodes_a
                                             * np.sqrt(1.0 - g.nodes_x ** 2))
    assert total == pytest.approx(1.0, abs=1e-6)


def test_integrate_semi_infinite():
    assert integrate_semi_infinite(lambda x: math.exp(-x)) == pytest.approx(1.0, abs=1e-9)
    assert integrate_semi_infinite(lambda x: math.exp(-x), lower=2.0) == \
        pytest.approx(math.exp(-2.0), rel=1e-9)
    # 1 / (1 + x^2) integrates to pi/2.
    assert integrate_semi_infinite(lambda x: 1.0 / (1.0 + x * x)) == \
        pytest.approx(math.pi / 2.0, rel=1e-8)
    with pytest.raises(ValueError):
        integrate_semi_infinite(lambda x: 1.0, rel_tol=0.0)


def test_fixed_point_contraction():
    # x = cos(x) has the Dottie number as its unique fixed point.
    x = solve_fixed_point(math.cos, tol=1e-13)
    assert x == pytest.approx(0.7390851332151607, abs=1e-10)


def test_fixed_point_monotone_map():
    # A typical operability-style map: bounded, nondecreasing.
    g = lambda x: 0.2 + 0.5 * x
    x = solve_fixed_point(g, tol=1e-12)
    assert x == pytest.approx(0.4, abs=1e-10)


def test_fixed_point_failure_raises():
    # A map with no fixed point in [0, 1] after clipping dynamics must raise
    # rather than return silently.
    with pytest.raises(ConvergenceError):
        solve_fixed_point(lambda x: x + 1.0, tol=1e-15, max_iter=5)
