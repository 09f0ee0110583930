"""Quadrature grids and solvers backing the closed-form expressions.

Three pieces of machinery live here: the Gauss-Chebyshev node set used by the
finite-interval outage integrals, a semi-infinite integrator for the sum-rate
and protected-interference integrals, and the damped fixed-point solver for
the adaptive scheme's self-consistent operable probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate


class IntegrationError(RuntimeError):
    """Quadrature failed to converge; ``estimate`` holds the partial result."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class ConvergenceError(RuntimeError):
    """Fixed-point iteration exhausted its budget; ``residual`` is |x - g(x)|."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ChebyshevGrid:
    """Gauss-Chebyshev nodes mapped onto (0, R) and (0, 2R).

    ``nodes_x`` are the raw nodes cos((2k-1) pi / 2K); ``nodes_a`` map them
    affinely onto the cell radius interval (0, R) and ``nodes_b`` onto the
    pair-distance support (0, 2R).
    """

    order: int
    nodes_x: np.ndarray
    nodes_a: np.ndarray
    nodes_b: np.ndarray


def chebyshev_grid(order: int, radius_m: float) -> ChebyshevGrid:
    """Build the Chebyshev node set of the given order for a cell radius."""
    if order < 1:
        raise ValueError("quadrature order must be at least 1")
    if radius_m <= 0.0:
        raise ValueError("radius_m must be positive")
    k = np.arange(1, order + 1)
    x = np.cos((2 * k - 1) * np.pi / (2 * order))
    a = 0.5 * radius_m * x + 0.5 * radius_m
    b = radius_m * x + radius_m
    return ChebyshevGrid(order=order, nodes_x=x, nodes_a=a, nodes_b=b)


def integrate_semi_infinite(f, rel_tol: float = 1e-6, lower: float = 0.0) -> float:
    """Integrate a nonnegative integrable function over [lower, infinity).

    The half line is mapped to [0, 1) via x = lower + u/(1-u) with Jacobian
    1/(1-u)^2 and the image integrated adaptively.
    """
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")

    def g(u):
        one_minus = 1.0 - u
        return f(lower + u / one_minus) / one_minus ** 2

    result = integrate.quad(g, 0.0, 1.0, epsabs=1e-12, epsrel=rel_tol,
                            limit=200, full_output=1)
    value = result[0]
    if len(result) > 3:  # scipy appends a message on non-convergence
        raise IntegrationError(
            f"semi-infinite quadrature did not converge: {result[3]}", value)
    return value


def solve_fixed_point(g, tol: float = 1e-12, max_iter: int = 200,
                      damping: float = 0.5, x0: float = 0.5) -> float:
    """Solve x = g(x) for a nondecreasing self-map of [0, 1].

    Damped iteration x <- (1-w) x + w g(x) handles the well-behaved cases;
    bisection on g(x) - x is the fallback for anything the iteration cannot
    contract. The returned x satisfies |x - g(x)| <= tol.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    x = x0
    for _ in range(max_iter):
        gx = g(x)
        if abs(gx - x) <= tol:
            return x
        x = (1.0 - damping) * x + damping * gx
        x = min(1.0, max(0.0, x))

    # Bisection fallback: h(x) = g(x) - x changes sign on [0, 1] for a
    # nondecreasing self-map.
    lo, hi = 0.0, 1.0
    h_lo = g(lo) - lo
    if h_lo <= 0.0:
        return lo if abs(h_lo) <= tol else _raise_convergence(lo, h_lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        h_mid = g(mid) - mid
        if abs(h_mid) <= tol:
            return mid
        if h_mid > 0.0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return _raise_convergence(mid, g(mid) - mid)


def _raise_convergence(x: float, residual: float) -> float:
    raise ConvergenceError(
        f"fixed-point solve stalled at x={x:.6g} with residual {residual:.3g}",
        abs(residual))
