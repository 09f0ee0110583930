"""Closed-form performance metrics for the FTP and ATP access schemes.

Everything in this module is a pure function of :class:`NetworkParams` plus a
scheme configuration: operable probability, transmitter density, BS and D2D
outage probabilities, and the average achievable D2D sum-rate. The adaptive
scheme couples its operable and transmit probabilities through a fixed point,
solved in :func:`atp_solve`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import disk_pair_distance_pdf
from .model import ATPConfig, FTPConfig, NetworkParams, SchemeConfig, xi
from .numerics import ChebyshevGrid, chebyshev_grid, integrate_semi_infinite, \
    solve_fixed_point

DEFAULT_QUADRATURE_ORDER = 100


@dataclass(frozen=True)
class SchemeDerived:
    """Derived scheme quantities: probabilities, density, protection geometry.

    ``protection_radius_m`` and ``w_constant`` are zero for the fixed scheme.
    """

    operable_prob: float
    transmit_prob: float
    active_density_per_m2: float
    protection_radius_m: float = 0.0
    w_constant: float = 0.0


@dataclass(frozen=True)
class OutageCurve:
    """Outage probability sampled on a grid of linear SINR thresholds."""

    thresholds: np.ndarray
    probabilities: np.ndarray


@dataclass(frozen=True)
class MetricsReport:
    """Analytical or empirical metrics bundle for one parameter point."""

    mode: str  # "analysis" | "simulation"
    derived: SchemeDerived
    bs_outage: OutageCurve
    d2d_outage: OutageCurve
    sum_rate: float
    pi_o_stderr: float = 0.0
    p_t_stderr: float = 0.0
    sum_rate_stderr: float = 0.0
    bs_outage_stderr: np.ndarray = field(default_factory=lambda: np.zeros(0))
    d2d_outage_stderr: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_slot_samples: int = 0
    n_pair_samples: int = 0


def _operable_prob(params: NetworkParams, consumption_mw: float) -> float:
    """Long-run probability that the battery clears the energy threshold.

    ``consumption_mw`` is the expected energy spent per slot by a device that
    is always operable; the result is the renewal-average of min(1, harvest
    rate / consumption rate) over the uniform device position in the cell.
    """
    alpha = params.path_loss_exponent
    R = params.cell_radius_m
    mu = params.harvest_efficiency * params.bs_power_mw / consumption_mw
    if mu ** (1.0 / alpha) > R:
        return 1.0
    return (alpha * mu ** (2.0 / alpha) / ((alpha - 2.0) * R ** 2)
            + 2.0 * mu / ((2.0 - alpha) * R ** alpha))


def ftp_operable_prob(params: NetworkParams, p_t: float) -> float:
    """Operable probability under the fixed transmission probability scheme."""
    if not 0.0 < p_t <= 1.0:
        raise ValueError("p_t must lie in (0, 1]")
    return _operable_prob(params, params.d2d_power_mw * p_t)


def ftp_solve(params: NetworkParams, p_t: float) -> SchemeDerived:
    """Bundle the FTP derived quantities for a given transmit probability."""
    pi_o = ftp_operable_prob(params, p_t)
    return SchemeDerived(
        operable_prob=pi_o,
        transmit_prob=p_t,
        active_density_per_m2=params.d2d_density_per_m2 * pi_o * p_t,
    )


def _bs_outage(params: NetworkParams, lambda_t: float, gamma_b: float,
               grid: ChebyshevGrid) -> float:
    """BS outage for a given active-transmitter density (shared by schemes)."""
    if gamma_b < 0.0:
        raise ValueError("gamma_b must be nonnegative")
    alpha = params.path_loss_exponent
    R = params.cell_radius_m
    a = grid.nodes_a
    noise = np.exp(-gamma_b * params.noise_power_mw * a ** alpha
                   / params.cell_user_power_mw)
    interference = np.exp(
        -np.pi * lambda_t * xi(alpha) * a ** 2
        * (params.d2d_power_mw / params.cell_user_power_mw) ** (2.0 / alpha)
        * gamma_b ** (2.0 / alpha))
    total = (np.pi / (R * grid.order)) * np.sum(
        a * np.sqrt(1.0 - grid.nodes_x ** 2) * noise * interference)
    return float(min(1.0, max(0.0, 1.0 - total)))


def ftp_bs_outage(params: NetworkParams, derived: SchemeDerived,
                  gamma_b: float, grid: ChebyshevGrid) -> float:
    """Probability that the uplink SINR at the BS falls below gamma_b."""
    return _bs_outage(params, derived.active_density_per_m2, gamma_b, grid)


def atp_bs_outage(params: NetworkParams, derived: SchemeDerived,
                  gamma_b: float, grid: ChebyshevGrid) -> float:
    """Same functional form as the FTP case with the ATP density substituted."""
    return _bs_outage(params, derived.active_density_per_m2, gamma_b, grid)


def _cellular_interference_factor(params: NetworkParams, gamma_d: float,
                                  grid: ChebyshevGrid) -> float:
    """Chebyshev sum averaging the cellular interferer over its distance pdf."""
    alpha = params.path_loss_exponent
    R = params.cell_radius_m
    b = grid.nodes_b
    desired = params.d2d_power_mw * params.pair_distance_m ** (-alpha)
    terms = (np.sqrt(1.0 - grid.nodes_x ** 2)
             / (1.0 + gamma_d * params.cell_user_power_mw * b ** (-alpha) / desired)
             * disk_pair_distance_pdf(b, R))
    return float((R * np.pi / grid.order) * np.sum(terms))


def ftp_d2d_outage(params: NetworkParams, derived: SchemeDerived,
                   gamma_d: float, grid: ChebyshevGrid) -> float:
    """Probability that a D2D receiver's SINR falls below gamma_d (FTP)."""
    if gamma_d < 0.0:
        raise ValueError("gamma_d must be nonnegative")
    alpha = params.path_loss_exponent
    desired = params.d2d_power_mw * params.pair_distance_m ** (-alpha)
    noise = math.exp(-gamma_d * params.noise_power_mw / desired)
    interference = math.exp(
        -np.pi * derived.active_density_per_m2 * params.pair_distance_m ** 2
        * gamma_d ** (2.0 / alpha) * xi(alpha))
    o2 = _cellular_interference_factor(params, gamma_d, grid)
    return float(min(1.0, max(0.0, 1.0 - noise * interference * o2)))


def protected_interference_integral(params: NetworkParams, gamma_d: float,
                                    r_p: float) -> float:
    """Laplace exponent integral of D2D interference outside the sensing disk.

    Evaluates I = integral_{r_p^2}^inf dv / (1 + r_d^(-alpha) v^(alpha/2) /
    gamma_d); closed arctangent form at alpha = 4, generic quadrature
    otherwise. Collapses to r_d^2 gamma^(2/alpha) Xi(alpha) at r_p = 0.
    """
    if gamma_d == 0.0:
        return 0.0
    alpha = params.path_loss_exponent
    c = params.pair_distance_m ** (-alpha) / gamma_d
    if alpha == 4.0:
        sc = math.sqrt(c)
        return (math.pi / 2.0 - math.atan(sc * r_p ** 2)) / sc
    return integrate_semi_infinite(
        lambda v: 1.0 / (1.0 + c * v ** (alpha / 2.0)), lower=r_p ** 2)


def atp_d2d_outage(params: NetworkParams, derived: SchemeDerived,
                   gamma_d: float, grid: ChebyshevGrid | None = None) -> float:
    """D2D outage under ATP: interferers excluded inside the protection disk."""
    if gamma_d < 0.0:
        raise ValueError("gamma_d must be nonnegative")
    if grid is None:
        grid = chebyshev_grid(DEFAULT_QUADRATURE_ORDER, params.cell_radius_m)
    alpha = params.path_loss_exponent
    desired = params.d2d_power_mw * params.pair_distance_m ** (-alpha)
    noise = math.exp(-gamma_d * params.noise_power_mw / desired)
    protected = protected_interference_integral(
        params, gamma_d, derived.protection_radius_m)
    interference = math.exp(-np.pi * derived.active_density_per_m2 * protected)
    o1 = _cellular_interference_factor(params, gamma_d, grid)
    return float(min(1.0, max(0.0, 1.0 - noise * interference * o1)))


def _rate_integral(outage_fn, rel_tol: float) -> float:
    """Integral of (1 - P_out(x)) / (1 + x) over [0, inf)."""

    def integrand(x):
        success = 1.0 - outage_fn(x)
        return success / (1.0 + x) if success > 1e-9 else 0.0

    return integrate_semi_infinite(integrand, rel_tol=rel_tol)


def ftp_sum_rate(params: NetworkParams, derived: SchemeDerived,
                 grid: ChebyshevGrid, rel_tol: float = 1e-6) -> float:
    """Average achievable D2D sum-rate (bits/s/Hz) for the FTP scheme."""
    lambda_t = derived.active_density_per_m2
    if lambda_t == 0.0:
        return 0.0
    prefactor = lambda_t * np.pi * params.cell_radius_m ** 2 / (2.0 * math.log(2.0))
    return prefactor * _rate_integral(
        lambda x: ftp_d2d_outage(params, derived, x, grid), rel_tol)


def atp_sum_rate(params: NetworkParams, derived: SchemeDerived,
                 grid: ChebyshevGrid | None = None,
                 rel_tol: float = 1e-6) -> float:
    """Average achievable D2D sum-rate for ATP; sensing shortens the slot."""
    lambda_t = derived.active_density_per_m2
    if lambda_t == 0.0:
        return 0.0
    if grid is None:
        grid = chebyshev_grid(DEFAULT_QUADRATURE_ORDER, params.cell_radius_m)
    prefactor = ((1.0 - params.sense_window / 2.0) / 2.0
                 * lambda_t * np.pi * params.cell_radius_m ** 2 / math.log(2.0))
    return prefactor * _rate_integral(
        lambda x: atp_d2d_outage(params, derived, x, grid), rel_tol)


def atp_protection_radius(params: NetworkParams, beta_th: float) -> float:
    """Mean radius of the fading-averaged sensing exclusion disk."""
    if beta_th <= 0.0:
        raise ValueError("beta_th must be positive")
    alpha = params.path_loss_exponent
    return ((params.d2d_power_mw / beta_th) ** (1.0 / alpha)
            * math.gamma(1.0 + 1.0 / alpha))


def atp_w_constant(params: NetworkParams, beta_th: float) -> float:
    """Mean number of sensing-range contenders per unit operable probability."""
    if beta_th <= 0.0:
        raise ValueError("beta_th must be positive")
    alpha = params.path_loss_exponent
    return (2.0 * np.pi * math.gamma(2.0 / alpha) * params.d2d_density_per_m2
            / (alpha * (beta_th / params.d2d_power_mw) ** (2.0 / alpha)))


def atp_transmit_prob(w: float, pi_o: float) -> float:
    """Backoff-contention transmit probability (1 - e^(-W pi_o)) / (W pi_o)."""
    if w < 0.0:
        raise ValueError("w must be nonnegative")
    x = w * pi_o
    if x < 1e-8:
        return 1.0 - x / 2.0  # series limit of (1 - e^-x)/x
    return (1.0 - math.exp(-x)) / x


def atp_solve(params: NetworkParams, beta_th: float,
              tol: float = 1e-12, max_iter: int = 500) -> SchemeDerived:
    """Solve the self-consistent ATP operable probability and bundle results.

    The operable probability satisfies pi = g(pi) where g evaluates the
    closed-form battery renewal average at the consumption rate implied by the
    contention transmit probability at pi. g is nondecreasing and bounded, so
    damped iteration converges; the integral's min(1, .) kink is handled in
    closed form by the same branch split as the fixed scheme.
    """
    w = atp_w_constant(params, beta_th)
    r_p = atp_protection_radius(params, beta_th)
    ts = params.sense_window

    def g(pi: float) -> float:
        p_t = atp_transmit_prob(w, pi)
        consumption = (params.sense_power_mw * ts / 2.0
                       + params.d2d_power_mw * (1.0 - ts / 2.0) * p_t)
        return _operable_prob(params, consumption)

    pi_o = solve_fixed_point(g, tol=tol, max_iter=max_iter)
    p_t = atp_transmit_prob(w, pi_o)
    return SchemeDerived(
        operable_prob=pi_o,
        transmit_prob=p_t,
        active_density_per_m2=params.d2d_density_per_m2 * pi_o * p_t,
        protection_radius_m=r_p,
        w_constant=w,
    )


def scheme_derived(params: NetworkParams, scheme: SchemeConfig) -> SchemeDerived:
    """Dispatch to the appropriate derived-quantity solver for a scheme."""
    if isinstance(scheme, FTPConfig):
        return ftp_solve(params, scheme.p_t)
    if isinstance(scheme, ATPConfig):
        return atp_solve(params, scheme.beta_th_mw)
    raise TypeError(f"unknown scheme configuration: {scheme!r}")


def d2d_outage(params: NetworkParams, scheme: SchemeConfig,
               derived: SchemeDerived, gamma_d: float,
               grid: ChebyshevGrid) -> float:
    """Scheme-dispatching D2D outage."""
    if isinstance(scheme, FTPConfig):
        return ftp_d2d_outage(params, derived, gamma_d, grid)
    return atp_d2d_outage(params, derived, gamma_d, grid)


def sum_rate(params: NetworkParams, scheme: SchemeConfig,
             derived: SchemeDerived, grid: ChebyshevGrid,
             rel_tol: float = 1e-6) -> float:
    """Scheme-dispatching average achievable D2D sum-rate."""
    if isinstance(scheme, FTPConfig):
        return ftp_sum_rate(params, derived, grid, rel_tol)
    return atp_sum_rate(params, derived, grid, rel_tol)


def optimize_beta_th(params: NetworkParams, lo_dbm: float, hi_dbm: float,
                     step_db: float,
                     grid: ChebyshevGrid | None = None) -> tuple[float, float]:
    """Grid sweep of the ATP sum-rate over the protection threshold.

    Returns (best beta_th in dBm, sum-rate at the maximum); ties break toward
    the smaller threshold.
    """
    if step_db <= 0.0:
        raise ValueError("step_db must be positive")
    if hi_dbm < lo_dbm:
        raise ValueError("empty threshold range")
    if grid is None:
        grid = chebyshev_grid(DEFAULT_QUADRATURE_ORDER, params.cell_radius_m)
    n = int(math.floor((hi_dbm - lo_dbm) / step_db + 1e-9)) + 1
    best_dbm, best_rate = lo_dbm, -np.inf
    for i in range(n):
        beta_dbm = lo_dbm + i * step_db
        derived = atp_solve(params, 10.0 ** (beta_dbm / 10.0))
        rate = atp_sum_rate(params, derived, grid)
        if rate > best_rate:
            best_dbm, best_rate = beta_dbm, rate
    return best_dbm, best_rate
