"""Shared parameter types, unit conversions and elementary link functions.

Internal unit conventions used throughout the package:

* power in linear milliwatts,
* distance in meters,
* time in sub-slots (one UL or DL sub-slot has unit duration, so power and
  energy are numerically interchangeable),
* dBm / dB only at configuration boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def dbm_to_mw(x_dbm: float) -> float:
    """Convert a power level in dBm to linear milliwatts."""
    return 10.0 ** (x_dbm / 10.0)


def mw_to_dbm(x_mw: float) -> float:
    """Convert a linear power in mW to dBm. Requires a positive input."""
    if x_mw <= 0.0:
        raise ValueError(f"power must be positive to convert to dBm, got {x_mw}")
    return 10.0 * math.log10(x_mw)


def xi(alpha: float) -> float:
    """Interference constant Gamma(1 - 2/alpha) * Gamma(1 + 2/alpha).

    Appears in every Rayleigh-fading PPP interference exponent. Equals
    (2*pi/alpha) / sin(2*pi/alpha) by the gamma reflection identity.
    Only defined for alpha > 2 (the interference integrals diverge otherwise).
    """
    if alpha <= 2.0:
        raise ValueError(f"path-loss exponent must exceed 2, got {alpha}")
    return math.gamma(1.0 - 2.0 / alpha) * math.gamma(1.0 + 2.0 / alpha)


def path_gain(distance_m, alpha: float):
    """Power-law path gain d^(-alpha). Rejects d = 0 (unbounded model)."""
    import numpy as np

    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("distance must be strictly positive")
    out = d ** (-alpha)
    return float(out) if np.isscalar(distance_m) else out


@dataclass(frozen=True)
class NetworkParams:
    """All physical constants of the cell, in linear internal units.

    ``energy_threshold_mwslots`` defaults to one full-power UL transmission
    (the minimum energy a device needs to transmit once).
    """

    cell_radius_m: float = 100.0
    d2d_density_per_m2: float = 0.01
    pair_distance_m: float = 5.0
    path_loss_exponent: float = 4.0
    bs_power_mw: float = dbm_to_mw(44.0)
    cell_user_power_mw: float = dbm_to_mw(10.0)
    d2d_power_mw: float = dbm_to_mw(-10.0)
    sense_power_mw: float = dbm_to_mw(-30.0)
    noise_power_mw: float = dbm_to_mw(-90.0)
    harvest_efficiency: float = 0.8
    sense_window: float = 0.05
    energy_threshold_mwslots: float = field(default=-1.0)

    def __post_init__(self):
        if self.energy_threshold_mwslots < 0.0:
            object.__setattr__(self, "energy_threshold_mwslots", self.d2d_power_mw)
        for name in ("bs_power_mw", "cell_user_power_mw", "d2d_power_mw",
                     "sense_power_mw", "noise_power_mw"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.cell_radius_m <= 0.0:
            raise ValueError("cell_radius_m must be positive")
        if not 0.0 < self.pair_distance_m < self.cell_radius_m:
            raise ValueError("pair_distance_m must lie in (0, cell_radius_m)")
        if self.path_loss_exponent <= 2.0:
            raise ValueError("path_loss_exponent must exceed 2")
        if self.d2d_density_per_m2 < 0.0:
            raise ValueError("d2d_density_per_m2 must be nonnegative")
        if not 0.0 < self.harvest_efficiency <= 1.0:
            raise ValueError("harvest_efficiency must lie in (0, 1]")
        if not 0.0 <= self.sense_window < 1.0:
            raise ValueError("sense_window must lie in [0, 1)")
        if self.energy_threshold_mwslots <= 0.0:
            raise ValueError("energy_threshold_mwslots must be positive")
        # Sensing must never flip a device from operable to non-operable.
        if self.sense_power_mw * self.sense_window >= self.energy_threshold_mwslots:
            raise ValueError("sensing energy budget must stay below the "
                             "energy threshold (P_s * T_s < E_th)")


@dataclass(frozen=True)
class FTPConfig:
    """Fixed transmission probability scheme: transmit with probability p_t."""

    p_t: float

    def __post_init__(self):
        if not 0.0 < self.p_t <= 1.0:
            raise ValueError("p_t must lie in (0, 1]")


@dataclass(frozen=True)
class ATPConfig:
    """Adaptive scheme: backoff sensing with protection threshold beta_th."""

    beta_th_mw: float

    def __post_init__(self):
        if self.beta_th_mw <= 0.0:
            raise ValueError("beta_th_mw must be positive")


SchemeConfig = FTPConfig | ATPConfig
