"""Point-process sampling on the cell disk and the disk pair-distance density."""

from __future__ import annotations

import numpy as np


def sample_ppp_disk(intensity: float, radius_m: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Sample a homogeneous PPP on a disk centered at the origin.

    Draws the Poisson count first, then places points uniformly (exact
    sampling, no window thinning). Returns an (n, 2) array of coordinates.
    """
    if intensity < 0.0:
        raise ValueError("intensity must be nonnegative")
    if radius_m <= 0.0:
        raise ValueError("radius_m must be positive")
    n = rng.poisson(intensity * np.pi * radius_m ** 2)
    return uniform_disk(n, radius_m, rng)


def uniform_disk(n: int, radius_m: float, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform points on the disk of given radius, as an (n, 2) array."""
    r = radius_m * np.sqrt(rng.random(n))
    theta = rng.random(n) * 2.0 * np.pi
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def place_receiver(tx: np.ndarray, pair_distance_m: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Place one receiver per transmitter at a fixed range, uniform direction.

    ``tx`` is an (n, 2) array (or a single (2,) point); the result has the
    same shape and satisfies |rx - tx| = pair_distance_m exactly.
    """
    if pair_distance_m <= 0.0:
        raise ValueError("pair_distance_m must be positive")
    tx = np.atleast_2d(np.asarray(tx, dtype=float))
    theta = rng.random(tx.shape[0]) * 2.0 * np.pi
    offset = pair_distance_m * np.column_stack((np.cos(theta), np.sin(theta)))
    rx = tx + offset
    return rx[0] if rx.shape[0] == 1 and np.asarray(tx).ndim == 1 else rx


def disk_pair_distance_pdf(r_m, radius_m: float):
    """PDF of the distance between two independent uniform points in a disk.

    f(r) = (2r/R^2) * [(2/pi) arccos(r/2R) - (r/(pi R)) sqrt(1 - r^2/4R^2)]
    on [0, 2R], zero outside. Accepts scalars or arrays.
    """
    if radius_m <= 0.0:
        raise ValueError("radius_m must be positive")
    r = np.asarray(r_m, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("distance must be nonnegative")
    R = radius_m
    inside = r <= 2.0 * R
    rc = np.where(inside, r, 0.0)
    u = rc / (2.0 * R)
    f = (2.0 * rc / R ** 2) * ((2.0 / np.pi) * np.arccos(u)
                               - (rc / (np.pi * R)) * np.sqrt(1.0 - u ** 2))
    f = np.where(inside, f, 0.0)
    return float(f) if np.isscalar(r_m) else f
