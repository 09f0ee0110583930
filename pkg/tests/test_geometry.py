import numpy as np
import pytest
from scipy import integrate

from d2deh.geometry import (disk_pair_distance_pdf, place_receiver,
                            sample_ppp_disk, uniform_disk)


def test_ppp_count_and_support():
    rng = np.random.default_rng(1)
    counts = [len(sample_ppp_disk(0.01, 50.0, rng)) for _ in range(200)]
    mean = 0.01 * np.pi * 50.0 ** 2
    assert np.mean(counts) == pytest.approx(mean, rel=0.05)
    pts = sample_ppp_disk(0.01, 50.0, rng)
    assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 50.0)


def test_uniform_disk_is_uniform():
    # Radial CDF of a uniform disk point is (r/R)^2.
    rng = np.random.default_rng(2)
    pts = uniform_disk(200_000, 1.0, rng)
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert np.mean(r ** 2) == pytest.approx(0.5, abs=0.005)
    # Fraction inside half the radius is 1/4.
    assert np.mean(r < 0.5) == pytest.approx(0.25, abs=0.005)


def test_place_receiver_distance():
    rng = np.random.default_rng(3)
    tx = uniform_disk(1000, 100.0, rng)
    rx = place_receiver(tx, 5.0, rng)
    d = np.hypot(rx[:, 0] - tx[:, 0], rx[:, 1] - tx[:, 1])
    assert np.allclose(d, 5.0)
    with pytest.raises(ValueError):
        place_receiver(tx, 0.0, rng)


def test_pair_distance_pdf_normalizes():
    R = 100.0
    total, _ = integrate.quad(lambda r: disk_pair_distance_pdf(r, R), 0.0, 2 * R)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert disk_pair_distance_pdf(2 * R + 1.0, R) == 0.0
    with pytest.raises(ValueError):
        disk_pair_distance_pdf(-1.0, R)


def test_pair_distance_pdf_matches_empirical():
    rng = np.random.default_rng(4)
    R = 1.0
    a = uniform_disk(100_000, R, rng)
    b = uniform_disk(100_000, R, rng)
    d = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])
    # Compare the CDF at a few quantile points.
    for q in (0.5, 1.0, 1.5):
        cdf, _ = integrate.quad(lambda r: disk_pair_distance_pdf(r, R), 0.0, q)
        assert np.mean(d <= q) == pytest.approx(cdf, abs=0.01)
