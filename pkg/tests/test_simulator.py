"""Unit tests of the Monte Carlo machinery at desk scale.

Statistical agreement with the closed forms at acceptance tolerances is
exercised by the acceptance suite; here we test mechanics: reproducibility,
energy accounting, contention blocking, and the SINR assembly.
"""

import numpy as np
import pytest

from d2deh import ATPConfig, FTPConfig, NetworkParams, dbm_to_mw
from d2deh.simulator import (CellRealization, _matern_admission, _trial_rng,
                             estimate_metrics, interference_laplace_mc,
                             make_realization, run_dl_subslot,
                             run_ul_subslot_atp, run_ul_subslot_ftp)

PARAMS = NetworkParams()


def test_make_realization_shapes():
    rng = _trial_rng(1, 0)
    st = make_realization(PARAMS, rng)
    assert st.tx.shape == st.rx.shape
    assert np.all(st.inner)  # cell field: everything inside R
    d = np.hypot(st.rx[:, 0] - st.tx[:, 0], st.rx[:, 1] - st.tx[:, 1])
    assert np.allclose(d, PARAMS.pair_distance_m)
    ext = make_realization(PARAMS, rng, field_mode="extended")
    assert not np.all(ext.inner)
    with pytest.raises(ValueError):
        make_realization(PARAMS, rng, field_mode="torus")


def test_trial_streams_are_reproducible_and_distinct():
    a = _trial_rng(7, 0).random(4)
    b = _trial_rng(7, 0).random(4)
    c = _trial_rng(7, 1).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_harvest_scales_with_distance():
    rng = _trial_rng(2, 0)
    st = make_realization(PARAMS, rng)
    before = st.battery.copy()
    harvested = run_dl_subslot(st, rng)
    assert np.all(harvested >= 0.0)
    assert np.allclose(st.battery - before, harvested)
    # Expected harvest is eta * P_b * d^-alpha: check the ensemble mean on
    # the nearest and farthest device over many slots.
    i_near = int(np.argmax(st.harvest_coeff))
    acc = np.zeros(len(st.tx))
    for _ in range(2000):
        acc += run_dl_subslot(st, rng)
    mean = acc / 2000
    assert mean[i_near] == pytest.approx(st.harvest_coeff[i_near], rel=0.1)


def test_ftp_subslot_energy_accounting():
    rng = _trial_rng(3, 0)
    st = make_realization(PARAMS, rng)
    for _ in range(50):
        run_dl_subslot(st, rng)
    total_before = st.battery.sum()
    out = run_ul_subslot_ftp(st, 0.5, rng)
    assert np.all(out.transmit <= out.operable)
    assert total_before - st.battery.sum() == pytest.approx(out.spent.sum())
    # Transmitters pay exactly one transmission of energy here (batteries
    # are full enough after 50 harvest slots).
    assert out.spent[out.transmit].min() == pytest.approx(PARAMS.d2d_power_mw)


def test_matern_admission_blocking():
    # Two mutually-sensing devices with q = 1: only the smaller mark wins.
    operable = np.array([True, True])
    marks = np.array([0.2, 0.7])
    indptr = np.array([0, 1, 2], dtype=np.int64)
    indices = np.array([1, 0], dtype=np.int64)
    q = np.array([1.0, 1.0])
    out = _matern_admission(operable, marks, indptr, indices, q, 123)
    assert out[0] and not out[1]
    # q = 0 (never heard): both transmit.
    out = _matern_admission(operable, marks, indptr, indices, np.zeros(2), 123)
    assert out[0] and out[1]
    # Non-operable contenders cannot block.
    out = _matern_admission(np.array([False, True]), marks, indptr, indices, q, 123)
    assert not out[0] and out[1]


def test_atp_subslot_contention_thins():
    rng = _trial_rng(4, 0)
    beta = dbm_to_mw(-72.0)
    st = make_realization(PARAMS, rng, beta_th=beta)
    for _ in range(50):
        run_dl_subslot(st, rng)
    out = run_ul_subslot_atp(st, beta, PARAMS.sense_window, rng)
    n_op, n_tx = int(out.operable.sum()), int(out.transmit.sum())
    assert 0 < n_tx < n_op  # sensing must thin, not eliminate
    assert np.all(out.transmit <= out.operable)
    # Backoffs exist exactly for operable devices.
    assert np.all(np.isnan(out.backoffs[~out.operable]))
    assert np.all(~np.isnan(out.backoffs[out.operable]))
    # Rate weights reflect the shortened transmission window.
    assert np.all(out.rate_weights <= 0.5)
    assert np.all(out.rate_weights >= (1.0 - PARAMS.sense_window) / 2.0)


def test_iid_operability_mode():
    rng = _trial_rng(5, 0)
    st = make_realization(PARAMS, rng, field_mode="extended",
                          iid_operable_prob=0.3)
    assert run_dl_subslot(st, rng).sum() == 0.0  # batteries unused
    flags = np.zeros(len(st.tx))
    for _ in range(300):
        out = run_ul_subslot_ftp(st, 0.1, rng)
        flags += out.operable
    assert flags.mean() / 300 == pytest.approx(0.3, abs=0.02)


def test_estimate_metrics_deterministic():
    a = estimate_metrics(PARAMS, FTPConfig(p_t=0.1), 120, 20, 2,
                         [1.0], [1.0], seed=9)
    b = estimate_metrics(PARAMS, FTPConfig(p_t=0.1), 120, 20, 2,
                         [1.0], [1.0], seed=9)
    assert a.derived.operable_prob == b.derived.operable_prob
    assert np.array_equal(a.bs_outage.probabilities, b.bs_outage.probabilities)
    assert a.sum_rate == b.sum_rate
    c = estimate_metrics(PARAMS, FTPConfig(p_t=0.1), 120, 20, 2,
                         [1.0], [1.0], seed=10)
    assert a.sum_rate != c.sum_rate


def test_estimate_metrics_threads_match_serial():
    serial = estimate_metrics(PARAMS, FTPConfig(p_t=0.1), 120, 20, 2,
                              [1.0], [1.0], seed=9, threads=1)
    parallel = estimate_metrics(PARAMS, FTPConfig(p_t=0.1), 120, 20, 2,
                                [1.0], [1.0], seed=9, threads=2)
    assert serial.sum_rate == parallel.sum_rate
    assert np.array_equal(serial.d2d_outage.probabilities,
                          parallel.d2d_outage.probabilities)


def test_estimate_metrics_validation():
    with pytest.raises(ValueError):
        estimate_metrics(PARAMS, FTPConfig(p_t=0.1), 10, 10, 2, [1.0], [1.0], 1)
    with pytest.raises(ValueError):
        estimate_metrics(PARAMS, FTPConfig(p_t=0.1), 10, 5, 0, [1.0], [1.0], 1)


def test_atp_estimate_runs():
    rep = estimate_metrics(PARAMS, ATPConfig(beta_th_mw=dbm_to_mw(-72.0)),
                           150, 50, 2, [1.0], [1.0], seed=13)
    assert 0.0 < rep.derived.operable_prob < 1.0
    assert 0.0 < rep.derived.transmit_prob < 1.0
    assert rep.n_slot_samples == 200
    assert rep.n_pair_samples > 0


def test_interference_laplace_small():
    rng = _trial_rng(6, 0)
    vals = interference_laplace_mc(1e-4, 0.1, 4.0, [0.0], 500.0, 50, rng)
    assert vals[0] == pytest.approx(1.0)  # s = 0 is exact
