"""Slot-level Monte Carlo of the TDD harvest-then-transmit protocol.

This is the independent oracle for every analytical quantity: batteries are
charged by downlink fading realizations, uplink access follows the fixed or
the backoff-sensing scheme, and SINRs are measured at the BS and at the D2D
receivers with fresh Rayleigh fading on every link each sub-slot.

Two deployment fields are supported. ``cell`` places all devices inside the
cell disk (radius R) and runs full per-device battery dynamics; it is the
oracle for the operable probability. ``extended`` fills a disk of radius 3R
and draws operable states i.i.d. from the analytical operable probability
(the homogeneous-thinning assumption underlying every closed-form
interference expression), restricting measurements to the inner disk; it is
the oracle for the outage and rate formulas. The gap between the two modes
is the combined boundary and battery-position-coupling effect that the
closed forms neglect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import analysis
from .geometry import place_receiver, sample_ppp_disk, uniform_disk
from .model import ATPConfig, FTPConfig, NetworkParams, SchemeConfig

EXTENDED_FIELD_FACTOR = 3.0
NEIGHBOR_PROB_CUTOFF = 1e-7


@dataclass
class CellRealization:
    """One Monte Carlo drop: geometry, batteries and cached link constants."""

    params: NetworkParams
    tx: np.ndarray          # (n, 2) transmitter positions, BS at origin
    rx: np.ndarray          # (n, 2) paired receiver positions
    inner: np.ndarray       # (n,) bool, transmitter inside the cell disk
    cell_user: np.ndarray   # (2,) cellular user position
    battery: np.ndarray     # (n,) energy, tracked for inner devices only
    bs_gain: np.ndarray     # (n,) path gain transmitter -> BS
    harvest_coeff: np.ndarray  # (n,) eta * P_b * d^(-alpha), zero for outer
    # i.i.d. operability (extended validation field): when set, access
    # decisions for every device use this probability instead of batteries.
    iid_operable_prob: float | None = None
    # Marginal transmit probability (pi_o * p_t) for the independently
    # thinned transmitter set used to measure BS outage under the adaptive
    # scheme in the validation field. The BS outage closed form models the
    # active set as an independent thinning of the parent process; the
    # contention set is a soft-core process whose reduced interference
    # variance costs ~0.04-0.05 of BS coverage at equal density, so the
    # faithful set cannot validate the thinning-based formula. D2D outage
    # keeps the contention set (its protection-disk structure is exactly
    # what the D2D closed form models).
    iid_bs_transmit_prob: float | None = None
    # Sensing neighbor structure (CSR), built only for the adaptive scheme:
    # q[k] is the probability that neighbor indices[k] blocks device i when
    # it holds a smaller backoff.
    nbr_indptr: np.ndarray | None = None
    nbr_indices: np.ndarray | None = None
    nbr_q: np.ndarray | None = None


@dataclass
class SlotOutcome:
    """Per-UL-sub-slot record; arrays are indexed by device."""

    operable: np.ndarray        # bool
    transmit: np.ndarray        # bool, implies operable
    backoffs: np.ndarray        # in [0, 1], nan where not drawn
    spent: np.ndarray           # energy leaving each battery this sub-slot
    sinr_bs: float
    measured_idx: np.ndarray    # device ids of measured (inner, transmitting) pairs
    sinr_d2d: np.ndarray        # SINR per measured pair
    rate_weights: np.ndarray    # per-pair weight on log2(1 + SINR)


def make_realization(params: NetworkParams, rng: np.random.Generator,
                     field_mode: str = "cell",
                     iid_operable_prob: float | None = None,
                     iid_bs_transmit_prob: float | None = None,
                     beta_th: float | None = None) -> CellRealization:
    """Sample node positions and precompute per-device link constants."""
    if field_mode not in ("cell", "extended"):
        raise ValueError(f"unknown field_mode {field_mode!r}")
    R = params.cell_radius_m
    field_radius = R if field_mode == "cell" else EXTENDED_FIELD_FACTOR * R
    tx = sample_ppp_disk(params.d2d_density_per_m2, field_radius, rng)
    rx = place_receiver(tx, params.pair_distance_m, rng) if len(tx) else tx.copy()
    r_bs = np.hypot(tx[:, 0], tx[:, 1]) if len(tx) else np.zeros(0)
    inner = r_bs <= R
    alpha = params.path_loss_exponent
    bs_gain = np.where(r_bs > 0.0, r_bs, 1.0) ** (-alpha)
    harvest_coeff = np.where(
        inner, params.harvest_efficiency * params.bs_power_mw * bs_gain, 0.0)
    state = CellRealization(
        params=params,
        tx=tx, rx=rx, inner=inner,
        cell_user=uniform_disk(1, R, rng)[0],
        battery=np.zeros(len(tx)),
        bs_gain=bs_gain,
        harvest_coeff=harvest_coeff,
        iid_operable_prob=iid_operable_prob,
        iid_bs_transmit_prob=iid_bs_transmit_prob,
    )
    if beta_th is not None:
        _build_sensing_neighbors(state, beta_th)
    return state


def _build_sensing_neighbors(state: CellRealization, beta_th: float) -> None:
    """Precompute, per device, the contenders that can block it and with what
    probability. A contender at distance d blocks with probability
    exp(-beta_th d^alpha / P_d) (fading-averaged carrier sense); pairs below
    the probability cutoff are dropped.
    """
    p = state.params
    n = len(state.tx)
    indptr = np.zeros(n + 1, dtype=np.int64)
    chunks_idx, chunks_q = [], []
    # Distance below which the blocking probability exceeds the cutoff.
    d_max = (math.log(1.0 / NEIGHBOR_PROB_CUTOFF) * p.d2d_power_mw
             / beta_th) ** (1.0 / p.path_loss_exponent)
    block = 256
    for start in range(0, n, block):
        stop = min(start + block, n)
        dx = state.tx[start:stop, 0:1] - state.tx[None, :, 0]
        dy = state.tx[start:stop, 1:2] - state.tx[None, :, 1]
        d2 = dx * dx + dy * dy
        for i in range(start, stop):
            row = d2[i - start]
            near = np.flatnonzero((row <= d_max * d_max))
            near = near[near != i]
            q = np.exp(-beta_th * row[near] ** (p.path_loss_exponent / 2.0)
                       / p.d2d_power_mw)
            keep = q > NEIGHBOR_PROB_CUTOFF
            chunks_idx.append(near[keep])
            chunks_q.append(q[keep])
            indptr[i + 1] = indptr[i] + keep.sum()
    state.nbr_indptr = indptr
    state.nbr_indices = (np.concatenate(chunks_idx) if chunks_idx
                         else np.zeros(0, dtype=np.int64))
    state.nbr_q = (np.concatenate(chunks_q) if chunks_q
                   else np.zeros(0))


def run_dl_subslot(state: CellRealization, rng: np.random.Generator) -> np.ndarray:
    """One downlink sub-slot: every inner device harvests BS energy.

    Returns the per-device harvested energy (zero for outer interferers,
    whose batteries are not tracked). Batteries are unbounded above. A no-op
    under i.i.d. operability, where batteries play no role.
    """
    if state.iid_operable_prob is not None:
        return np.zeros(len(state.tx))
    gains = rng.exponential(size=len(state.tx))
    harvested = state.harvest_coeff * gains
    state.battery += harvested
    return harvested


def _operable_flags(state: CellRealization, rng: np.random.Generator) -> np.ndarray:
    if state.iid_operable_prob is not None:
        return rng.random(len(state.tx)) < state.iid_operable_prob
    return state.battery >= state.params.energy_threshold_mwslots


def _spend(state: CellRealization, amount: np.ndarray) -> np.ndarray:
    """Drain batteries of inner devices; spending is floored at empty.

    With E_th >= P_d the floor is never hit; it only matters for stress
    configurations with a threshold below one transmission's cost.
    """
    actual = np.where(state.inner, np.minimum(amount, state.battery), 0.0)
    state.battery -= actual
    return actual


def run_ul_subslot_ftp(state: CellRealization, p_t: float,
                       rng: np.random.Generator) -> SlotOutcome:
    """One uplink sub-slot of the fixed scheme: independent coin per operable."""
    operable = _operable_flags(state, rng)
    transmit = operable & (rng.random(len(state.tx)) < p_t)
    spent = _spend(state, np.where(transmit, state.params.d2d_power_mw, 0.0))
    backoffs = np.full(len(state.tx), np.nan)
    weights = np.full(int((transmit & state.inner).sum()), 0.5)
    sinr_bs, measured_idx, sinr_d2d = _measure_sinr(state, transmit, rng)
    return SlotOutcome(operable=operable, transmit=transmit, backoffs=backoffs,
                       spent=spent, sinr_bs=sinr_bs, measured_idx=measured_idx,
                       sinr_d2d=sinr_d2d, rate_weights=weights)


@njit(cache=True)
def _matern_admission(operable, marks, indptr, indices, q, seed):  # pragma: no cover
    """Backoff contention: device i defers if any operable contender with a
    smaller backoff is received above the protection threshold. Each directed
    pair check draws fresh fading (uniform against the precomputed blocking
    probability)."""
    np.random.seed(seed)
    n = operable.size
    out = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        if not operable[i]:
            continue
        ti = marks[i]
        ok = True
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if operable[j] and marks[j] < ti:
                if np.random.random() < q[k]:
                    ok = False
                    break
        out[i] = ok
    return out


def run_ul_subslot_atp(state: CellRealization, beta_th: float,
                       sense_window: float,
                       rng: np.random.Generator) -> SlotOutcome:
    """One uplink sub-slot of the adaptive scheme.

    Operable devices draw a backoff uniform on [0, 1]; a device transmits
    unless some operable contender with a smaller backoff is sensed above
    beta_th. All operable devices pay sensing energy for their backoff
    window; transmitters additionally pay transmit energy for the remainder
    of the sub-slot.
    """
    if state.nbr_indptr is None:
        _build_sensing_neighbors(state, beta_th)
    n = len(state.tx)
    operable = _operable_flags(state, rng)
    backoffs = np.full(n, np.nan)
    backoffs[operable] = rng.random(int(operable.sum()))
    seed = int(rng.integers(0, 2 ** 31 - 1))
    transmit = _matern_admission(operable, np.nan_to_num(backoffs, nan=2.0),
                                 state.nbr_indptr, state.nbr_indices,
                                 state.nbr_q, seed)
    p = state.params
    cost = np.zeros(n)
    sense_frac = np.nan_to_num(backoffs, nan=0.0) * sense_window
    cost[operable] = p.sense_power_mw * sense_frac[operable]
    cost[transmit] += p.d2d_power_mw * (1.0 - sense_frac[transmit])
    spent = _spend(state, cost)
    measured = transmit & state.inner
    weights = (1.0 - sense_frac[measured]) / 2.0
    transmit_bs = None
    if state.iid_bs_transmit_prob is not None:
        transmit_bs = rng.random(n) < state.iid_bs_transmit_prob
    sinr_bs, measured_idx, sinr_d2d = _measure_sinr(state, transmit, rng,
                                                    transmit_bs=transmit_bs)
    return SlotOutcome(operable=operable, transmit=transmit, backoffs=backoffs,
                       spent=spent, sinr_bs=sinr_bs, measured_idx=measured_idx,
                       sinr_d2d=sinr_d2d, rate_weights=weights)


def _measure_sinr(state: CellRealization, transmit: np.ndarray,
                  rng: np.random.Generator,
                  transmit_bs: np.ndarray | None = None):
    """BS SINR and per measured D2D pair SINR with fresh fading on all links.

    ``transmit_bs``, when given, is a separate transmitter set used only for
    the BS measurement (validation field, adaptive scheme).
    """
    p = state.params
    alpha = p.path_loss_exponent
    active = np.flatnonzero(transmit)
    n_act = len(active)

    # Uplink SINR at the BS.
    bs_active = active if transmit_bs is None else np.flatnonzero(transmit_bs)
    d_cb = float(np.hypot(*state.cell_user))
    signal_bs = p.cell_user_power_mw * rng.exponential() * d_cb ** (-alpha)
    i_bs = p.d2d_power_mw * np.sum(
        rng.exponential(size=len(bs_active)) * state.bs_gain[bs_active])
    sinr_bs = signal_bs / (i_bs + p.noise_power_mw)

    measured_idx = active[state.inner[active]]
    n_meas = len(measured_idx)
    if n_meas == 0:
        return sinr_bs, measured_idx, np.zeros(0)

    rx = state.rx[measured_idx]                       # (m, 2)
    diff = state.tx[active, None, :] - rx[None, :, :]  # (n_act, m, 2)
    d = np.sqrt(np.sum(diff * diff, axis=2))
    gains = rng.exponential(size=d.shape)
    contrib = p.d2d_power_mw * gains * d ** (-alpha)
    # Remove each pair's own transmitter from its interference column.
    own = np.searchsorted(active, measured_idx)
    contrib[own, np.arange(n_meas)] = 0.0
    i_d2d = contrib.sum(axis=0)
    d_c = np.hypot(rx[:, 0] - state.cell_user[0], rx[:, 1] - state.cell_user[1])
    i_cell = (p.cell_user_power_mw * rng.exponential(size=n_meas)
              * d_c ** (-alpha))
    signal = (p.d2d_power_mw * rng.exponential(size=n_meas)
              * p.pair_distance_m ** (-alpha))
    sinr_d2d = signal / (i_d2d + i_cell + p.noise_power_mw)
    return sinr_bs, measured_idx, sinr_d2d


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based private stream per (seed, trial)."""
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, trial], dtype=np.uint64)))


def _run_trial(params: NetworkParams, scheme: SchemeConfig, slots: int,
               burn_in: int, gamma_grid_b: np.ndarray, gamma_grid_d: np.ndarray,
               seed: int, trial: int, field_mode: str,
               iid_operable_prob: float | None,
               iid_bs_transmit_prob: float | None,
               redraw_user_per_slot: bool) -> dict:
    rng = _trial_rng(seed, trial)
    beta_th = scheme.beta_th_mw if isinstance(scheme, ATPConfig) else None
    state = make_realization(params, rng, field_mode=field_mode,
                             iid_operable_prob=iid_operable_prob,
                             iid_bs_transmit_prob=iid_bs_transmit_prob,
                             beta_th=beta_th)
    inner = state.inner
    n_inner = int(inner.sum())

    acc = {
        "operable": 0, "transmit": 0, "device_slots": 0,
        "bs_below": np.zeros(len(gamma_grid_b)), "bs_n": 0,
        "d2d_below": np.zeros(len(gamma_grid_d)), "d2d_n": 0,
        "rate_sum": 0.0, "rate_slots": 0,
    }
    for n in range(slots):
        run_dl_subslot(state, rng)
        if redraw_user_per_slot:
            state.cell_user = uniform_disk(1, params.cell_radius_m, rng)[0]
        if isinstance(scheme, FTPConfig):
            out = run_ul_subslot_ftp(state, scheme.p_t, rng)
        else:
            out = run_ul_subslot_atp(state, scheme.beta_th_mw,
                                     params.sense_window, rng)
        if n < burn_in:
            continue
        acc["operable"] += int((out.operable & inner).sum())
        acc["transmit"] += int((out.transmit & inner).sum())
        acc["device_slots"] += n_inner
        acc["bs_below"] += out.sinr_bs < gamma_grid_b
        acc["bs_n"] += 1
        if len(out.sinr_d2d):
            acc["d2d_below"] += (out.sinr_d2d[:, None]
                                 < gamma_grid_d[None, :]).sum(axis=0)
            acc["d2d_n"] += len(out.sinr_d2d)
            acc["rate_sum"] += float(np.sum(out.rate_weights
                                            * np.log2(1.0 + out.sinr_d2d)))
        acc["rate_slots"] += 1
    return acc


def estimate_metrics(params: NetworkParams, scheme: SchemeConfig, slots: int,
                     burn_in: int, trials: int, gamma_grid_b, gamma_grid_d,
                     seed: int, field_mode: str = "cell",
                     redraw_user_per_slot: bool = False,
                     threads: int = 1) -> analysis.MetricsReport:
    """Empirical counterparts of the analytical metrics, pooled over trials.

    Each trial owns a private counter-based random stream derived from
    (seed, trial), so results are reproducible and independent of execution
    order. ``slots`` counts DL+UL slot pairs per trial; the first ``burn_in``
    of them warm up the battery process and are not measured.
    """
    if slots <= burn_in or burn_in < 0:
        raise ValueError("need slots > burn_in >= 0")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    gamma_grid_b = np.asarray(gamma_grid_b, dtype=float)
    gamma_grid_d = np.asarray(gamma_grid_d, dtype=float)

    sd = analysis.scheme_derived(params, scheme)
    iid_pi_o = sd.operable_prob if field_mode == "extended" else None
    iid_bs_tx = (sd.operable_prob * sd.transmit_prob
                 if field_mode == "extended" and isinstance(scheme, ATPConfig)
                 else None)

    args = [(params, scheme, slots, burn_in, gamma_grid_b, gamma_grid_d,
             seed, t, field_mode, iid_pi_o, iid_bs_tx, redraw_user_per_slot)
            for t in range(trials)]
    if threads > 1 and trials > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_trial_star, args))
    else:
        results = [_run_trial(*a) for a in args]

    return _aggregate(params, scheme, sd, results, gamma_grid_b, gamma_grid_d)


def _run_trial_star(a):
    return _run_trial(*a)


def _ratio(num, den):
    return num / den if den else 0.0


def _aggregate(params, scheme, sd_analytic, results, gamma_grid_b,
               gamma_grid_d) -> analysis.MetricsReport:
    pooled = {k: sum(r[k] for r in results) for k in results[0]}
    pi_o = _ratio(pooled["operable"], pooled["device_slots"])
    p_t = _ratio(pooled["transmit"], pooled["operable"])
    bs_curve = pooled["bs_below"] / max(pooled["bs_n"], 1)
    d2d_curve = pooled["d2d_below"] / max(pooled["d2d_n"], 1)
    rate = _ratio(pooled["rate_sum"], pooled["rate_slots"])

    def trial_stderr(values):
        v = np.asarray(values, dtype=float)
        if len(v) < 2:
            return np.zeros_like(v[0]) if v.ndim > 1 else 0.0
        return v.std(axis=0, ddof=1) / math.sqrt(len(v))

    derived = analysis.SchemeDerived(
        operable_prob=pi_o,
        transmit_prob=p_t,
        active_density_per_m2=params.d2d_density_per_m2 * pi_o * p_t,
        protection_radius_m=sd_analytic.protection_radius_m,
        w_constant=sd_analytic.w_constant,
    )
    return analysis.MetricsReport(
        mode="simulation",
        derived=derived,
        bs_outage=analysis.OutageCurve(gamma_grid_b, bs_curve),
        d2d_outage=analysis.OutageCurve(gamma_grid_d, d2d_curve),
        sum_rate=rate,
        pi_o_stderr=float(trial_stderr(
            [_ratio(r["operable"], r["device_slots"]) for r in results])),
        p_t_stderr=float(trial_stderr(
            [_ratio(r["transmit"], r["operable"]) for r in results])),
        sum_rate_stderr=float(trial_stderr(
            [_ratio(r["rate_sum"], r["rate_slots"]) for r in results])),
        bs_outage_stderr=trial_stderr(
            [r["bs_below"] / max(r["bs_n"], 1) for r in results]),
        d2d_outage_stderr=trial_stderr(
            [r["d2d_below"] / max(r["d2d_n"], 1) for r in results]),
        n_slot_samples=pooled["bs_n"],
        n_pair_samples=int(pooled["d2d_n"]),
    )


def interference_laplace_mc(density: float, p_d_mw: float, alpha: float,
                            s_values, field_radius_m: float, n_draws: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Empirical Laplace transform of shot-noise interference at the origin.

    All devices on a PPP of the given density transmit at ``p_d_mw`` with
    Rayleigh fading; returns the sample mean of exp(-s I) per s. This is the
    Monte Carlo side of the PGFL identity
    E[exp(-s I)] = exp(-pi * density * Xi(alpha) * (s P_d)^(2/alpha)).
    """
    s_values = np.asarray(s_values, dtype=float)
    acc = np.zeros(len(s_values))
    for _ in range(n_draws):
        pts = sample_ppp_disk(density, field_radius_m, rng)
        if len(pts):
            r = np.hypot(pts[:, 0], pts[:, 1])
            r = r[r > 0.0]
            i_tot = p_d_mw * np.sum(rng.exponential(size=len(r)) * r ** (-alpha))
        else:
            i_tot = 0.0
        acc += np.exp(-s_values * i_tot)
    return acc / n_draws
