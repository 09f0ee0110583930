"""Do the closed forms survive contact with a simulator that knows nothing
about them?

The Monte Carlo tracks individual batteries, backoffs and fading draws; the
analysis is all Laplace functionals and fixed points. This demo runs both at
the same operating point and prints them side by side. The extended
deployment field (interferers out to 3R, operability drawn i.i.d. at the
analytical rate) isolates exactly the assumptions the closed forms make, so
the two columns should agree to Monte Carlo noise; the plain cell field also
validates the operable probability against real battery dynamics.

Usage: python 05_monte_carlo_validation.py [--scheme ftp|atp] [--trials N]
"""

import argparse
import time

import numpy as np

from d2deh import (ATPConfig, FTPConfig, NetworkParams, chebyshev_grid,
                   d2d_outage, dbm_to_mw, estimate_metrics, scheme_derived,
                   sum_rate)
from d2deh.analysis import _bs_outage


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scheme", choices=["ftp", "atp"], default="ftp")
    ap.add_argument("--trials", type=int, default=8)
    ap.add_argument("--slots", type=int, default=1100)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    params = NetworkParams()
    scheme = (FTPConfig(p_t=0.1) if args.scheme == "ftp"
              else ATPConfig(beta_th_mw=dbm_to_mw(-72.0)))
    grid = chebyshev_grid(100, params.cell_radius_m)
    gammas_db = [-5.0, 0.0, 5.0, 10.0, 15.0]
    gammas = [10.0 ** (g / 10.0) for g in gammas_db]

    derived = scheme_derived(params, scheme)
    t0 = time.perf_counter()
    emp = estimate_metrics(params, scheme, args.slots, 100, args.trials,
                           gammas, gammas, args.seed, field_mode="extended",
                           redraw_user_per_slot=True)
    dt = time.perf_counter() - t0

    print(f"scheme={args.scheme}  trials={args.trials}  slots={args.slots}  "
          f"({dt:.1f}s, {emp.n_pair_samples} pair samples)\n")
    print(f"{'metric':<16} {'analysis':>10} {'simulation':>11} {'+/-':>8}")
    print(f"{'pi_o':<16} {derived.operable_prob:>10.4f} "
          f"{emp.derived.operable_prob:>11.4f} {emp.pi_o_stderr:>8.4f}")
    print(f"{'p_t':<16} {derived.transmit_prob:>10.4f} "
          f"{emp.derived.transmit_prob:>11.4f} {emp.p_t_stderr:>8.4f}")
    for i, gdb in enumerate(gammas_db):
        a_bs = _bs_outage(params, derived.active_density_per_m2, gammas[i], grid)
        a_dd = d2d_outage(params, scheme, derived, gammas[i], grid)
        print(f"{'bs_out@%+.0fdB' % gdb:<16} {a_bs:>10.4f} "
              f"{emp.bs_outage.probabilities[i]:>11.4f} "
              f"{emp.bs_outage_stderr[i]:>8.4f}")
        print(f"{'d2d_out@%+.0fdB' % gdb:<16} {a_dd:>10.4f} "
              f"{emp.d2d_outage.probabilities[i]:>11.4f} "
              f"{emp.d2d_outage_stderr[i]:>8.4f}")
    a_rate = sum_rate(params, scheme, derived, grid)
    print(f"{'sum_rate':<16} {a_rate:>10.3f} {emp.sum_rate:>11.3f} "
          f"{emp.sum_rate_stderr:>8.3f}")


if __name__ == "__main__":
    main()
