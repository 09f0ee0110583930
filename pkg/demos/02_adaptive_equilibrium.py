"""The adaptive scheme's chicken-and-egg equilibrium.

Under backoff sensing, how often a device transmits depends on how many of
its neighbors are operable — but operability depends on energy consumption,
which depends on how often everyone transmits. The two probabilities settle
into a fixed point. This demo sweeps the protection threshold beta_th and
reports the solved equilibrium: a permissive threshold (low beta_th in dBm is
*strict*: more neighbors heard, more deferring) trades transmit opportunities
against interference protection.

Usage: python 02_adaptive_equilibrium.py
"""

import numpy as np

from d2deh import NetworkParams, atp_solve, dbm_to_mw


def main():
    params = NetworkParams()
    print(f"{'beta_th':>8}  {'r_p [m]':>8}  {'W':>8}  {'pi_o':>8}  "
          f"{'p_t':>8}  {'lambda_t':>12}")
    for beta_dbm in np.arange(-85.0, -54.9, 2.5):
        d = atp_solve(params, dbm_to_mw(beta_dbm))
        print(f"{beta_dbm:8.1f}  {d.protection_radius_m:8.2f}  "
              f"{d.w_constant:8.2f}  {d.operable_prob:8.4f}  "
              f"{d.transmit_prob:8.4f}  {d.active_density_per_m2:12.5g}")

    # Sanity cross-check at one point: the contention retention probability
    # (1 - e^(-W pi_o)) / (W pi_o) must reproduce the solved p_t.
    d = atp_solve(params, dbm_to_mw(-72.0))
    x = d.w_constant * d.operable_prob
    print(f"\nretention check at -72 dBm: "
          f"{(1 - np.exp(-x)) / x:.6f} vs solved p_t {d.transmit_prob:.6f}")


if __name__ == "__main__":
    main()
