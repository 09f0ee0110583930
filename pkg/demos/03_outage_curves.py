"""Outage probability at the BS and at D2D receivers, both schemes.

Both access schemes produce a field of active D2D transmitters that
interferes with the cellular uplink and with other D2D pairs. The BS outage
expression is the same functional for both schemes (only the active density
differs); the D2D outage differs structurally, because sensing carves a
protection disk around each receiver's transmitter. The demo prints both
curves over a threshold sweep — note how the adaptive scheme's D2D outage
sits below the fixed scheme's even where its BS outage is slightly worse.

Usage: python 03_outage_curves.py [--plot out.png]
"""

import argparse

import numpy as np

from d2deh import (ATPConfig, FTPConfig, NetworkParams, chebyshev_grid,
                   d2d_outage, dbm_to_mw, scheme_derived)
from d2deh.analysis import _bs_outage


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", default=None)
    args = ap.parse_args()

    params = NetworkParams()
    grid = chebyshev_grid(100, params.cell_radius_m)
    schemes = {"FTP(p_t=0.1)": FTPConfig(p_t=0.1),
               "ATP(-72dBm)": ATPConfig(beta_th_mw=dbm_to_mw(-72.0))}
    gammas_db = np.arange(-10.0, 20.1, 2.0)
    gammas = 10.0 ** (gammas_db / 10.0)

    curves = {}
    for name, scheme in schemes.items():
        derived = scheme_derived(params, scheme)
        bs = [_bs_outage(params, derived.active_density_per_m2, g, grid)
              for g in gammas]
        dd = [d2d_outage(params, scheme, derived, g, grid) for g in gammas]
        curves[name] = (bs, dd)

    header = f"{'gamma[dB]':>9}" + "".join(
        f"  {name + ' BS':>16}  {name + ' D2D':>16}" for name in schemes)
    print(header)
    for i, gdb in enumerate(gammas_db):
        row = f"{gdb:9.0f}"
        for name in schemes:
            row += f"  {curves[name][0][i]:16.4f}  {curves[name][1][i]:16.4f}"
        print(row)

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
        for name in schemes:
            axes[0].plot(gammas_db, curves[name][0], label=name)
            axes[1].plot(gammas_db, curves[name][1], label=name)
        axes[0].set_title("BS outage")
        axes[1].set_title("D2D outage")
        for ax in axes:
            ax.set_xlabel("SINR threshold [dB]")
            ax.legend()
        axes[0].set_ylabel("outage probability")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
        print(f"saved {args.plot}")


if __name__ == "__main__":
    main()
