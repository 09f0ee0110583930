"""How much a device can afford to talk: operable probability vs. duty cycle.

Devices recharge from downlink broadcasts, so whether a battery keeps up
depends on the distance to the BS, the harvest efficiency, and how often the
device elects to transmit. This demo sweeps the fixed transmit probability
for two harvest efficiencies and prints the operable probability and the
resulting density of simultaneously active transmitters. The interesting
tension: raising p_t drains batteries faster, so the active density
lambda_d * pi_o * p_t grows sublinearly and the network self-limits.

Usage: python 01_operable_probability.py [--plot out.png]
"""

import argparse
from dataclasses import replace

import numpy as np

from d2deh import NetworkParams, ftp_solve


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", default=None, help="save a figure to this path")
    args = ap.parse_args()

    base = NetworkParams()
    p_ts = np.arange(0.05, 1.0001, 0.05)
    curves = {}
    print(f"{'p_t':>5}  {'pi_o (eta=0.8)':>15}  {'pi_o (eta=0.3)':>15}  "
          f"{'lambda_t (0.8)':>15}")
    for eta in (0.8, 0.3):
        params = replace(base, harvest_efficiency=eta)
        curves[eta] = [ftp_solve(params, p) for p in p_ts]
    for i, p in enumerate(p_ts):
        print(f"{p:5.2f}  {curves[0.8][i].operable_prob:15.4f}  "
              f"{curves[0.3][i].operable_prob:15.4f}  "
              f"{curves[0.8][i].active_density_per_m2:15.6g}")

    # The closed form has a saturation branch: cheap enough duty cycles make
    # every position in the cell energy-sufficient.
    sat = [p for p in p_ts if ftp_solve(base, p).operable_prob >= 1.0]
    if sat:
        print(f"\nfully operable for p_t <= {max(sat):.2f} at eta=0.8")
    else:
        print("\nno full-operability regime in this sweep")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for eta, style in ((0.8, "-o"), (0.3, "--s")):
            ax.plot(p_ts, [d.operable_prob for d in curves[eta]], style,
                    ms=3, label=f"eta = {eta}")
        ax.set_xlabel("transmit probability p_t")
        ax.set_ylabel("operable probability")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
        print(f"saved {args.plot}")


if __name__ == "__main__":
    main()
