"""Stability label versus fault duration on the bundled 3-machine case."""

import argparse

import numpy as np

from elmrules import swinggen


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--load", type=float, nargs="+", default=[0.75, 1.0, 1.3])
    ap.add_argument("--max-duration", type=float, default=0.6)
    ap.add_argument("--step", type=float, default=0.005)
    args = ap.parse_args()

    machines, network, _ = swinggen.load_fixture()
    durations = np.round(np.arange(args.step, args.max_duration + 1e-12, args.step), 6)
    for load in args.load:
        sc = swinggen.Scenario(load_scale=load, t_end=2.0)
        labels = swinggen.critical_clearing_scan(machines, network, sc, durations)
        flips = np.flatnonzero(np.diff(labels) != 0)
        if len(flips) == 0:
            print(f"load {load:.2f}: no switch on the grid (all {labels[0]:+d})")
            continue
        lo, hi = durations[flips[0]], durations[flips[0] + 1]
        print(f"load {load:.2f}: critical clearing time in ({lo:.3f}, {hi:.3f}] s, {len(flips)} switch(es)")


if __name__ == "__main__":
    main()
