#!/usr/bin/env python3
"""Search growth parameters for a run of consecutive verified disc maps.

Prints one line per disc tried and the first window found.
"""

import argparse
import json
import time

from escargot.harness.pipeline import search_disc_window


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--log10-a3", type=float, nargs="+", default=[100, 300, 1000])
    p.add_argument("--n0", type=int, nargs="+", default=[10, 16])
    p.add_argument("--need", type=int, default=3, help="consecutive passing indices required")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--max-prec", type=int, default=200)
    p.add_argument("--json", help="write the search log here")
    args = p.parse_args()

    t0 = time.perf_counter()
    found = search_disc_window(args.log10_a3, args.n0, need=args.need, samples=args.samples,
                               max_prec=args.max_prec)
    for t in found.tried:
        for r in t["rows"]:
            print(f"log10_a3={t['log10_a3']:g} N0={t['n0']} n={r['n']:3d} digits={r['precision']:4d} "
                  f"disc_map={r['disc_map']} i1i2={r['i1i2']} worst_ratio={r['worst_ratio']:.3e}")
    took = time.perf_counter() - t0
    if found.window:
        print(f"window {list(found.window)} at log10_a3={found.config.log10_a3:g}, N0={found.config.n0} "
              f"({took:.1f} s)")
    else:
        print(f"no window found ({took:.1f} s)")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"window": found.window, "tried": found.tried}, fh, indent=1)


if __name__ == "__main__":
    main()
