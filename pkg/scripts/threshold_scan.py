#!/usr/bin/env python3
"""Tabulate sequence-inequality thresholds across growth parameters."""

import argparse

from mpmath import mp

from escargot.harness.config import RunConfig
from escargot.harness.pipeline import build_context
from escargot.hyperscale import verify_lemma1, verify_lemma1_internals


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--log10-a3", type=float, nargs="+", default=[10, 100, 1000])
    p.add_argument("--n0", type=int, nargs="+", default=[10, 12, 16])
    p.add_argument("--n-max", type=int, default=40)
    args = p.parse_args()

    for n0 in args.n0:
        for a3 in args.log10_a3:
            ctx = build_context(RunConfig(n0=n0, n1=n0 + 2, log10_a3=a3, n_max=max(args.n_max, n0 + 6)))
            with mp.workdps(ctx.precision):
                reps = verify_lemma1(ctx.table, ctx.seq) + verify_lemma1_internals(ctx.table, ctx.seq)
            cells = " ".join(f"{r.name.split('.', 1)[1]}={r.threshold}" for r in reps if r.indexed)
            print(f"N0={n0:3d} log10_a3={a3:7g} digits={ctx.precision:4d}  {cells}")


if __name__ == "__main__":
    main()
