#!/usr/bin/env python3
"""Sweep tensor weight spaces and tabulate raw vs symmetrized order invariance.

The weighted basis sums attached to consecutive arrangement levels always
agree after averaging over permutations within each variable group; whether
they already agree *before* that averaging depends on the space.  This
script sweeps small type-A weight spaces and prints one row per
(space, level) pair, flagging which spaces need the symmetrization.
"""

import argparse
import itertools
import json
import sys
import time
from dataclasses import dataclass

from kzdyn.hyper import verify_order_invariance
from kzdyn.rep import enumerate_basis, verma_symbolic


@dataclass(frozen=True)
class SweepConfig:
    n: int
    max_factors: int
    max_weight: int
    max_dim: int


def iter_spaces(cfg: SweepConfig):
    for n_factors in range(1, cfg.max_factors + 1):
        factors = [verma_symbolic(cfg.n, j + 1) for j in range(n_factors)]
        for nu in itertools.product(range(cfg.max_weight + 1), repeat=cfg.n - 1):
            if sum(nu) == 0:
                continue
            space = enumerate_basis(factors, nu)
            if space.dim > cfg.max_dim:
                continue
            yield n_factors, nu, space


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3, help="matrix size (rank + 1)")
    ap.add_argument("--max-factors", type=int, default=2,
                    help="largest number of tensor factors to try")
    ap.add_argument("--max-weight", type=int, default=2,
                    help="cap on each simple-root coordinate of the weight")
    ap.add_argument("--max-dim", type=int, default=40,
                    help="skip weight spaces with more basis vectors than this")
    ap.add_argument("--json", action="store_true",
                    help="emit one JSON object per row instead of a table")
    args = ap.parse_args(argv)
    cfg = SweepConfig(args.n, args.max_factors, args.max_weight, args.max_dim)

    rows = []
    for n_factors, nu, space in iter_spaces(cfg):
        for h in range(1, cfg.n):
            t0 = time.monotonic()
            report = verify_order_invariance(space, h)
            row = {
                "n": cfg.n,
                "factors": n_factors,
                "nu": list(nu),
                "dim": space.dim,
                "h": h,
                "raw_equal": report.raw_equal,
                "symmetrized_equal": report.symmetrized_equal,
                "seconds": round(time.monotonic() - t0, 3),
            }
            rows.append(row)
            if args.json:
                print(json.dumps(row, sort_keys=True))
            else:
                tag = ("raw+sym" if report.raw_equal
                       else "sym-only" if report.symmetrized_equal
                       else "MISMATCH")
                print(f"n={cfg.n} factors={n_factors} nu={nu} "
                      f"dim={space.dim:3d} h={h}  {tag:8s}  "
                      f"{row['seconds']:6.3f}s")

    failures = [r for r in rows if not r["symmetrized_equal"]]
    sym_only = [r for r in rows if not r["raw_equal"] and r["symmetrized_equal"]]
    print(f"# {len(rows)} rows; {len(sym_only)} hold only after "
          f"symmetrization; {len(failures)} symmetrized failures",
          file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
