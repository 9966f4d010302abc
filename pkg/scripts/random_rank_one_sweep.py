#!/usr/bin/env python3
"""Randomized robustness sweep of the rank-one numeric identities.

Samples admissible (p, m, kappa, lambda, z) tuples with a seeded RNG, runs
the closed-form difference-equation check and the determinant-factorization
check at each point, and reports the worst relative errors observed.  This
probes well beyond the frozen grid used in the test suite; points that land
on a parameter pole are counted and skipped.
"""

import argparse
import random
import sys

from kzdyn.numeric import (
    PoleHit,
    det_formula_sl2_check,
    main_theorem_sl2_check,
)


def sample_point(rng: random.Random):
    p = rng.randint(2, 7)
    m = rng.randint(0, min(3, p // 2))
    kappa = rng.uniform(1.5, 4.0)
    lam = rng.uniform(0.6, 3.4)
    z = rng.uniform(0.3, 2.5)
    return p, m, kappa, lam, z


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--tol", type=float, default=1e-7,
                    help="threshold for counting a point as suspicious")
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)

    worst = []
    skipped = 0
    for _ in range(args.trials):
        point = sample_point(rng)
        try:
            main_report = main_theorem_sl2_check(*point, tol=args.tol)
            det_report = det_formula_sl2_check(*point, tol=args.tol)
        except PoleHit:
            skipped += 1
            continue
        error = max(
            main_report.rel_error,
            det_report.rel_error,
            det_report.periodicity_error,
        )
        worst.append((error, point))

    worst.sort(reverse=True)
    print(f"{'rel-error':>12s}  (p, m, kappa, lambda, z)")
    for error, point in worst[:10]:
        p, m, kappa, lam, z = point
        print(f"{error:12.3e}  ({p}, {m}, {kappa:.4f}, {lam:.4f}, {z:.4f})")

    suspicious = sum(1 for error, _ in worst if error > args.tol)
    print(f"# {len(worst)} points checked, {skipped} skipped on poles, "
          f"{suspicious} above {args.tol:g}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
