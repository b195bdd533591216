"""Heisenberg B-free window ratios and Følner defects over a range of n.

Shows how far the box ratio sits from the product density for each n;
the deviation depends on n mod 6 and shrinks only slowly.
"""
import argparse
import csv
import sys

from discordant.constructions import BSequence, heisenberg_bfree_oracle
from discordant.folner import GroupContext, density_report, folner_defect


def sweep(B, lo, hi, workers):
    H3 = GroupContext.heisenberg()
    A = heisenberg_bfree_oracle(BSequence(tuple(B)))
    rep = density_report(A, H3, list(range(lo, hi + 1)), workers=workers)
    for (n, r), size in zip(rep.ratios, rep.sizes):
        yield {"n": n, "size": size, "ratio": f"{r:.7f}", "diff": f"{r - A.known_density:+.2e}",
               "defect": f"{folner_defect(H3, (1, 0, 0), n):.5f}"}


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--B", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--lo", type=int, default=10)
    ap.add_argument("--hi", type=int, default=32)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    w = csv.DictWriter(sys.stdout, ["n", "size", "ratio", "diff", "defect"], lineterminator="\n")
    w.writeheader()
    for row in sweep(args.B, args.lo, args.hi, args.workers):
        w.writerow(row)
