"""Exact vs heavy-traffic mean sojourn time for a handful of service laws.

Writes one CSV per law into --out-dir and prints the ratio column.
"""

import argparse
import csv
import math
import re
from pathlib import Path

from fbsojourn.cli import SCAN_HEADER, fmt, scan_rows
from fbsojourn.dist import parse_dist

LAWS = [
    "exp(mu=1)",
    "weibull(mu=1,beta=0.5)",
    "gamma(alpha=2,beta=2)",
    "pareto(alpha=3,xl=1)",
    "pareto(alpha=1.5,xl=1)",
    "det(b=1)",
    "uniform(b=2)",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="10,100,1000,10000,100000", help="loads 1 - 1/n")
    ap.add_argument("--out-dir", default="scan_out")
    args = ap.parse_args()
    rhos = [1 - 1 / float(n) for n in args.n.split(",")]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for spec in LAWS:
        d = parse_dist(spec)
        rows, failed = scan_rows(d, rhos)
        with open(out / (re.sub(r"\W+", "_", spec).strip("_") + ".csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SCAN_HEADER)
            w.writerows([fmt(v) for v in r] for r in rows)
        ratios = " ".join(f"{r[3]:8.4f}" if math.isfinite(r[3]) else "     nan" for r in rows)
        print(f"{spec:26s} {ratios}{'  (quadrature failures)' if failed else ''}")


if __name__ == "__main__":
    main()
