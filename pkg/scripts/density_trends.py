"""HNP-failure, WA-holds and Lambda ratios over a grid of discriminant bounds.

    python3 scripts/density_trends.py --groups C2xC2,C2xC4 --bounds 1e4,1e6,1e8
"""

import argparse
import os
import time

from hnpcount.cli import parse_bounds
from hnpcount.groups import FinAbGroup
from hnpcount.norms import density_scan, trend_non_increasing


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--groups", default="C2xC2,C2xC4")
    ap.add_argument("--bounds", default="1e4,1e6,1e8")
    ap.add_argument("--workers", type=int, default=os.cpu_count())
    a = ap.parse_args()
    bounds = parse_bounds(a.bounds)
    for spec in a.groups.split(","):
        G = FinAbGroup.parse(spec)
        t0 = time.time()
        rows = density_scan(G, bounds, workers=a.workers)
        print(f"# {G}  ({time.time() - t0:.1f}s)")
        print("B,total,hnp_fail_ratio,wa_hold_ratio,lambda_ratio")
        for r in rows:
            vals = [r.hnp_fail_ratio, r.wa_hold_ratio, r.lambda_ratio]
            print(f"{r.bound},{r.total}," + ",".join("" if v is None else f"{float(v):.5f}" for v in vals))
        for name in ("hnp_fail_ratio", "wa_hold_ratio", "lambda_ratio"):
            vals = [getattr(r, name) for r in rows]
            ok = trend_non_increasing([None if v is None else float(v) for v in vals])
            print(f"# {name}: {'non-increasing' if ok else 'inversion beyond tolerance'}")


if __name__ == "__main__":
    main()
