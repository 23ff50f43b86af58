"""Both sides of the Poisson summation identity for H = C2xC4, J = <e1, e2^2>
over a range of s, with tail estimates.

    python3 scripts/poisson_sweep.py --s 0.8,1.0,1.5,3 --X 1e6 --P 1e4
"""

import argparse

from hnpcount.cli import parse_bound
from hnpcount.counting import poisson_check
from hnpcount.groups import FinAbGroup


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--group", default="C2xC4")
    ap.add_argument("--J", default="1,0;0,2", help="generators of J as coordinate tuples")
    ap.add_argument("--s", default="0.8,1.0,1.5,3")
    ap.add_argument("--X", default="1e6")
    ap.add_argument("--P", default="1e4")
    a = ap.parse_args()
    G = FinAbGroup.parse(a.group)
    J = G.subgroup([tuple(int(v) for v in g.split(",")) for g in a.J.split(";")])
    X, P = parse_bound(a.X), parse_bound(a.P)
    print("s,lhs,rhs,discrepancy,tails,relative,within_tails")
    for s in (float(v) for v in a.s.split(",")):
        r = poisson_check(G.whole(), J, None, s, X, P)
        tails = r.tail_lhs + r.tail_rhs
        print(f"{s},{r.lhs:.10g},{r.rhs.real:.10g},{r.discrepancy:.3g},{tails:.3g},{r.relative:.3g},{r.within_tails}")


if __name__ == "__main__":
    main()
