"""Find the C4xC2 extensions of discriminant 2^22 7^4 and report their
decomposition groups, HNP and WA status.

    python3 scripts/reproduce_counterexample.py
"""

from hnpcount.dirichlet import find_by_discriminant
from hnpcount.groups import FinAbGroup, exterior_square, induced_wedge_image
from hnpcount.norms import hnp_holds, knot_image, wa_holds


def main():
    G = FinAbGroup.parse("C4xC2")
    print(f"wedge square of {G}: {exterior_square(G).group}")
    print(f"image of G[2] in the wedge square trivial: {induced_wedge_image(G.torsion(2)).is_trivial()}")
    hits = find_by_discriminant(G, 2**22 * 7**4, [2, 7])
    print(f"{len(hits)} surjections with discriminant {2**22 * 7**4}")
    for e in hits:
        types = {p: str(e.decomposition_group(p).type()) for p in e.ramified_primes}
        print(
            f"  m={e.modulus} images={list(e.images)} decomposition={types} "
            f"knot={knot_image(e).image.order} hnp={hnp_holds(e)} wa={wa_holds(e)}"
        )


if __name__ == "__main__":
    main()
