import itertools
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import legendre_symbol

from hnpcount.dirichlet import GExtension, default_S, enumerate_extensions, find_by_discriminant, lambda_v_test
from hnpcount.groups import FinAbGroup, GroupSpecError
from hnpcount.norms import (
    DensityRow,
    density_csv,
    density_scan,
    hnp_holds,
    knot_image,
    scan_records,
    trend_non_increasing,
    wa_holds,
)

V4 = FinAbGroup((2, 2))
C2C4 = FinAbGroup((2, 4))


def qr_decomposition_noncyclic(p, q):
    """For Q(sqrt p*, sqrt q*) with odd primes p, q: the decomposition
    group at p is all of V4 iff q* = +-q = 1 mod 4 is a non-residue mod p."""
    qstar = q if q % 4 == 1 else -q
    return legendre_symbol(qstar % p, p) == -1


def test_cyclic_groups():
    ext = GExtension.from_images(FinAbGroup((4,)), 5, [(1,)])
    rep = knot_image(ext)
    assert rep.image.is_trivial() and rep.image.is_whole()
    assert hnp_holds(ext) and wa_holds(ext)


def test_221_and_8():
    ext221 = GExtension.from_images(V4, 221, [(1, 0), (0, 1)])
    assert not qr_decomposition_noncyclic(13, 17) and not qr_decomposition_noncyclic(17, 13)
    assert knot_image(ext221).image.is_trivial()
    assert not hnp_holds(ext221) and wa_holds(ext221)
    ext8 = GExtension.from_images(V4, 8, [(1, 0), (0, 1)])
    rep = knot_image(ext8)
    assert rep.image.is_whole() and rep.contributing_places == (2,)
    assert hnp_holds(ext8) and not wa_holds(ext8)


def test_example_field():
    hits = find_by_discriminant(FinAbGroup.parse("C4xC2"), 10070523904, [2, 7])
    assert hits
    with_v4_at_7 = 0
    for e in hits:
        assert wa_holds(e) and not hnp_holds(e)
        assert knot_image(e, audit_upto=200).contributing_places == ()
        non_cyclic = [p for p in e.ramified_primes if e.decomposition_group(p).type().rank >= 2]
        assert non_cyclic in ([], [7])
        if non_cyclic:
            assert e.decomposition_group(7).type().cyclic_orders == (2, 2)
            with_v4_at_7 += 1
    # two fields share this discriminant; one has the (Z/2)^2 decomposition
    assert with_v4_at_7 == 8


def test_pairs_of_odd_primes_against_residues():
    # Q(sqrt p*, sqrt q*) for odd primes p, q: HNP fails iff both
    # decomposition groups are cyclic, read off Legendre symbols
    primes = [3, 5, 7, 11, 13, 17, 19, 23, 29]
    for p, q in itertools.combinations(primes, 2):
        ext = _quadratic_pair(p, q)
        both_cyclic = not qr_decomposition_noncyclic(p, q) and not qr_decomposition_noncyclic(q, p)
        assert hnp_holds(ext) == (not both_cyclic)


def _quadratic_pair(p, q):
    """The map (Z/pq)* -> V4 sending the p-part to e1 and the q-part to e2
    through their quadratic characters."""
    from hnpcount.dirichlet import unit_group

    U = unit_group(p * q)
    imgs = []
    for prime in U.primes:
        imgs.append((1, 0) if prime == p else (0, 1))
    return GExtension.from_images(V4, p * q, imgs)


def test_v4_xor_and_audit():
    for ext in enumerate_extensions(V4, 10**4):
        assert hnp_holds(ext) != wa_holds(ext)
        knot_image(ext, audit_upto=1000)


@pytest.mark.parametrize("G, B", [(V4, 10**4), (C2C4, 10**7), (FinAbGroup((3, 3)), 10**6)])
def test_fast_classifier_matches_definition(G, B):
    recs = scan_records(G, B)
    S = default_S(G)
    t = G.structure.t
    direct = []
    for ext in enumerate_extensions(G, B):
        lam = all(lambda_v_test(ext, p, 1, t, S) for p in ext.ramified_primes if p not in S)
        direct.append((ext.discriminant, hnp_holds(ext), wa_holds(ext), lam))
    assert Counter(recs) == Counter(direct)


@pytest.mark.parametrize("G, B", [(V4, 10**5), (C2C4, 10**7)])
def test_wa_implies_lambda(G, B):
    st_ = G.structure
    S = default_S(G)
    for ext in enumerate_extensions(G, B):
        if not wa_holds(ext):
            continue
        for i, j in itertools.permutations(range(1, st_.t + 1), 2):
            if st_.exponents[i - 1] > st_.exponents[j - 1]:
                continue
            for p in ext.ramified_primes:
                if p not in S:
                    assert lambda_v_test(ext, p, i, j, S)


def test_density_scan_rows():
    rows = density_scan(V4, [100, 10**4, 10**5])
    assert rows[0] == DensityRow(100, 0, 0, 0, 0)
    assert (rows[1].total, rows[1].hnp_fail, rows[1].wa_hold) == (282, 30, 30)
    assert (rows[2].total, rows[2].hnp_fail, rows[2].wa_hold) == (1458, 180, 180)
    for r in rows[1:]:
        for x in (r.hnp_fail_ratio, r.wa_hold_ratio, r.lambda_ratio):
            assert 0 <= x <= 1
        assert r.hnp_fail + r.wa_hold == 2 * r.hnp_fail
    assert rows[0].hnp_fail_ratio is None


def test_density_parallel_matches_serial():
    a = density_scan(C2C4, [10**6, 10**7], workers=1)
    b = density_scan(C2C4, [10**6, 10**7], workers=4)
    assert a == b


def test_density_refuses_cyclic_sylow():
    with pytest.raises(GroupSpecError):
        density_scan(FinAbGroup.parse("C4"), [100])


def test_density_csv():
    text = density_csv(density_scan(V4, [10**4]))
    header, row = text.strip().split("\n")
    assert header == "B,total,hnp_fail,wa_hold,lambda_hold,hnp_fail_ratio,wa_hold_ratio,lambda_ratio"
    fields = row.split(",")
    assert fields[:5] == ["10000", "282", "30", "30", "196"]
    assert float(fields[5]) == 30 / 282


def test_trend_rule():
    assert trend_non_increasing([0.5, 0.4, 0.3])
    assert trend_non_increasing([0.5, 0.52, 0.3])
    assert not trend_non_increasing([0.5, 0.6, 0.3])
    assert not trend_non_increasing([0.5, 0.52, 0.53])
    assert trend_non_increasing([None, 0.2, None])


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6))
def test_trend_accepts_sorted(values):
    assert trend_non_increasing(sorted(values, reverse=True))
