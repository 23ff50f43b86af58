import pytest

from hnpcount.groups import FinAbGroup, GroupSpecError, exterior_square, moebius, quotient_type, subgroups
from hnpcount.lattice import (
    check_pairing_lemma,
    check_relax_wa,
    check_upsilon_reduction,
    condition_subgroup,
    distinguished_subgroup,
    fiber,
    in_W,
    is_upsilon_shape,
    maximal_subgroups,
    pairing_phi,
    parse_elements,
    theorem_groups,
    torsion_quotient_size,
    upsilon_reduction,
    v_element,
    w_partition,
)

C2C4 = FinAbGroup((2, 4))
V4 = FinAbGroup((2, 2))


def test_condition_subgroup():
    L = condition_subgroup(C2C4)
    assert L == C2C4.subgroup([(1, 0), (0, 2)])
    assert condition_subgroup(V4) == V4.subgroup([(1, 0)])
    assert v_element(C2C4, 1) == (1, 0)
    assert v_element(C2C4, 2) == (0, 2)
    assert distinguished_subgroup(C2C4, 1) == C2C4.subgroup([(0, 1)])


def test_parse_elements():
    G = FinAbGroup.parse("C3xC2xC4")
    assert parse_elements(G, "e1,e2^2") == [(0, 1, 0), (0, 0, 2)]
    assert parse_elements(G, "m1*e2") == [(1, 0, 1)]
    with pytest.raises(GroupSpecError):
        parse_elements(G, "f1")


def test_w_partition_examples():
    L = condition_subgroup(C2C4)
    W, W1, W2 = w_partition(C2C4, L)
    assert L in W2
    assert moebius(quotient_type(C2C4, L)) == -1
    for H in subgroups(C2C4):
        if H.type().cyclic_orders in ((2,), (4,)) or H.is_trivial():
            assert H not in W
    _, _, W2v = w_partition(V4, condition_subgroup(V4))
    assert W2v == []


def test_pairing_and_fiber_examples():
    L = condition_subgroup(C2C4)
    fib = fiber(C2C4, L, L)
    assert torsion_quotient_size(L, L, 2) == 1
    assert fib == [C2C4.whole()]
    assert pairing_phi(C2C4, L, C2C4.whole()) == L
    with pytest.raises(ValueError):
        pairing_phi(C2C4, L, L)
    with pytest.raises(ValueError):
        fiber(C2C4, L, C2C4.whole())


def test_fiber_brute_force():
    # every H in W1 with H meet L = J is found, for a larger group
    G = FinAbGroup((2, 2, 4))
    L = condition_subgroup(G)
    W, W1, W2 = w_partition(G, L)
    for J in W2:
        expected = {H for H in subgroups(G) if in_W(G, H) and not H <= L and (H & L) == J}
        assert set(fiber(G, L, J)) == expected


@pytest.mark.parametrize("spec", ["C2xC2", "C2xC4", "C3xC3", "C2xC2xC2", "C2xC8", "C4xC4", "C3xC2xC4"])
def test_pairing_lemma_small(spec):
    res = check_pairing_lemma(FinAbGroup.parse(spec))
    assert res["W"] >= 1


@pytest.mark.parametrize("spec", ["C2xC2", "C2xC4", "C3xC3", "C2xC2xC2", "C4xC4"])
def test_relax_wa_small(spec):
    assert check_relax_wa(FinAbGroup.parse(spec)) >= 1


def test_upsilon_examples():
    for spec in ["C2xC2", "C2xC4", "C3xC3"]:
        G = FinAbGroup.parse(spec)
        triv = exterior_square(G).group.trivial()
        red = upsilon_reduction(G, triv)
        target = red.target_subgroup()
        assert all(g in target for g in red.lifted_set())
    red = upsilon_reduction(C2C4, exterior_square(C2C4).group.trivial())
    assert (red.i, red.j) == (1, 2)


def test_upsilon_rejects_non_maximal():
    G = FinAbGroup.parse("C2xC2xC2")
    W = exterior_square(G).group
    with pytest.raises(ValueError):
        upsilon_reduction(G, W.whole())
    with pytest.raises(ValueError):
        upsilon_reduction(G, W.trivial())


@pytest.mark.parametrize("spec", ["C2xC2xC2", "C3xC3xC3", "C2xC2xC4", "C5xC2xC2"])
def test_upsilon_reduction_exhaustive(spec):
    G = FinAbGroup.parse(spec)
    assert is_upsilon_shape(G)
    assert check_upsilon_reduction(G) == len(maximal_subgroups(exterior_square(G).group))


def test_maximal_subgroups_are_prime_index():
    A = FinAbGroup((2, 2, 6))
    ms = maximal_subgroups(A)
    expected = [H for H in subgroups(A) if A.order // H.order in (2, 3)]
    assert set(ms) == set(expected)


def test_theorem_groups_upto_16():
    names = {str(G) for G in theorem_groups(16)}
    assert {"C2xC2", "C2xC4", "C3xC3", "C2xC2xC2", "C2xC8", "C4xC4", "C3xC2xC2", "C2xC2xC4"} <= names
    assert "C4" not in names and "C2xC3" not in names
