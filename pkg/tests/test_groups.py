import itertools
from math import gcd, prod

import pytest
from conftest import brute_subgroups
from hypothesis import given
from hypothesis import strategies as st

from hnpcount.groups import (
    FinAbGroup,
    GroupSpecError,
    GroupTooLargeError,
    NotContainedError,
    abelian_groups,
    exterior_square,
    induced_wedge_image,
    invariant_type,
    moebius,
    q_rank,
    quotient_type,
    smith_normal_form,
    subgroups,
)


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def det(M):
    if not M:
        return 1
    return sum((-1) ** j * M[0][j] * det([r[:j] + r[j + 1 :] for r in M[1:]]) for j in range(len(M)))


# ------------------------------------------------------------ Smith form


@pytest.mark.parametrize(
    "A, diag",
    [([[2, 0], [0, 4]], [2, 4]), ([[1]], [1]), ([[4, 2], [2, 4]], [2, 6])],
)
def test_smith_examples(A, diag):
    d, U, V, D = smith_normal_form(A)
    assert d == diag
    assert matmul(matmul(U, A), V) == D


def test_smith_empty():
    d, U, V, D = smith_normal_form([])
    assert d == []


@given(
    st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-30, 30), min_size=n, max_size=n), min_size=1, max_size=4)
    )
)
def test_smith_properties(A):
    d, U, V, D = smith_normal_form(A)
    assert matmul(matmul(U, A), V) == D
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            if i != j:
                assert x == 0
    nz = [x for x in d if x]
    assert all(x > 0 for x in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    # zeros come last
    assert d[: len(nz)] == nz


# ------------------------------------------------------------ parsing


def test_parse_canonical():
    assert FinAbGroup.parse("C4xC2").cyclic_orders == (2, 4)
    assert FinAbGroup.parse("C6") == FinAbGroup.parse("C3xC2")
    G = FinAbGroup.parse("C3xC3xC5")
    assert G.q_small == 3
    assert G.structure.exponents == (1, 1)
    assert FinAbGroup.parse("C1").order == 1


@pytest.mark.parametrize("spec", ["C0", "D4", "C2*C2", "x", "C-2"])
def test_parse_rejects(spec):
    with pytest.raises(GroupSpecError):
        FinAbGroup.parse(spec)


def test_theorem_shape_requires_noncyclic_sylow():
    with pytest.raises(GroupSpecError):
        FinAbGroup.parse("C4").require_theorem_shape()
    st_ = FinAbGroup.parse("C2xC4").require_theorem_shape()
    assert (st_.Q, st_.t, st_.exponents) == (2, 2, (1, 2))


@given(st.lists(st.integers(1, 12), min_size=0, max_size=4))
def test_canonical_structure_invariants(orders):
    G = FinAbGroup.canonical(orders)
    assert G.order == prod(orders)
    if G.order == 1:
        return
    Q = G.q_small
    assert G.order % Q == 0
    s = G.structure
    for k in s.q_indices:
        d = G.cyclic_orders[k]
        assert d == Q ** round(__import__("math").log(d, Q))
    for k in s.m_indices:
        assert gcd(G.cyclic_orders[k], Q) == 1
    assert list(s.exponents) == sorted(s.exponents)
    assert invariant_type(G.cyclic_orders) == invariant_type(orders)


# ------------------------------------------------------------ Moebius


@pytest.mark.parametrize(
    "orders, mu", [((), 1), ((2,), -1), ((3, 3), 3), ((4,), 0), ((2, 2, 2), -8), ((6,), 1), ((2, 3, 3), -3)]
)
def test_moebius_values(orders, mu):
    assert moebius(FinAbGroup(orders)) == mu


def _groups_upto(n):
    return [G for k in range(1, n + 1) for G in (abelian_groups(k) if k > 1 else [FinAbGroup(())])]


def test_moebius_multiplicative():
    gs = _groups_upto(36)
    for A, B in itertools.product(gs, repeat=2):
        if A.order * B.order > 36 or gcd(A.order, B.order) != 1:
            continue
        AB = FinAbGroup(A.cyclic_orders + B.cyclic_orders)
        assert moebius(AB) == moebius(A) * moebius(B)


def _surjections_direct(X, A):
    """Count surjective homs X -> A by enumerating generator images."""
    choices = [[a for a in A.elements() if d % A.element_order(a) == 0] for d in X.cyclic_orders]
    n = 0
    for imgs in itertools.product(*choices):
        if A.subgroup(list(imgs)).is_whole():
            n += 1
    return n


def test_surjection_count_by_moebius():
    gs = _groups_upto(16)
    for X in gs:
        for A in gs:
            direct = _surjections_direct(X, A)
            via = 0
            for B in subgroups(A):
                homs = prod(B.torsion(d).order for d in X.cyclic_orders)
                via += moebius(quotient_type(A, B)) * homs
            assert direct == via, (X, A)


# ------------------------------------------------------------ ranks


@pytest.mark.parametrize("orders, Q, r", [((), 2, 0), ((12, 2), 2, 2), ((3, 3, 9), 3, 3), ((5,), 2, 0)])
def test_q_rank(orders, Q, r):
    assert q_rank(FinAbGroup(orders), Q) == r


# ------------------------------------------------------------ subgroups


@pytest.mark.parametrize(
    "orders, n", [((5,), 2), ((2, 2), 5), ((2, 4), 8), ((3, 3), 6), ((2, 2, 2), 16), ((4, 4), 15), ((2, 8), 11)]
)
def test_subgroup_counts(orders, n):
    G = FinAbGroup(orders)
    subs = subgroups(G)
    assert len(subs) == n
    assert len(set(subs)) == n


@pytest.mark.parametrize("orders", [(2, 2), (2, 4), (3, 3), (2, 6), (4, 4), (2, 2, 2)])
def test_subgroups_match_brute_force(orders):
    G = FinAbGroup(orders)
    ours = {frozenset(H.elements()) for H in subgroups(G)}
    assert ours == brute_subgroups(orders)


def test_subgroup_cap():
    with pytest.raises(GroupTooLargeError):
        subgroups(FinAbGroup((2, 2, 2, 2)), cap=10)


group_strategy = st.lists(st.sampled_from([2, 3, 4, 6, 8, 9]), min_size=1, max_size=3).filter(
    lambda o: prod(o) <= 72
)


@given(group_strategy, st.data())
def test_canonical_basis_unique(orders, data):
    G = FinAbGroup(orders)
    elems = G.elements()
    gens = data.draw(st.lists(st.sampled_from(elems), max_size=3))
    H = G.subgroup(gens)
    # any other generating set of the same subgroup reduces to the same basis
    extra = data.draw(st.lists(st.sampled_from(H.elements()), max_size=3))
    H2 = G.subgroup(list(reversed(gens)) + extra)
    assert H2.basis == H.basis and H2 == H
    # idempotence
    assert G.subgroup(H.generators()).basis == H.basis
    assert H.order == len(H.elements())
    assert H.order * quotient_type(G, H).order == G.order


@given(group_strategy, st.data())
def test_lattice_operations(orders, data):
    G = FinAbGroup(orders)
    elems = G.elements()
    A = G.subgroup(data.draw(st.lists(st.sampled_from(elems), max_size=2)))
    B = G.subgroup(data.draw(st.lists(st.sampled_from(elems), max_size=2)))
    meet, join = A & B, A.join(B)
    assert set(meet.elements()) == set(A.elements()) & set(B.elements())
    assert meet <= A <= join and B <= join
    assert join.order * meet.order == A.order * B.order


# ------------------------------------------------------------ quotients


def test_quotient_examples():
    G = FinAbGroup((2, 4))
    assert quotient_type(G, G.whole()).order == 1
    assert quotient_type(G, G.torsion(2)).cyclic_orders == (2,)
    V = FinAbGroup((2, 2))
    assert quotient_type(V, V.subgroup([(1, 0)])).cyclic_orders == (2,)
    with pytest.raises(NotContainedError):
        quotient_type(G, V.whole())


def test_quotient_by_coset_count():
    G = FinAbGroup((2, 4, 3))
    for H in subgroups(G):
        Hs = set(H.elements())
        cosets = {frozenset(G.add(x, h) for h in Hs) for x in G.elements()}
        assert len(cosets) == quotient_type(G, H).order


# ------------------------------------------------------------ exterior square


def test_exterior_square_examples():
    assert exterior_square(FinAbGroup((6,))).group.order == 1
    assert exterior_square(FinAbGroup((2, 4))).group.cyclic_orders == (2,)
    W = exterior_square(FinAbGroup((2, 2, 2)))
    # one generator per pair i < j, i.e. dim of alternating forms on F_2^3
    assert W.group.cyclic_orders == (2, 2, 2)
    assert W.pair_labels == ((0, 1), (0, 2), (1, 2))


def test_wedge_images_examples():
    G = FinAbGroup((2, 4))
    assert induced_wedge_image(G.subgroup([(1, 1)])).is_trivial()
    assert induced_wedge_image(G.torsion(2)).is_trivial()
    V = FinAbGroup((2, 2))
    assert induced_wedge_image(V.whole()).is_whole()
    # brute force: some pair of elements wedges to the generator
    W = exterior_square(V)
    assert any(W.wedge(a, b) == (1,) for a in V.elements() for b in V.elements())


@given(group_strategy, st.data())
def test_wedge_functorial(orders, data):
    G = FinAbGroup(orders)
    elems = G.elements()
    g1 = data.draw(st.lists(st.sampled_from(elems), max_size=2))
    g2 = data.draw(st.lists(st.sampled_from(elems), max_size=2))
    H1 = G.subgroup(g1)
    H2 = G.subgroup(g1 + g2)
    assert induced_wedge_image(H1) <= induced_wedge_image(H2)
    assert induced_wedge_image(G.whole()).is_whole()
    if len(g1) <= 1:
        assert induced_wedge_image(H1).is_trivial()


@given(group_strategy, st.data())
def test_wedge_bilinear_alternating(orders, data):
    G = FinAbGroup(orders)
    W = exterior_square(G)
    x, y, z = (data.draw(st.sampled_from(G.elements())) for _ in range(3))
    assert not any(W.wedge(x, x))
    assert W.wedge(G.add(x, y), z) == W.group.add(W.wedge(x, z), W.wedge(y, z))
    assert W.wedge(x, y) == W.group.neg(W.wedge(y, x))
