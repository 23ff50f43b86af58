import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import legendre_symbol, primerange

from hnpcount.dirichlet import GExtension
from hnpcount.groups import FinAbGroup
from hnpcount.lattice import condition_subgroup
from hnpcount.local_fourier import (
    UNIT,
    UNIT_POWER,
    DualLocalElement,
    GlobalDualElement,
    LocalCharacter,
    LocalCondition,
    LocalPlace,
    LocalWeight,
    UnsupportedCase,
    case1_q_coefficient,
    dual_elements,
    f_v,
    ft_bruteforce,
    ft_graded,
    ft_structured,
    local_characters,
    membership,
    nu_eta_x,
    nu_k,
    pairing,
    phi_local,
    splitting_indicator,
    trivial_q_coefficient,
)

V4 = FinAbGroup((2, 2))
C2C4 = FinAbGroup((2, 4))
C3C3 = FinAbGroup((3, 3))
GROUPS = [V4, C2C4, C3C3]


def test_local_place():
    assert LocalPlace.of(7).primitive_root == 3
    assert LocalPlace.of(41).primitive_root == 6
    with pytest.raises(ValueError):
        LocalPlace.of(9)


def test_character_validation():
    H = C2C4.whole()
    with pytest.raises(ValueError):
        LocalCharacter(H, LocalPlace.of(3), (0, 1), (0, 0))  # order 4 does not divide 2
    LocalCharacter(H, LocalPlace.of(5), (0, 1), (0, 0))
    J = condition_subgroup(C2C4)
    with pytest.raises(ValueError):
        LocalCharacter(J, LocalPlace.of(5), (0, 0), (0, 1))


def test_dual_element_reduction():
    H = C2C4.whole()
    x = DualLocalElement(H, LocalPlace.of(7), (3, 5), (3, 5))
    # unit part mod gcd(c, 6) = (2, 2), valuation mod (2, 4)
    assert x.unit == (1, 1) and x.val == (1, 1)


# ------------------------------------------------------------ f_v and Phi


def test_f_v_examples():
    cond = LocalCondition.standard(C2C4)
    H = C2C4.whole()
    place = LocalPlace.of(5)
    assert f_v(LocalCharacter(H, place, (0, 0), (0, 1)), cond) == 1
    assert f_v(LocalCharacter(H, place, (1, 0), (0, 1)), cond) == 0
    assert f_v(LocalCharacter(H, place, (1, 0), (0, 2)), cond) == 1
    with pytest.raises(ValueError):
        cond.value(2, (1, 0), (0, 1))


def test_phi_local_examples():
    place = LocalPlace.of(5)
    assert phi_local(LocalCharacter(V4.whole(), place, (0, 0), (1, 0)), V4.whole()) == 1
    assert phi_local(LocalCharacter(V4.whole(), place, (1, 0), (0, 0)), V4.whole()) == 5**2
    assert phi_local(LocalCharacter(C2C4.whole(), place, (0, 1), (0, 0)), C2C4.whole()) == 5**6


def test_pairing_examples():
    H = FinAbGroup((2,)).whole()
    place = LocalPlace.of(7)
    x0 = DualLocalElement.zero(H, place)
    chi = LocalCharacter(H, place, (1,), (0,))
    assert pairing(chi, x0) == 1
    x = DualLocalElement(H, place, (1,), (0,))
    assert abs(pairing(chi, x) + 1) < 1e-15
    assert pairing(LocalCharacter(H, place, (0,), (0,)), x) == 1


def _unit_class(A, place, u):
    """Dual element u (x) (first generator), unit part from the discrete log."""
    q, g = place.q, place.primitive_root
    k = next(k for k in range(q - 1) if pow(g, k, q) == u % q)
    r = len(A.invariant_basis()[1])
    return DualLocalElement(A, place, (k,) + (0,) * (r - 1), (0,) * r)


def test_membership_legendre_oracle():
    A = FinAbGroup((2,)).whole()
    for q in primerange(3, 60):
        place = LocalPlace.of(q)
        for u in range(1, q):
            x = _unit_class(A, place, u)
            assert membership(x, UNIT, A, 2)
            assert membership(x, UNIT_POWER, A, 2) == (legendre_symbol(u, q) == 1)
    x = _unit_class(A, LocalPlace.of(7), 2)
    assert membership(x, UNIT_POWER, A, 2)  # 2 = 3^2 mod 7


def test_membership_cubic_oracle():
    A = FinAbGroup((3,)).whole()
    for q in primerange(5, 80):
        place = LocalPlace.of(q)
        for u in range(1, q):
            x = _unit_class(A, place, u)
            cubic = pow(u, (q - 1) // 3, q) == 1 if q % 3 == 1 else True
            assert membership(x, UNIT_POWER, A, 3) == cubic


def test_membership_rejects_valuation():
    A = V4.whole()
    x = DualLocalElement(A, LocalPlace.of(7), (0, 0), (1, 0))
    assert not membership(x, UNIT, A)
    assert not membership(x, UNIT_POWER, A)


# ------------------------------------------------------------ transforms


def test_transform_small_values():
    H = FinAbGroup((2,)).whole()
    for q in (3, 5, 7):
        x = DualLocalElement.zero(H, LocalPlace.of(q))
        w = LocalWeight.trivial(H)
        for s in (0.5, 1.3, 2 + 1j):
            assert abs(ft_bruteforce(x, s, w) - (1 + q ** (-s))) < 1e-12
    for G in GROUPS:
        A = G.whole()
        for q in (5, 7, 13):
            if G.order % q == 0:
                continue
            place = LocalPlace.of(q)
            x = DualLocalElement.zero(A, place)
            n_unit_chars = sum(1 for x_ in A.elements() if (q - 1) % G.element_order(x_) == 0)
            assert abs(ft_bruteforce(x, 0, LocalWeight.trivial(A)) - n_unit_chars) < 1e-9


def _weights(G, q, rng_index):
    """(target, weight, vanishes off the unit dual) for the four kinds of
    local weight: trivial, untwisted with f, twisted with and without f."""
    H = G.whole()
    cond = LocalCondition.standard(G)
    J = H & cond.L
    place = LocalPlace.of(q)
    chars = local_characters(H, place)
    eta = chars[rng_index % len(chars)]
    return [
        (H, LocalWeight.trivial(H), True),
        (H, LocalWeight.untwisted(H, cond), False),
        (J, LocalWeight(H.order, cond, eta), True),
        (J, LocalWeight(H.order, None, eta), True),
    ]


small_primes = [p for p in primerange(3, 45)]


@settings(max_examples=25)
@given(
    st.sampled_from(GROUPS),
    st.sampled_from(small_primes),
    st.integers(0, 10**6),
    st.integers(0, 10**6),
    st.complex_numbers(min_magnitude=0.1, max_magnitude=2.0).filter(lambda z: z.real > 0.05),
)
def test_structured_equals_bruteforce(G, q, k_eta, k_x, s):
    if G.order % q == 0:
        return
    cond = LocalCondition.standard(G)
    for A, w, vanishes in _weights(G, q, k_eta):
        xs = dual_elements(A, LocalPlace.of(q))
        x = xs[k_x % len(xs)]
        assert abs(ft_structured(x, s, w) - ft_bruteforce(x, s, w)) < 1e-9
        g = ft_graded(x, w)
        if vanishes and any(x.val):
            assert not g.nonzero_orders()
        if not vanishes and not membership(x, UNIT, A & cond.L):
            # the untwisted transform with f vanishes off O* (x) (H meet L)^
            assert not g.nonzero_orders()


def test_case1_closed_form_and_realness():
    for G in GROUPS:
        cond = LocalCondition.standard(G)
        H = G.whole()
        Q = G.q_small
        q = next(p for p in primerange(3, 100) if p % Q == 1 and G.order % p)
        place = LocalPlace.of(q)
        for x in dual_elements(H, place):
            g = ft_graded(x, LocalWeight.untwisted(H, cond))
            c = g.coefficient(Q)
            assert c.is_rational()
            assert abs(complex(c).imag) < 1e-12
            assert c.to_fraction() == case1_q_coefficient(x, cond)
            if not membership(x, UNIT, H & cond.L, Q):
                assert not g.nonzero_orders()
            if membership(x, UNIT, H, Q):
                gt = ft_graded(x, LocalWeight.trivial(H))
                assert gt.coefficient(Q).to_fraction() == trivial_q_coefficient(x, Q)


def test_trivial_weight_leading_shape():
    # at x = 0 the transform of 1 / Phi^s starts 1 + (Q^beta - 1) q^{-alpha s}
    for G in GROUPS:
        H = G.whole()
        Q = G.q_small
        q = next(p for p in primerange(3, 100) if p % Q == 1 and G.order % p)
        g = ft_graded(DualLocalElement.zero(H, LocalPlace.of(q)), LocalWeight.trivial(H))
        beta = len([d for d in G.cyclic_orders if d % Q == 0])
        assert g.coefficient(1).to_fraction() == 1
        assert g.coefficient(Q).to_fraction() == Q**beta - 1


def test_closed_form_preconditions():
    cond = LocalCondition.standard(C2C4)
    J = condition_subgroup(C2C4)
    x = DualLocalElement.zero(J, LocalPlace.of(5))
    with pytest.raises(ValueError):
        case1_q_coefficient(x, cond)


# ------------------------------------------------------------ global dual elements


def test_localize_has_zero_valuation():
    J = C2C4.whole()
    for x in GlobalDualElement.all_elements(J, (2, 3))[:50]:
        for q in (5, 7, 11, 13):
            y = x.localize(q)
            assert not any(y.val)
    with pytest.raises(ValueError):
        GlobalDualElement.zero(J, (2,)).localize(2)


def test_kummer_degrees():
    for G, S in ((V4, (2, 3)), (C2C4, (2, 5)), (C3C3, (3, 7))):
        J = G.whole()
        Q = G.q_small
        beta = 2
        v = G.e(1) if Q == 3 else (1, 0)
        for x in GlobalDualElement.all_elements(J, S):
            r = x.kummer_rank()
            assert 0 <= r <= beta
            assert x.degree_kx1_k0(v) in (1, Q)
            assert (x.degree_kx_k0() // x.degree_kx1_k0(v)) in [Q**k for k in range(beta)]


def test_splitting_examples():
    J = V4.whole()
    x2 = GlobalDualElement(J, (2,), ((0, 0), (1, 0)))
    xm1 = GlobalDualElement(J, (2,), ((1, 0), (0, 0)))
    for p in primerange(3, 300):
        assert splitting_indicator(x2, p, "k0") == 1
        assert splitting_indicator(x2, p, "kx") == (legendre_symbol(2, p) == 1)
        assert splitting_indicator(xm1, p, "kx") == (legendre_symbol(p - 1, p) == 1)
        assert splitting_indicator(x2, p, "k0+kx") == splitting_indicator(x2, p, "kx")
    assert splitting_indicator(x2, 7, "kx") == 1
    K = C3C3.whole()
    x3 = GlobalDualElement(K, (3,), ((0, 0), (1, 0)))
    assert splitting_indicator(x3, 7, "k0") == 1
    for p in primerange(5, 300):
        cubic = p % 3 == 1 and pow(3, (p - 1) // 3, p) == 1
        assert splitting_indicator(x3, p, "kx") == cubic
    with pytest.raises(ValueError):
        splitting_indicator(x2, 7, "kz")


def test_splitting_keta():
    J = condition_subgroup(C2C4)
    eta = GExtension.from_images(C2C4, 5, [(0, 1)])
    x = GlobalDualElement.zero(J, (2,))
    for p in primerange(3, 200):
        if p == 5:
            continue
        # the Frobenius (image of p) lies in J iff p is a square mod 5
        assert splitting_indicator(x, p, "keta", eta=eta) == (legendre_symbol(p, 5) == 1)


# ------------------------------------------------------------ nu


def test_nu_trivial_twist_at_zero():
    for G in (V4, C2C4, C3C3):
        J = G.whole() if G != C2C4 else condition_subgroup(C2C4)
        H = G.whole()
        x = GlobalDualElement.zero(J, (G.q_small,))
        assert nu_eta_x(None, x, H, v=(1, 0) if G.q_small == 2 else G.e(1)) == nu_k(H, G.q_small)
    assert nu_k(V4, 2) == 3 and nu_k(C3C3, 3) == 4


def test_nu_bounds_and_equality_case():
    H = C2C4.whole()
    J = condition_subgroup(C2C4)
    eta_out = GExtension.from_images(C2C4, 5, [(0, 1)])
    eta_in = GExtension.from_images(C2C4, 5, [(0, 2)])
    top = nu_k(H, 2)
    for x in GlobalDualElement.all_elements(J, (2, 3)):
        for eta in (None, eta_in, eta_out):
            nu = nu_eta_x(eta, x, H)
            assert 0 <= nu <= top
            equal = (eta is None or eta.image <= J) and x.kummer_rank() == 0
            assert (nu == top) == equal


def test_nu_unsupported():
    G = C3C3
    J = G.subgroup([G.e(1)])
    eta = GExtension.from_images(G, 7, [G.e(2)])
    with pytest.raises(UnsupportedCase):
        nu_eta_x(eta, GlobalDualElement.zero(J, (3,)), G.whole(), v=G.e(1))
