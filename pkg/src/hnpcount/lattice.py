"""Subgroup-lattice constructions used by the counting argument.

Indices of the Q-part generators e_1..e_t are 1-based throughout, matching
the usual way of writing G = M x Z/Q^{a_1} x ... x Z/Q^{a_t}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .groups import (
    FinAbGroup,
    GroupSpecError,
    Subgroup,
    exterior_square,
    moebius,
    q_rank,
    quotient_type,
    relative_quotient_type,
    subgroups,
)
from .numtheory import isprime


def distinguished_subgroup(G: FinAbGroup, j: int, basis=None) -> Subgroup:
    """<M, e_1, ..., e_j^Q, ..., e_t>, optionally for another e-basis."""
    st = G.require_theorem_shape()
    es = list(basis) if basis is not None else [G.e(k) for k in range(1, st.t + 1)]
    if not 1 <= j <= len(es):
        raise IndexError(f"j={j} out of range")
    gens = G.m_generators() + [G.scale(e, st.Q) if k == j else e for k, e in enumerate(es, start=1)]
    return G.subgroup(gens)


def condition_subgroup(G: FinAbGroup) -> Subgroup:
    """L = <M, e_1, ..., e_{t-1}, e_t^Q>."""
    return distinguished_subgroup(G, G.require_theorem_shape().t)


def v_element(G: FinAbGroup, i: int = 1):
    """e_i^{Q^{a_i - 1}}, the order-Q element inside the i-th factor."""
    st = G.structure
    return G.scale(G.e(i), st.Q ** (st.exponents[i - 1] - 1))


def parse_elements(G: FinAbGroup, text: str) -> list:
    """Parse "e1,e2^2" style lists (products written with '*') into elements."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        x = G.identity
        for factor in item.split("*"):
            factor = factor.strip()
            base, _, power = factor.partition("^")
            try:
                k = int(power) if power else 1
                idx = int(base[1:])
            except ValueError:
                raise GroupSpecError(f"cannot parse element {factor!r}") from None
            if base.startswith("e"):
                if not 1 <= idx <= G.structure.t:
                    raise GroupSpecError(f"no generator {base}")
                g = G.e(idx)
            elif base.startswith("m"):
                gens = G.m_generators()
                if not 1 <= idx <= len(gens):
                    raise GroupSpecError(f"no M generator {base}")
                g = gens[idx - 1]
            else:
                raise GroupSpecError(f"cannot parse element {factor!r}")
            x = G.add(x, G.scale(g, k))
        out.append(x)
    return out


# -------------------------------------------------------------- W partition


def beta(A, Q: int) -> int:
    return q_rank(A, Q)


def in_W(G: FinAbGroup, H: Subgroup) -> bool:
    Q = G.q_small
    return q_rank(H, Q) == q_rank(G, Q) and moebius(quotient_type(G, H)) != 0


def w_partition(G: FinAbGroup, L: Subgroup):
    """(W, W1, W2) with W1 the members not inside L and W2 those inside L."""
    W = [H for H in subgroups(G) if in_W(G, H)]
    W1 = [H for H in W if not H <= L]
    W2 = [H for H in W if H <= L]
    return W, W1, W2


def pairing_phi(G: FinAbGroup, L: Subgroup, H: Subgroup) -> Subgroup:
    """H -> H meet L, defined on W1."""
    if not in_W(G, H) or H <= L:
        raise ValueError("pairing_phi needs H in W1")
    return H & L


def torsion_quotient_size(L: Subgroup, J: Subgroup, Q: int) -> int:
    """|(L/J)[Q]|."""
    return Q ** q_rank(relative_quotient_type(L, J), Q)


def fiber(G: FinAbGroup, L: Subgroup, J: Subgroup) -> list:
    """The subgroups <J, e_t + l> for l in L with Q l in J, without repeats."""
    if not in_W(G, J) or not J <= L:
        raise ValueError("fiber needs J in W2")
    st = G.require_theorem_shape()
    et = G.e(st.t)
    seen = []
    for ell in L.elements():
        if G.scale(ell, st.Q) not in J:
            continue
        H = J.join(G.add(et, ell))
        if H not in seen:
            seen.append(H)
    return seen


# ------------------------------------------------------------- Upsilon step


@dataclass(frozen=True)
class UpsilonReduction:
    group: FinAbGroup
    upsilon: Subgroup
    generators: tuple
    i: int
    j: int

    def target_subgroup(self) -> Subgroup:
        return distinguished_subgroup(self.group, self.j, self.generators)

    def lifted_set(self) -> list:
        """All g with e_i wedge g in Upsilon, for the new e_i."""
        W = exterior_square(self.group)
        ei = self.generators[self.i - 1]
        return [g for g in self.group.elements() if W.wedge(ei, g) in self.upsilon]


def _character_with_kernel(A: Subgroup, p: int):
    """A function on the ambient group of A, valued in Z/p, with kernel A.

    A must have prime index p.
    """
    WG = A.ambient
    g = next(b for b in (WG.basis_element(k) for k in range(WG.rank)) if b not in A)

    def lam(x):
        for c in range(p):
            if WG.add(x, WG.scale(g, -c)) in A:
                return c
        raise AssertionError("index is not prime")

    return lam


def upsilon_reduction(G: FinAbGroup, upsilon: Subgroup) -> UpsilonReduction:
    """New e-basis and indices (i, j) so that e_i wedge g in Upsilon forces
    g into <M, e_1, ..., e_j^Q, ..., e_t>.

    G must look like M x (Z/Q)^{t-1} x Z/Q^a with M cyclic of order prime to Q.
    """
    st = G.require_theorem_shape()
    Q, t = st.Q, st.t
    if len(st.m_indices) > 1:
        raise GroupSpecError("M must be cyclic")
    if any(a != 1 for a in st.exponents[:-1]):
        raise GroupSpecError("all but the last Q-part factor must have order Q")
    WS = exterior_square(G)
    if upsilon.ambient != WS.group:
        raise ValueError("Upsilon must be a subgroup of the exterior square of G")
    index = WS.group.order // upsilon.order
    if index == 1:
        raise ValueError("Upsilon must be a proper subgroup")
    # maximal means prime index
    if not isprime(index):
        raise ValueError("Upsilon must be a maximal proper subgroup")
    lam = _character_with_kernel(upsilon, index)
    es = [G.e(k) for k in range(1, t + 1)]
    for k, l in itertools.combinations(range(t - 1), 2):
        if lam(WS.wedge(es[k], es[l])):
            ek, el = es[k], es[l]
            cl = lam(WS.wedge(ek, el))
            inv = pow(cl, -1, Q)
            rest = []
            for m in range(t):
                if m in (k, l):
                    continue
                cm = lam(WS.wedge(ek, es[m]))
                rest.append(G.add(es[m], G.scale(el, -cm * inv)))
            return UpsilonReduction(G, upsilon, tuple([el, ek] + rest), 2, 1)
    for i in range(t - 1):
        if lam(WS.wedge(es[i], es[t - 1])):
            return UpsilonReduction(G, upsilon, tuple(es), i + 1, t)
    raise AssertionError("no wedge generator outside Upsilon")


def maximal_subgroups(A: FinAbGroup) -> list:
    """Kernels of the nonzero characters A -> Z/p, one per kernel."""
    from .numtheory import factorize

    out = []
    if A.order == 1:
        return out
    for p in factorize(A.order):
        cols = [k for k, d in enumerate(A.cyclic_orders) if d % p == 0]
        for coeffs in itertools.product(range(p), repeat=len(cols)):
            nz = [c for c in coeffs if c]
            if not nz or nz[0] != 1:
                continue
            pivot = cols[coeffs.index(1)]
            gens = [A.scale(A.basis_element(pivot), p)]
            for k in range(A.rank):
                if k == pivot:
                    continue
                e = A.basis_element(k)
                c = coeffs[cols.index(k)] if k in cols else 0
                gens.append(A.add(e, A.scale(A.basis_element(pivot), -c)))
            out.append(A.subgroup(gens))
    return out


# -------------------------------------------------------- exhaustive checks


def check_pairing_lemma(G: FinAbGroup) -> dict:
    """Verify the W1 -> W2 pairing statements for the standard L of G.

    Closure of W under intersection is checked for every G; the pairing
    itself needs a_t >= 2 (otherwise L has smaller Q-rank and W2 is empty).
    Returns a summary dict; raises AssertionError on the first failure.
    """
    st = G.require_theorem_shape()
    Q = st.Q
    L = condition_subgroup(G)
    W, W1, W2 = w_partition(G, L)
    for A, B in itertools.combinations(W, 2):
        assert in_W(G, A & B), f"W not closed under intersection: {A}, {B}"
    if st.exponents[-1] < 2:
        return {"W": len(W), "W1": len(W1), "W2": len(W2), "pairing": False}
    images = set()
    for H in W1:
        J = pairing_phi(G, L, H)
        assert J in W2, f"phi({H}) not in W2"
        assert H.order // J.order == Q, f"H/(H meet L) not of order Q for {H}"
        assert quotient_type(G, H) == relative_quotient_type(L, J), "L/(H meet L) differs from G/H"
        images.add(J)
    assert images == set(W2), "phi is not onto W2"
    for J in W2:
        fib = fiber(G, L, J)
        preimage = [H for H in W1 if (H & L) == J]
        assert set(fib) == set(preimage), f"fiber mismatch at {J}"
        assert len(fib) == torsion_quotient_size(L, J, Q), f"fiber size mismatch at {J}"
        for H in fib:
            assert (H & L) == J
            assert H.order == Q * J.order
        mu_g = moebius(quotient_type(G, J))
        mu_l = moebius(relative_quotient_type(L, J))
        assert mu_g == -torsion_quotient_size(L, J, Q) * mu_l, f"Moebius identity fails at {J}"
    return {"W": len(W), "W1": len(W1), "W2": len(W2), "pairing": True}


def check_relax_wa(G: FinAbGroup) -> int:
    """For a_i <= a_j: v_i wedge x = 0 forces Q | b_j, and every wedge-trivial
    subgroup through v_i sits inside the j-th distinguished subgroup.

    Returns the number of (i, j, D) triples examined.
    """
    st = G.require_theorem_shape()
    WS = exterior_square(G)
    Q, t = st.Q, st.t
    elems = G.elements()
    subs = subgroups(G)
    flat = [D for D in subs if WS.image(D).is_trivial()]
    checked = 0
    for i, j in itertools.permutations(range(1, t + 1), 2):
        if st.exponents[i - 1] > st.exponents[j - 1]:
            continue
        v = v_element(G, i)
        col = st.q_indices[j - 1]
        for x in elems:
            if not any(WS.wedge(v, x)):
                assert x[col] % Q == 0, f"v_{i} wedge {x} trivial but Q does not divide b_{j}"
        target = distinguished_subgroup(G, j)
        for D in flat:
            if v in D:
                assert D <= target, f"{D} escapes the distinguished subgroup for ({i},{j})"
                checked += 1
    return checked


def check_upsilon_reduction(G: FinAbGroup) -> int:
    """Run upsilon_reduction for every maximal Upsilon and verify its output."""
    st = G.require_theorem_shape()
    Q, t = st.Q, st.t
    a = st.exponents[-1]
    WS = exterior_square(G)
    count = 0
    for ups in maximal_subgroups(WS.group):
        red = upsilon_reduction(G, ups)
        gens = red.generators
        assert len(gens) == t
        for k, g in enumerate(gens):
            expected = Q if k < t - 1 else Q**a
            assert G.element_order(g) == expected, "generator order wrong"
        span = G.subgroup(G.m_generators() + list(gens))
        assert span.is_whole(), "new generators do not generate G"
        assert red.i <= t - 1 and red.i != red.j
        target = red.target_subgroup()
        for g in red.lifted_set():
            assert g in target, f"{g} violates the Upsilon post-condition"
        count += 1
    return count


def theorem_groups(max_order: int) -> list:
    """Canonical groups of order <= max_order with non-cyclic Q-Sylow."""
    from .groups import abelian_groups

    out = []
    for n in range(2, max_order + 1):
        for G in abelian_groups(n):
            if G.structure.t >= 2:
                out.append(G)
    return out


def is_upsilon_shape(G: FinAbGroup) -> bool:
    st = G.structure
    return st.t >= 2 and len(st.m_indices) <= 1 and all(a == 1 for a in st.exponents[:-1])
