"""Local characters at tame places, the local test function f_v, and the
local Fourier transforms of f_v / Phi^s, both by direct summation and by
grading over the order d of the ramified part.

At a prime q not dividing |G| we use k_v* = O_v* x <q> with O_v* -> mu_{q-1}
cyclic, generated by the least primitive root. A character into a subgroup
A of G is a pair (ram, unram) of elements of A: the image of the primitive
root (so ram lies in A[q-1]) and the image of the uniformizer q.

Dual elements x in k_v* (x) A^ are written in the dual of an invariant basis
b_1..b_r of A (orders c_1..c_r): a unit exponent u_i modulo gcd(c_i, q-1)
and a valuation exponent w_i modulo c_i, so that
    <chi, x> = exp(2 pi i sum_i (u_i ram_i + w_i unram_i) / c_i)
with ram_i, unram_i the coordinates of ram, unram in that basis.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, pi

from .cyclo import Cyclo
from .dirichlet import GExtension, local_conductor_exponent
from .groups import FinAbGroup, Subgroup, q_rank
from .lattice import condition_subgroup, v_element
from .numtheory import dlog_mod, isprime, primitive_root, squarefree_kernel


class UnsupportedCase(NotImplementedError):
    """Raised for inputs outside the implemented scope."""


@dataclass(frozen=True)
class LocalPlace:
    q: int
    primitive_root: int

    @classmethod
    def of(cls, q: int) -> "LocalPlace":
        if not isprime(q):
            raise ValueError(f"{q} is not prime")
        return cls(q, 1 if q == 2 else primitive_root(q))


@lru_cache(maxsize=None)
def _basis(A: Subgroup) -> tuple:
    return A.invariant_basis()


@lru_cache(maxsize=None)
def _coords(A: Subgroup, x) -> tuple:
    return A.coordinates(x)


@lru_cache(maxsize=None)
def _in_cyclic(G: FinAbGroup, v, g) -> bool:
    """v in <g>."""
    return v in G.subgroup([g])


@dataclass(frozen=True)
class LocalCharacter:
    target: Subgroup
    place: LocalPlace
    ram: tuple
    unram: tuple

    def __post_init__(self):
        G = self.target.ambient
        object.__setattr__(self, "ram", G.reduce(self.ram))
        object.__setattr__(self, "unram", G.reduce(self.unram))
        if self.ram not in self.target or self.unram not in self.target:
            raise ValueError("character values must lie in the target")
        if (self.place.q - 1) % G.element_order(self.ram):
            raise ValueError("ramified part must have order dividing q - 1")

    @property
    def ramification_order(self) -> int:
        return self.target.ambient.element_order(self.ram)


@dataclass(frozen=True)
class DualLocalElement:
    target: Subgroup
    place: LocalPlace
    unit: tuple
    val: tuple

    def __post_init__(self):
        _, orders = _basis(self.target)
        if len(self.unit) != len(orders) or len(self.val) != len(orders):
            raise ValueError("need one exponent per invariant generator")
        q1 = self.place.q - 1
        object.__setattr__(self, "unit", tuple(u % gcd(c, q1) for u, c in zip(self.unit, orders)))
        object.__setattr__(self, "val", tuple(w % c for w, c in zip(self.val, orders)))

    @classmethod
    def zero(cls, A: Subgroup, place: LocalPlace) -> "DualLocalElement":
        r = len(_basis(A)[1])
        return cls(A, place, (0,) * r, (0,) * r)


def local_characters(A: Subgroup, place: LocalPlace) -> list:
    """All of Hom(k_v*, A)."""
    return [LocalCharacter(A, place, r, u) for r, u in _character_parts(A, place.q)]


@lru_cache(maxsize=None)
def _ramified_parts(A: Subgroup, q: int) -> tuple:
    G = A.ambient
    return tuple(x for x in A.elements() if (q - 1) % G.element_order(x) == 0)


@lru_cache(maxsize=None)
def _character_parts(A: Subgroup, q: int) -> tuple:
    return tuple(itertools.product(_ramified_parts(A, q), A.elements()))


def dual_elements(A: Subgroup, place: LocalPlace, units_only: bool = False) -> list:
    _, orders = _basis(A)
    q1 = place.q - 1
    us = itertools.product(*[range(gcd(c, q1)) for c in orders])
    out = []
    for u in us:
        vs = [tuple(0 for _ in orders)] if units_only else itertools.product(*[range(c) for c in orders])
        for w in vs:
            out.append(DualLocalElement(A, place, u, w))
    return out


# ------------------------------------------------------------------ pairing


def _phase_of(A: Subgroup, exps, x) -> Fraction:
    _, orders = _basis(A)
    cs = _coords(A, x)
    return sum((Fraction(e * a, c) for e, a, c in zip(exps, cs, orders)), Fraction(0))


def pairing_phase(chi: LocalCharacter, x: DualLocalElement) -> Fraction:
    """<chi, x> as a phase r with value exp(2 pi i r), r in [0, 1)."""
    if chi.target != x.target or chi.place != x.place:
        raise ValueError("character and dual element live on different groups or places")
    r = _phase_of(x.target, x.unit, chi.ram) + _phase_of(x.target, x.val, chi.unram)
    return r - (r.numerator // r.denominator)


def pairing(chi: LocalCharacter, x: DualLocalElement) -> complex:
    return cmath.exp(2j * pi * float(pairing_phase(chi, x)))


def restrict(x: DualLocalElement, R: Subgroup) -> DualLocalElement:
    """Image of x under A^ -> R^ for R a subgroup of the target A."""
    A = x.target
    if not R <= A:
        raise ValueError("restriction needs a subgroup of the target")
    _, orders = _basis(A)
    relems, rorders = _basis(R)
    unit, val = [], []
    for r, c2 in zip(relems, rorders):
        cs = _coords(A, r)
        # c2 * cs_i / c_i is integral because c2 * r = 0
        unit.append(sum(u * (c2 * a // c) for u, a, c in zip(x.unit, cs, orders)))
        val.append(sum(w * (c2 * a // c) for w, a, c in zip(x.val, cs, orders)))
    return DualLocalElement(R, x.place, tuple(unit), tuple(val))


UNIT = "unit"
UNIT_POWER = "unit_power"


def membership(x: DualLocalElement, flavor: str, R: Subgroup, Q: int | None = None) -> bool:
    """x in O_v* (x) R^ (flavor "unit") or O_v*^Q (x) R^ ("unit_power").

    The statement is about the image of x in k_v* (x) R^.
    """
    Q = R.ambient.q_small if Q is None else Q
    y = restrict(x, R)
    if any(y.val):
        return False
    if flavor == UNIT:
        return True
    if flavor != UNIT_POWER:
        raise ValueError(f"unknown membership flavor {flavor!r}")
    _, orders = _basis(R)
    q1 = x.place.q - 1
    return all(u % gcd(Q, gcd(c, q1)) == 0 for u, c in zip(y.unit, orders))


# ----------------------------------------------------------- test function


@dataclass(frozen=True)
class LocalCondition:
    """Data of f_v: ambient G, the subgroup L, the element v of order Q and
    the finite primes of S."""

    G: FinAbGroup
    L: Subgroup
    v: tuple
    S: frozenset

    @classmethod
    def standard(cls, G: FinAbGroup, L: Subgroup | None = None, i: int = 1, S=None) -> "LocalCondition":
        from .dirichlet import default_S

        L = condition_subgroup(G) if L is None else L
        S = frozenset(default_S(G) if S is None else S)
        return cls(G, L, v_element(G, i), S)

    @property
    def Q(self) -> int:
        return self.G.q_small

    @property
    def V(self) -> Subgroup:
        return self.G.subgroup([self.v])

    def value(self, q: int, ram, unram) -> int:
        if q in self.S:
            raise ValueError(f"place {q} lies in S, where f_v is identically 1")
        if unram not in self.L and _in_cyclic(self.G, self.v, ram):
            return 0
        return 1


def f_v(chi: LocalCharacter, condition: LocalCondition) -> int:
    return condition.value(chi.place.q, chi.ram, chi.unram)


def phi_local_exponent(order: int, d: int) -> int:
    """Exponent of q in Phi_X at a tame place: |X| (1 - 1/d)."""
    return order - order // d


def phi_local(chi: LocalCharacter, H: Subgroup) -> int:
    if not chi.ram in H:
        raise ValueError("character does not land in H")
    return chi.place.q ** phi_local_exponent(H.order, chi.ramification_order)


@dataclass(frozen=True)
class LocalWeight:
    """chi -> f(chi eta) / Phi_X(chi eta)^s on characters into some subgroup.

    phi_order is |X|; condition None means f = 1; eta None means no twist.
    """

    phi_order: int
    condition: LocalCondition | None = None
    eta: LocalCharacter | None = None

    @classmethod
    def trivial(cls, X: Subgroup) -> "LocalWeight":
        return cls(X.order)

    @classmethod
    def untwisted(cls, H: Subgroup, condition: LocalCondition) -> "LocalWeight":
        return cls(H.order, condition)

    def twisted_parts(self, G: FinAbGroup, ram, unram):
        if self.eta is None:
            return ram, unram
        return G.add(ram, self.eta.ram), G.add(unram, self.eta.unram)

    def evaluate(self, chi: LocalCharacter):
        """(f value, exponent of q in Phi)."""
        G = chi.target.ambient
        r, u = self.twisted_parts(G, chi.ram, chi.unram)
        f = 1 if self.condition is None else self.condition.value(chi.place.q, r, u)
        return f, phi_local_exponent(self.phi_order, G.element_order(r))


def ft_bruteforce(x: DualLocalElement, s: complex, weight: LocalWeight) -> complex:
    """(1/|A|) sum over Hom(k_v*, A) of weight(chi) <chi, x>, A the target of x."""
    A = x.target
    q = x.place.q
    total = 0j
    for chi in local_characters(A, x.place):
        f, e = weight.evaluate(chi)
        if f:
            total += pairing(chi, x) * q ** (-e * s)
    return total / A.order


# ------------------------------------------------------- graded transform


@dataclass
class GradedTransform:
    """sum_d c_d q^{-(|X| (1 - 1/d)) s} with exact coefficients c_d."""

    q: int
    phi_order: int
    coefficients: dict = field(default_factory=dict)

    def coefficient(self, d: int) -> Cyclo:
        return self.coefficients.get(d, Cyclo())

    def exponent(self, d: int) -> int:
        return phi_local_exponent(self.phi_order, d)

    def value(self, s: complex) -> complex:
        return sum((complex(c) * self.q ** (-self.exponent(d) * s) for d, c in self.coefficients.items()), 0j)

    def nonzero_orders(self) -> list:
        return sorted(d for d, c in self.coefficients.items() if not c.is_zero())

    def tail_constant(self) -> float:
        """sum of |c_d| over d > 1."""
        return sum(abs(complex(c)) for d, c in self.coefficients.items() if d > 1)


def _val_phase(A: Subgroup, x: DualLocalElement, b) -> Fraction:
    return _phase_of(A, x.val, b)


def ft_graded(x: DualLocalElement, weight: LocalWeight) -> GradedTransform:
    """Exact d-graded form of the local transform.

    Summing first over the unramified part b in A, the condition f only
    depends on whether v lies in <ram eta_r>; in that case the b with
    b + eta_ur in L form a coset of A meet L.
    """
    A = x.target
    G = A.ambient
    q = x.place.q
    eta = weight.eta
    eta_r = G.identity if eta is None else eta.ram
    eta_u = G.identity if eta is None else eta.unram
    tau_plain = Cyclo.rational(0 if any(x.val) else 1)
    tau_cond = None
    cond = weight.condition
    if cond is not None:
        if q in cond.S:
            raise ValueError(f"place {q} lies in S")
        AL = A & cond.L
        b0 = next((b for b in A.elements() if G.add(b, eta_u) in cond.L), None)
        if b0 is None or any(restrict(x, AL).val):
            tau_cond = Cyclo()
        else:
            tau_cond = Cyclo.root(_val_phase(A, x, b0), Fraction(AL.order, A.order))
    coeffs = {}
    for r in _ramified_parts(A, q):
        t = G.add(r, eta_r)
        d = G.element_order(t)
        tau = tau_cond if cond is not None and _in_cyclic(G, cond.v, t) else tau_plain
        if not tau.terms:
            continue
        term = Cyclo.root(_phase_of(A, x.unit, r)) * tau
        coeffs[d] = coeffs.get(d, Cyclo()) + term
    return GradedTransform(q, weight.phi_order, coeffs)


def ft_structured(x: DualLocalElement, s: complex, weight: LocalWeight) -> complex:
    return ft_graded(x, weight).value(s)


# ------------------------------------------------ closed-form coefficients


def _ind(b: bool) -> int:
    return 1 if b else 0


def case1_q_coefficient(x: DualLocalElement, condition: LocalCondition) -> Fraction:
    """Closed form of the d = Q coefficient of the untwisted transform over
    characters into H (the target of x), for H not inside L and V <= H.

    Q^beta 1[O*^Q (x) H^] - Q 1[O*^Q (x) V^] on O* (x) H^, plus
    1[O*^Q (x) V^] - 1/Q on O* (x) L_H^ with L_H = H meet L.
    """
    H = x.target
    Q = condition.Q
    V = condition.V
    if H <= condition.L or not V <= H:
        raise ValueError("closed form needs H not inside L and V inside H")
    LH = H & condition.L
    beta = q_rank(H, Q)
    inV = _ind(membership(x, UNIT_POWER, V, Q))
    out = Fraction(0)
    if membership(x, UNIT, H, Q):
        out += Q**beta * _ind(membership(x, UNIT_POWER, H, Q)) - Q * inV
    if membership(x, UNIT, LH, Q):
        out += inV - Fraction(1, Q)
    return out


def trivial_q_coefficient(x: DualLocalElement, Q: int) -> Fraction:
    """d = Q coefficient of the transform of 1 / Phi^s over the target of x,
    for x in O* (x) A^: Q^beta 1[O*^Q (x) A^] - 1."""
    A = x.target
    if not membership(x, UNIT, A, Q):
        raise ValueError("closed form needs x in O* (x) A^")
    return Fraction(Q ** q_rank(A, Q) * _ind(membership(x, UNIT_POWER, A, Q)) - 1)


def unit_phase(eta_ram, x: DualLocalElement) -> Fraction:
    """Phase of <eta_r, x> for eta_r in the target of x (unit part only)."""
    return _phase_of(x.target, x.unit, eta_ram)


def case2_q_coefficient(x: DualLocalElement, condition: LocalCondition, eta: LocalCharacter) -> Cyclo:
    """d = Q coefficient of the twisted transform over characters into J
    (the target of x) when eta_r lies in J but eta_ur does not:
    <eta_r^{-1}, x> (Q^{beta_J} 1[O*^Q (x) J^] - Q 1[O*^Q (x) V^]).

    When the last Q-part factor has order at least Q^2, beta_J = beta_H.
    """
    J = x.target
    Q = condition.Q
    if eta.ram not in J or eta.unram in J:
        raise ValueError("closed form needs eta_r in J and eta_ur outside J")
    val = Q ** q_rank(J, Q) * _ind(membership(x, UNIT_POWER, J, Q)) - Q * _ind(
        membership(x, UNIT_POWER, condition.V, Q)
    )
    return Cyclo.root(-unit_phase(eta.ram, x), val)


def full_phase(eta: LocalCharacter, x: DualLocalElement) -> Fraction:
    """Phase of <eta, x> for eta a character into the target of x."""
    return _phase_of(x.target, x.unit, eta.ram) + _phase_of(x.target, x.val, eta.unram)


# ------------------------------------------------------- global S-units


@dataclass(frozen=True)
class GlobalDualElement:
    """x in Z_S* (x) J^ for S a finite set of primes.

    rows[0] holds the exponents of -1 (mod gcd(2, c_i)) and rows[1 + k] those
    of S[k] (mod c_i), one entry per invariant generator of J.
    """

    target: Subgroup
    S: tuple
    rows: tuple

    def __post_init__(self):
        _, orders = _basis(self.target)
        S = tuple(sorted(set(self.S)))
        object.__setattr__(self, "S", S)
        if len(self.rows) != len(S) + 1:
            raise ValueError("need one row for -1 and one per prime of S")
        rows = [tuple(a % gcd(2, c) for a, c in zip(self.rows[0], orders))]
        rows += [tuple(a % c for a, c in zip(r, orders)) for r in self.rows[1:]]
        if any(len(r) != len(orders) for r in rows):
            raise ValueError("row length must match the number of invariant generators")
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def zero(cls, J: Subgroup, S) -> "GlobalDualElement":
        r = len(_basis(J)[1])
        return cls(J, tuple(S), tuple((0,) * r for _ in range(len(set(S)) + 1)))

    @classmethod
    def all_elements(cls, J: Subgroup, S) -> list:
        _, orders = _basis(J)
        S = tuple(sorted(set(S)))
        first = list(itertools.product(*[range(gcd(2, c)) for c in orders]))
        other = list(itertools.product(*[range(c) for c in orders]))
        out = []
        for r0 in first:
            for rest in itertools.product(other, repeat=len(S)):
                out.append(cls(J, S, (r0,) + tuple(rest)))
        return out

    @property
    def Q(self) -> int:
        return self.target.ambient.q_small

    @property
    def bases(self) -> tuple:
        return (-1,) + self.S

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    def localize(self, q: int) -> DualLocalElement:
        if q in self.S:
            raise ValueError(f"{q} lies in S")
        place = LocalPlace.of(q)
        _, orders = _basis(self.target)
        unit = []
        for i, c in enumerate(orders):
            g = gcd(c, q - 1)
            tot = 0
            for b, row in zip(self.bases, self.rows):
                if row[i]:
                    tot += row[i] * dlog_mod(b % q, place.primitive_root, q - 1, q, g)
            unit.append(tot)
        r = len(orders)
        return DualLocalElement(self.target, place, tuple(unit), (0,) * r)

    def _reduced_rows(self) -> list:
        """Rows modulo Q restricted to generators of order divisible by Q;
        the row of -1 is dropped for odd Q since -1 is then a Q-th power."""
        Q = self.Q
        _, orders = _basis(self.target)
        cols = [i for i, c in enumerate(orders) if c % Q == 0]
        out = []
        for b, row in zip(self.bases, self.rows):
            if b == -1 and Q != 2:
                continue
            out.append([row[i] % Q for i in cols])
        return out

    def kummer_rank(self) -> int:
        return _rank_mod_p(self._reduced_rows(), self.Q)

    def psi_exponents(self, v) -> tuple:
        """n_b with Psi(x) = prod b^{n_b}: the exponents of the class of x
        restricted to <v>, a subgroup of order Q, read in Z/Q."""
        Q = self.Q
        J = self.target
        _, orders = _basis(J)
        cs = _coords(J, v)
        out = []
        for b, row in zip(self.bases, self.rows):
            n = sum(Fraction(Q * a * r, c) for a, r, c in zip(cs, row, orders))
            if n.denominator != 1:
                raise ValueError("v must have order Q")
            out.append(0 if (b == -1 and Q != 2) else int(n) % Q)
        return tuple(out)

    def psi_rank(self, v) -> int:
        return 1 if any(self.psi_exponents(v)) else 0

    def degree_kx_k0(self) -> int:
        return self.Q ** self.kummer_rank()

    def degree_kx1_k0(self, v) -> int:
        return self.Q ** self.psi_rank(v)


def _rank_mod_p(rows, p: int) -> int:
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] % p), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [a * inv % p for a in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] % p:
                f = m[i][col]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


# -------------------------------------------------------- splitting data


def splitting_indicator(x: GlobalDualElement, p: int, flavor: str, V: Subgroup | None = None, eta=None) -> int:
    """Whether p splits completely in k_0, k_{x,1}, k_x or k_eta.

    flavor is one of "k0", "kx1", "kx", "keta", or several joined by "+"
    for the compositum. V defaults to the order-Q subgroup of e_1; eta is a
    GExtension into the ambient group (needed for "keta").
    """
    Q = x.Q
    J = x.target
    G = J.ambient
    if V is None:
        V = G.subgroup([v_element(G, 1)])
    out = True
    for fl in flavor.split("+"):
        fl = fl.strip()
        if fl == "k0":
            ok = p % Q == 1
        elif fl in ("kx1", "kx"):
            R = V if fl == "kx1" else J
            ok = p % Q == 1 and membership(x.localize(p), UNIT_POWER, R, Q)
        elif fl == "keta":
            if eta is None:
                ok = True
            else:
                ok = eta.decomposition_group(p) <= J
        else:
            raise ValueError(f"unknown field {fl!r}")
        out = out and ok
    return _ind(out)


def nu_k(H, Q: int) -> Fraction:
    """nu(k, H) = (|H[Q]| - 1) / [k(mu_Q) : k] for k = Q."""
    return Fraction(Q ** q_rank(H, Q) - 1, Q - 1)


def quadratic_field_of(eta: GExtension, J: Subgroup) -> int:
    """Squarefree d with k_eta = Q(sqrt d) for eta into H, [H : J] = 2,
    image not inside J."""
    cond = 1
    for c in eta.components:
        orders = tuple(1 if a in J else 2 for a in c.images)
        cond *= c.p ** local_conductor_exponent(c.p, c.k, orders)
    sign = 1 if eta.conjugation in J else -1
    return squarefree_kernel(sign * cond)


def nu_eta_x(eta: GExtension | None, x: GlobalDualElement, H: Subgroup, v=None) -> Fraction:
    """nu(eta, x) from the degrees of k_x, k_{x,1}, k_eta and k_0 over k = Q."""
    Q = x.Q
    J = x.target
    G = J.ambient
    v = v_element(G, 1) if v is None else v
    if v not in J:
        raise ValueError("v must lie in J")
    beta = q_rank(H, Q)
    rank = x.kummer_rank()
    r1 = x.psi_rank(v)
    k0 = Q - 1
    kx1_k = k0 * Q**r1
    kx_kx1 = Q ** (rank - r1)
    eta_in_J = eta is None or eta.image <= J
    if not eta_in_J and Q != 2:
        raise UnsupportedCase("nu(eta, x) for eta outside J is implemented only for Q = 2")
    keta_k = 1 if eta_in_J else Q
    keta_k0_k = keta_k * k0
    if r1 == 0:
        top = 1
    elif eta_in_J:
        top = Q
    else:
        a = 1
        for b, n in zip(x.bases, x.psi_exponents(v)):
            if n % 2:
                a *= b
        top = 1 if squarefree_kernel(a) == quadratic_field_of(eta, J) else 2
    return Fraction(1, kx1_k) * (Fraction(Q**beta, kx_kx1) - Q) + Fraction(1, keta_k0_k) * (Fraction(Q, top) - 1)
