"""Finite abelian groups given as products of cyclic groups.

Elements are plain tuples of ints reduced modulo the factor orders. Subgroups
are stored through the Hermite normal form of the lattice of exponent vectors
they pull back to in Z^n, which makes equal subgroups compare equal.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import gcd, prod

from .numtheory import divisors, factorize, lcm

Element = tuple

DEFAULT_SUBGROUP_CAP = 10**6


class GroupSpecError(ValueError):
    """Raised for unparsable or invalid group descriptions."""


class NotContainedError(ValueError):
    """Raised when a subgroup is not contained where it should be."""


class GroupTooLargeError(RuntimeError):
    """Raised when subgroup enumeration would exceed the candidate cap."""


# ---------------------------------------------------------------- matrices


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(matrix):
    """Smith normal form of an integer matrix.

    Returns (diag, U, V, D) where D = U * A * V is diagonal with
    diag = (d_1, d_2, ...) satisfying d_1 | d_2 | ..., and U, V unimodular.
    """
    A = [[int(x) for x in row] for row in matrix]
    m = len(A)
    n = len(A[0]) if m else 0
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        # row dst += c * row src
        A[dst] = [a + c * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    for t in range(min(m, n)):
        while True:
            # smallest nonzero entry of the remaining block becomes the pivot
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = A[i][t] // p
                if q:
                    add_row(t, i, -q)
                if A[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = A[t][j] // p
                if q:
                    add_col(t, j, -q)
                if A[t][j]:
                    dirty = True
            if dirty:
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(bad, t, 1)
        if t < m and t < n and A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    diag = [A[i][i] for i in range(min(m, n))]
    return diag, U, V, A


def hermite_rows(rows, ncols):
    """Row Hermite normal form of the lattice spanned by the given rows.

    The result is upper triangular in the sense that row k has its pivot in a
    column strictly right of row k-1's pivot, pivots are positive and the
    entries above a pivot lie in [0, pivot). Zero rows are dropped.
    """
    pool = [list(map(int, r)) for r in rows if any(r)]
    basis = []
    pivots = []
    for c in range(ncols):
        active = [r for r in pool if r[c]]
        rest = [r for r in pool if not r[c]]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[c]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[c] // piv[c]
                r = [a - q * b for a, b in zip(r, piv)]
                if r[c]:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            active = nxt
        if active:
            piv = active[0]
            if piv[c] < 0:
                piv = [-x for x in piv]
            basis.append(piv)
            pivots.append(c)
        pool = rest
    for k in range(len(basis)):
        c = pivots[k]
        p = basis[k][c]
        for i in range(k):
            q = basis[i][c] // p
            if q:
                basis[i] = [a - q * b for a, b in zip(basis[i], basis[k])]
    return basis


# ------------------------------------------------------------------ groups


_SPEC_RE = re.compile(r"^C(\d+)$")


def _split_orders(orders):
    """Canonical presentation: invariant factors of the M-part, then the
    Q-part as prime powers of the smallest prime, ascending."""
    n = prod(orders)
    if n == 1:
        return ()
    Q = min(factorize(n))
    prime_powers = {}
    for d in orders:
        for p, e in factorize(d).items():
            prime_powers.setdefault(p, []).append(p**e)
    q_part = sorted(prime_powers.pop(Q, []))
    # invariant factors of M
    width = max((len(v) for v in prime_powers.values()), default=0)
    m_part = [1] * width
    for p, pws in prime_powers.items():
        pws = sorted(pws)
        for k, pw in enumerate(pws):
            m_part[width - len(pws) + k] *= pw
    return tuple(m_part) + tuple(q_part)


@dataclass(frozen=True)
class QStructure:
    """Decomposition G = M x Z/Q^{a_1} x ... x Z/Q^{a_t} of a presentation."""

    Q: int
    m_indices: tuple
    q_indices: tuple
    exponents: tuple

    @property
    def t(self) -> int:
        return len(self.q_indices)


@dataclass(frozen=True)
class FinAbGroup:
    """Product of cyclic groups of the given orders (kept in the given order).

    Use FinAbGroup.parse or FinAbGroup.canonical to get the normalised
    presentation used by the theorem-specific code.
    """

    cyclic_orders: tuple

    def __post_init__(self):
        orders = tuple(int(d) for d in self.cyclic_orders)
        if any(d < 2 for d in orders):
            raise GroupSpecError(f"cyclic factor orders must be >= 2, got {orders}")
        object.__setattr__(self, "cyclic_orders", orders)

    @classmethod
    def canonical(cls, orders) -> "FinAbGroup":
        orders = [int(d) for d in orders]
        if any(d < 1 for d in orders):
            raise GroupSpecError(f"invalid cyclic orders {orders}")
        return cls(_split_orders([d for d in orders if d > 1]))

    @classmethod
    def parse(cls, spec: str) -> "FinAbGroup":
        """Parse "C2xC4" style specs into the canonical presentation."""
        spec = spec.strip()
        if spec in ("", "C1", "1"):
            return cls(())
        orders = []
        for tok in spec.split("x"):
            m = _SPEC_RE.match(tok.strip())
            if not m or int(m.group(1)) < 1:
                raise GroupSpecError(f"bad group spec {spec!r}")
            orders.append(int(m.group(1)))
        return cls.canonical(orders)

    def __str__(self):
        if not self.cyclic_orders:
            return "C1"
        return "x".join(f"C{d}" for d in self.cyclic_orders)

    # basic arithmetic
    @property
    def rank(self) -> int:
        return len(self.cyclic_orders)

    @cached_property
    def order(self) -> int:
        return prod(self.cyclic_orders)

    @cached_property
    def exponent(self) -> int:
        out = 1
        for d in self.cyclic_orders:
            out = lcm(out, d)
        return out

    @property
    def identity(self) -> Element:
        return (0,) * self.rank

    def reduce(self, x) -> Element:
        return tuple(int(a) % d for a, d in zip(x, self.cyclic_orders))

    def add(self, x, y) -> Element:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.cyclic_orders))

    def neg(self, x) -> Element:
        return tuple(-a % d for a, d in zip(x, self.cyclic_orders))

    def scale(self, x, k: int) -> Element:
        return tuple(a * k % d for a, d in zip(x, self.cyclic_orders))

    def combine(self, coeffs, elems) -> Element:
        out = [0] * self.rank
        for c, x in zip(coeffs, elems):
            for i, a in enumerate(x):
                out[i] += c * a
        return self.reduce(out)

    def element_order(self, x) -> int:
        out = 1
        for a, d in zip(x, self.cyclic_orders):
            out = lcm(out, d // gcd(a, d))
        return out

    def elements(self):
        return list(itertools.product(*(range(d) for d in self.cyclic_orders)))

    def basis_element(self, k: int) -> Element:
        """k-th generator of the presentation (0-based)."""
        x = [0] * self.rank
        x[k] = 1
        return tuple(x)

    # subgroups
    def subgroup(self, gens) -> "Subgroup":
        return Subgroup.generated(self, gens)

    def whole(self) -> "Subgroup":
        return Subgroup.generated(self, [self.basis_element(k) for k in range(self.rank)])

    def trivial(self) -> "Subgroup":
        return Subgroup.generated(self, [])

    def torsion(self, n: int) -> "Subgroup":
        """G[n], the elements killed by n."""
        gens = []
        for k, d in enumerate(self.cyclic_orders):
            x = [0] * self.rank
            x[k] = d // gcd(d, n)
            gens.append(tuple(x))
        return Subgroup.generated(self, gens)

    # theorem data
    @cached_property
    def q_small(self) -> int:
        if self.order == 1:
            raise ValueError("trivial group has no smallest prime")
        return min(factorize(self.order))

    @cached_property
    def structure(self) -> QStructure:
        Q = self.q_small
        m_idx, q_idx, exps = [], [], []
        for k, d in enumerate(self.cyclic_orders):
            if d % Q == 0:
                fac = factorize(d)
                if len(fac) != 1:
                    raise GroupSpecError(
                        f"{self} mixes the {Q}-part with other primes; use FinAbGroup.canonical"
                    )
                q_idx.append(k)
                exps.append(fac[Q])
            else:
                m_idx.append(k)
        return QStructure(Q, tuple(m_idx), tuple(q_idx), tuple(exps))

    def require_theorem_shape(self) -> QStructure:
        st = self.structure
        if st.t < 2:
            raise GroupSpecError(f"{self} has cyclic {st.Q}-Sylow subgroup")
        if list(st.exponents) != sorted(st.exponents):
            raise GroupSpecError(f"{self}: Q-part exponents must be ascending")
        return st

    def e(self, i: int) -> Element:
        """The generator e_i of the i-th Q-part factor (1-based)."""
        st = self.structure
        if not 1 <= i <= st.t:
            raise IndexError(f"e_{i} out of range 1..{st.t}")
        return self.basis_element(st.q_indices[i - 1])

    def m_generators(self) -> list:
        return [self.basis_element(k) for k in self.structure.m_indices]

    def m_part(self) -> "Subgroup":
        return self.subgroup(self.m_generators())


@dataclass(frozen=True)
class Subgroup:
    """Subgroup of an ambient FinAbGroup, stored by a canonical HNF basis.

    The basis rows span the preimage lattice in Z^n (so they include the
    relations); row k has its pivot h_k on the diagonal and h_k divides d_k.
    """

    ambient: FinAbGroup
    basis: tuple

    @classmethod
    def generated(cls, G: FinAbGroup, gens) -> "Subgroup":
        n = G.rank
        rows = [list(G.reduce(g)) for g in gens]
        for k, d in enumerate(G.cyclic_orders):
            r = [0] * n
            r[k] = d
            rows.append(r)
        H = hermite_rows(rows, n)
        return cls(G, tuple(tuple(r) for r in H))

    def __repr__(self):
        return f"Subgroup({self.ambient}, gens={self.generators()})"

    @cached_property
    def order(self) -> int:
        return self.ambient.order // prod(self.basis[k][k] for k in range(self.ambient.rank))

    def __len__(self):
        return self.order

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_whole(self) -> bool:
        return self.order == self.ambient.order

    def __contains__(self, x) -> bool:
        v = list(self.ambient.reduce(x))
        for k, row in enumerate(self.basis):
            c = row[k]
            if v[k] % c:
                return False
            q = v[k] // c
            if q:
                v = [a - q * b for a, b in zip(v, row)]
        return True

    def generators(self) -> list:
        G = self.ambient
        out = []
        for row in self.basis:
            x = G.reduce(row)
            if any(x):
                out.append(x)
        return out

    def elements(self) -> list:
        G = self.ambient
        ranges = [range(G.cyclic_orders[k] // self.basis[k][k]) for k in range(G.rank)]
        out = []
        for coeffs in itertools.product(*ranges):
            out.append(G.combine(coeffs, self.basis))
        return out

    def __le__(self, other: "Subgroup") -> bool:
        return all(g in other for g in self.generators())

    def __lt__(self, other: "Subgroup") -> bool:
        return self <= other and self.order < other.order

    def join(self, other) -> "Subgroup":
        if isinstance(other, Subgroup):
            extra = other.generators()
        else:
            extra = [other]
        return Subgroup.generated(self.ambient, self.generators() + list(extra))

    __or__ = join

    def meet(self, other: "Subgroup") -> "Subgroup":
        small, big = (self, other) if self.order <= other.order else (other, self)
        return Subgroup.generated(self.ambient, [x for x in small.elements() if x in big])

    __and__ = meet

    def scaled(self, k: int) -> "Subgroup":
        """The subgroup k*H."""
        return Subgroup.generated(self.ambient, [self.ambient.scale(g, k) for g in self.generators()])

    def torsion(self, n: int) -> "Subgroup":
        """H[n] computed inside the ambient group."""
        G = self.ambient
        return self.meet(G.torsion(n))

    @cached_property
    def _snf(self):
        # H is the image of Z^n under the HNF rows modulo relations; its type is
        # the cokernel of the relation lattice inside the row lattice.
        G = self.ambient
        n = G.rank
        if n == 0:
            return [], [], []
        B = [list(r) for r in self.basis]
        # relations expressed in row coordinates: d_k e_k = sum c_i B_i
        rel = []
        for k, d in enumerate(G.cyclic_orders):
            target = [0] * n
            target[k] = d
            rel.append(_solve_upper(B, target))
        diag, U, V, _ = smith_normal_form(rel)
        return diag, U, V

    def invariant_basis(self) -> tuple:
        """(elements, orders) of an invariant-factor basis of H, orders >= 2."""
        G = self.ambient
        diag, U, V = self._snf
        if not diag:
            return (), ()
        # new row basis b = V^{-1} B; relations become diag
        Vinv = _unimodular_inverse(V)
        B = [list(r) for r in self.basis]
        elems, orders = [], []
        for i, d in enumerate(diag):
            if abs(d) == 1:
                continue
            vec = [sum(Vinv[i][k] * B[k][c] for k in range(len(B))) for c in range(G.rank)]
            elems.append(G.reduce(vec))
            orders.append(abs(d))
        return tuple(elems), tuple(orders)

    def type(self) -> FinAbGroup:
        """Isomorphism type as a FinAbGroup in invariant-factor form."""
        return FinAbGroup(self.invariant_basis()[1])

    def coordinates(self, x) -> tuple:
        """Coordinates of x in the invariant basis (raises if x not in H)."""
        if x not in self:
            raise NotContainedError(f"{x} not in {self}")
        G = self.ambient
        diag, U, V = self._snf
        if not diag:
            return ()
        B = [list(r) for r in self.basis]
        c = _solve_upper(B, list(G.reduce(x)))
        # x = c B = (c V) (V^{-1} B)
        cv = [sum(c[k] * V[k][i] for k in range(len(c))) for i in range(len(diag))]
        return tuple(a % abs(d) for a, d in zip(cv, diag) if abs(d) != 1)


def _solve_upper(B, target):
    """Integer coefficients c with c * B = target for the square HNF B."""
    v = list(target)
    n = len(B)
    c = [0] * n
    for k in range(n):
        piv = B[k][k]
        if v[k] % piv:
            raise NotContainedError("vector not in lattice")
        q = v[k] // piv
        c[k] = q
        if q:
            v = [a - q * b for a, b in zip(v, B[k])]
    if any(v):
        raise NotContainedError("vector not in lattice")
    return c


def _unimodular_inverse(V):
    from fractions import Fraction

    n = len(V)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(V)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    out = [[int(x) for x in row[n:]] for row in M]
    return out


# ------------------------------------------------------------ enumerations


def subgroups(G: FinAbGroup, cap: int = DEFAULT_SUBGROUP_CAP) -> list:
    """All subgroups of G, each once, sorted by (order, basis)."""
    n = G.rank
    d = G.cyclic_orders
    rows = [None] * n
    found = []
    visited = 0

    def in_span(vec, start):
        # is vec (over columns start..n-1) in the span of rows[start..]?
        v = list(vec)
        for k in range(start, n):
            piv = rows[k][k]
            a = v[k - start]
            if a % piv:
                return False
            q = a // piv
            if q:
                for c in range(k, n):
                    v[c - start] -= q * rows[k][c]
        return True

    def rec(i):
        nonlocal visited
        if i < 0:
            found.append(Subgroup(G, tuple(tuple(r) for r in rows)))
            return
        for h in divisors(d[i]):
            tails = itertools.product(*(range(rows[j][j]) for j in range(i + 1, n)))
            for tail in tails:
                visited += 1
                if visited > cap:
                    raise GroupTooLargeError(f"subgroup enumeration of {G} exceeded {cap} candidates")
                mult = d[i] // h
                if in_span([mult * a for a in tail], i + 1):
                    rows[i] = [0] * i + [h] + list(tail)
                    rec(i - 1)

    rec(n - 1)
    found.sort(key=lambda H: (H.order, H.basis))
    return found


def abelian_groups(order: int) -> list:
    """All abelian groups of the given order, canonical presentations."""
    from sympy.utilities.iterables import partitions

    per_prime = []
    for p, e in factorize(order).items():
        opts = []
        for part in partitions(e):
            pws = []
            for k, mult in part.items():
                pws += [p**k] * mult
            opts.append(pws)
        per_prime.append(opts)
    out = []
    for combo in itertools.product(*per_prime):
        out.append(FinAbGroup.canonical([x for pws in combo for x in pws]))
    return out


# --------------------------------------------------------- group functions


def invariant_type(orders) -> tuple:
    """Invariant factors d_1 | d_2 | ... of a product of cyclic groups."""
    orders = [d for d in orders if d > 1]
    if not orders:
        return ()
    diag, *_ = smith_normal_form([[d if i == j else 0 for j in range(len(orders))] for i, d in enumerate(orders)])
    return tuple(x for x in diag if x > 1)


def moebius(A) -> int:
    """Moebius function of a finite abelian group (or subgroup, via its type)."""
    orders = A.type().cyclic_orders if isinstance(A, Subgroup) else A.cyclic_orders
    counts = {}
    for d in orders:
        for p, e in factorize(d).items():
            if e >= 2:
                return 0
            counts[p] = counts.get(p, 0) + 1
    out = 1
    for p, k in counts.items():
        out *= (-1) ** k * p ** (k * (k - 1) // 2)
    return out


def q_rank(A, Q: int) -> int:
    """Dimension of A tensor F_Q."""
    orders = A.type().cyclic_orders if isinstance(A, Subgroup) else A.cyclic_orders
    return sum(1 for d in orders if d % Q == 0)


def quotient_type(G: FinAbGroup, H: Subgroup) -> FinAbGroup:
    """Invariant factors of G/H."""
    if H.ambient != G:
        raise NotContainedError(f"{H} is not a subgroup of {G}")
    if G.rank == 0:
        return FinAbGroup(())
    diag, *_ = smith_normal_form([list(r) for r in H.basis])
    return FinAbGroup(tuple(x for x in diag if x > 1))


def quotient_order(H: Subgroup, K: Subgroup) -> int:
    if not K <= H:
        raise NotContainedError("quotient needs K <= H")
    return H.order // K.order


def relative_quotient_type(H: Subgroup, K: Subgroup) -> FinAbGroup:
    """Type of H/K for K <= H, both inside the same ambient group."""
    if not K <= H:
        raise NotContainedError("quotient needs K <= H")
    elems, orders = H.invariant_basis()
    Ht = FinAbGroup(orders)
    Kin = Ht.subgroup([H.coordinates(k) for k in K.generators()])
    return quotient_type(Ht, Kin)


# --------------------------------------------------------- exterior square


@dataclass(frozen=True)
class WedgeSquare:
    """Exterior square of a cyclic presentation, one factor per pair i < j."""

    source: FinAbGroup
    group: FinAbGroup = field(init=False)
    pair_labels: tuple = field(init=False)

    def __post_init__(self):
        d = self.source.cyclic_orders
        labels, orders = [], []
        for i in range(len(d)):
            for j in range(i + 1, len(d)):
                g = gcd(d[i], d[j])
                if g > 1:
                    labels.append((i, j))
                    orders.append(g)
        object.__setattr__(self, "group", FinAbGroup(tuple(orders)))
        object.__setattr__(self, "pair_labels", tuple(labels))

    def wedge(self, x, y) -> Element:
        return tuple(
            (x[i] * y[j] - x[j] * y[i]) % g for (i, j), g in zip(self.pair_labels, self.group.cyclic_orders)
        )

    def image(self, H: Subgroup) -> Subgroup:
        gens = H.generators()
        wedges = [self.wedge(a, b) for a, b in itertools.combinations(gens, 2)]
        return self.group.subgroup(wedges)

    def full(self) -> Subgroup:
        return self.group.whole()


@lru_cache(maxsize=256)
def exterior_square(G: FinAbGroup) -> WedgeSquare:
    return WedgeSquare(G)


def induced_wedge_image(H: Subgroup) -> Subgroup:
    return exterior_square(H.ambient).image(H)
