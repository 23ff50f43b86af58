"""Abelian extensions of Q as homomorphisms (Z/mZ)* -> G.

A homomorphism is stored prime by prime: for every p^k || m we keep the
images of the canonical generators of (Z/p^kZ)*. Odd p use the least
primitive root mod p^k; p = 2 uses -1 and 5. The uniformiser at p is p
itself, so the Frobenius at a ramified p is the image of the unit that is p
away from p and 1 at p.
"""

from __future__ import annotations

import itertools
import json
import os
import tempfile
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import gcd, prod

from .groups import FinAbGroup, Subgroup, subgroups
from .numtheory import (
    dlog_mod,
    factorize,
    iroot,
    primes_upto,
    primitive_root,
    valuation,
)

REAL_PLACE = "inf"
FORMAT_VERSION = 1


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would do more work than its budget allows."""


# ------------------------------------------------------------- unit groups


@lru_cache(maxsize=None)
def prime_power_units(p: int, k: int) -> tuple:
    """(generators, orders) of (Z/p^kZ)* as residues mod p^k."""
    n = p**k
    if k == 0:
        return (), ()
    if p == 2:
        if k == 1:
            return (), ()
        if k == 2:
            return (3,), (2,)
        return (n - 1, 5), (2, 2 ** (k - 2))
    return (primitive_root(n),), (n - n // p,)


def local_log(p: int, k: int, u: int, mods) -> tuple:
    """Exponents of u in the canonical generators of (Z/p^k)*, reduced mod
    the given divisors of the generator orders."""
    n = p**k
    u %= n
    gens, orders = prime_power_units(p, k)
    if not gens:
        return ()
    if p == 2:
        eps = 0 if u % 4 == 1 else 1
        if k == 2:
            return (eps % mods[0],)
        u1 = u if eps == 0 else (-u) % n
        return (eps % mods[0], dlog_mod(u1, 5, orders[1], n, mods[1]))
    return (dlog_mod(u, gens[0], orders[0], n, mods[0]),)


@dataclass(frozen=True)
class UnitGroupStructure:
    """Canonical generators of (Z/mZ)*, built by CRT from prime powers."""

    modulus: int
    generators: tuple
    orders: tuple
    primes: tuple
    local: tuple

    def log(self, u: int) -> tuple:
        """Exponent vector of a unit u in the canonical generators."""
        out = []
        for p, k in self.local:
            out.extend(local_log(p, k, u, prime_power_units(p, k)[1]))
        return tuple(out)


def _crt_lift(residue: int, p: int, k: int, m: int) -> int:
    """Unit mod m that is residue mod p^k and 1 mod the rest of m."""
    q = p**k
    rest = m // q
    if rest == 1:
        return residue % m
    # x = residue (mod q), x = 1 (mod rest)
    t = ((residue - 1) * pow(rest, -1, q)) % q
    return (1 + rest * t) % m


@lru_cache(maxsize=4096)
def unit_group(m: int) -> UnitGroupStructure:
    if m < 1:
        raise ValueError("modulus must be positive")
    gens, orders, primes, local = [], [], [], []
    for p, k in sorted(factorize(m).items()):
        local.append((p, k))
        g, o = prime_power_units(p, k)
        for r, d in zip(g, o):
            gens.append(_crt_lift(r, p, k, m))
            orders.append(d)
            primes.append(p)
    return UnitGroupStructure(m, tuple(gens), tuple(orders), tuple(primes), tuple(local))


# ---------------------------------------------------- characters and conductors


def _cond_exp_odd(p: int, order: int) -> int:
    if order == 1:
        return 0
    if order % p:
        return 1
    return valuation(order, p) + 1


def _cond_exp_two(order_minus_one: int, order_five: int) -> int:
    if order_five > 1:
        return valuation(order_five, 2) + 2
    return 2 if order_minus_one > 1 else 0


def local_conductor_exponent(p: int, k: int, value_orders) -> int:
    """Conductor exponent at p of a map on (Z/p^k)* whose values on the
    canonical generators have the given orders."""
    if p == 2:
        if k < 2:
            return 0
        o5 = value_orders[1] if k >= 3 else 1
        return _cond_exp_two(value_orders[0], o5)
    return _cond_exp_odd(p, value_orders[0]) if k else 0


@lru_cache(maxsize=256)
def dual_group(G: FinAbGroup) -> tuple:
    """Characters of G as coefficient vectors c: x -> sum c_i x_i / d_i."""
    return tuple(G.elements())


def char_value_order(G: FinAbGroup, c, x) -> int:
    e = G.exponent
    num = sum(ci * xi * (e // d) for ci, xi, d in zip(c, x, G.cyclic_orders)) % e
    return e // gcd(num, e)


# ----------------------------------------------------------- local pieces


@dataclass(frozen=True)
class LocalComponent:
    """The restriction of a homomorphism to the (Z/p^kZ)* factor."""

    group: FinAbGroup
    p: int
    k: int
    images: tuple

    @cached_property
    def image_orders(self) -> tuple:
        return tuple(self.group.element_order(a) for a in self.images)

    def value(self, u: int):
        logs = local_log(self.p, self.k, u, self.image_orders)
        return self.group.combine(logs, self.images)

    @cached_property
    def conductor_exponent(self) -> int:
        return local_conductor_exponent(self.p, self.k, self.image_orders)

    @cached_property
    def inertia(self) -> Subgroup:
        return self.group.subgroup(self.images)

    def character_exponent(self, c) -> int:
        """Conductor exponent at p of psi o (this component), psi = c."""
        orders = tuple(char_value_order(self.group, c, a) for a in self.images)
        return local_conductor_exponent(self.p, self.k, orders)

    @cached_property
    def phi_exponent_full(self) -> int:
        """Exponent of p in Phi_G, i.e. the sum over all characters of G."""
        return sum(self.character_exponent(c) for c in dual_group(self.group))

    def lift(self, k: int) -> "LocalComponent":
        """Same map viewed on (Z/p^k)* for k at least the current level."""
        if k < self.k:
            raise ValueError("cannot lower the level")
        if k == self.k:
            return self
        gens, _ = prime_power_units(self.p, k)
        return LocalComponent(self.group, self.p, k, tuple(self.value(g) for g in gens))

    def primitive(self) -> "LocalComponent":
        """The same map at its conductor level."""
        k = self.conductor_exponent
        gens, _ = prime_power_units(self.p, k)
        return LocalComponent(self.group, self.p, k, tuple(self.value(g) for g in gens))

    def combine(self, other: "LocalComponent") -> "LocalComponent":
        """Pointwise sum of two maps at the same prime."""
        k = max(self.k, other.k)
        a, b = self.lift(k), other.lift(k)
        return LocalComponent(self.group, self.p, k, tuple(self.group.add(x, y) for x, y in zip(a.images, b.images)))

    def negate(self) -> "LocalComponent":
        return LocalComponent(self.group, self.p, self.k, tuple(self.group.neg(x) for x in self.images))


@dataclass(frozen=True)
class LocalSymbol:
    place: object
    inertia_image: Subgroup
    frobenius_rep: tuple

    @property
    def decomposition(self) -> Subgroup:
        return self.inertia_image.join(self.frobenius_rep)


# -------------------------------------------------------------- extensions


@dataclass(frozen=True)
class GExtension:
    """A homomorphism (Z/mZ)* -> target, stored through its local components
    (sorted by prime, one per p^k || m)."""

    target: FinAbGroup
    components: tuple

    @classmethod
    def from_images(cls, G: FinAbGroup, m: int, images) -> "GExtension":
        U = unit_group(m)
        images = [G.reduce(x) for x in images]
        if len(images) != len(U.generators):
            raise ValueError("need one image per generator of (Z/mZ)*")
        comps, pos = [], 0
        for p, k in U.local:
            n = len(prime_power_units(p, k)[0])
            comps.append(LocalComponent(G, p, k, tuple(images[pos : pos + n])))
            pos += n
        for x, o in zip(images, U.orders):
            if o % G.element_order(x):
                raise ValueError(f"image {x} has order not dividing {o}")
        return cls(G, tuple(comps))

    @cached_property
    def modulus(self) -> int:
        return prod(c.p**c.k for c in self.components)

    @property
    def images(self) -> tuple:
        return tuple(x for c in self.components for x in c.images)

    @cached_property
    def conductor(self) -> int:
        return prod(c.p**c.conductor_exponent for c in self.components)

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @cached_property
    def image(self) -> Subgroup:
        return self.target.subgroup(list(self.images))

    @property
    def is_surjective(self) -> bool:
        return self.image.is_whole()

    @cached_property
    def ramified_primes(self) -> tuple:
        return tuple(c.p for c in self.components if c.conductor_exponent)

    def component(self, p: int):
        for c in self.components:
            if c.p == p:
                return c
        return None

    def value(self, u: int):
        G = self.target
        x = G.identity
        for c in self.components:
            x = G.add(x, c.value(u))
        return x

    @property
    def conjugation(self):
        return self.value(-1)

    @cached_property
    def phi_exponents(self) -> dict:
        """p -> exponent of p in Phi_G."""
        return {c.p: c.phi_exponent_full for c in self.components if c.conductor_exponent}

    def phi(self, H=None) -> int:
        """Phi_H = Phi_G^{|H|/|G|} for H containing the image (H = G default)."""
        G = self.target
        h = G.order if H is None else H.order
        if H is not None and not self.image <= H:
            raise ValueError("homomorphism does not land in H")
        out = 1
        for p, e in self.phi_exponents.items():
            out *= p ** (e * h // G.order)
        return out

    @cached_property
    def discriminant(self) -> int:
        return self.phi(self.image)

    def local_symbol(self, p) -> LocalSymbol:
        G = self.target
        if p == REAL_PLACE:
            return LocalSymbol(REAL_PLACE, G.trivial(), self.conjugation)
        comp = self.component(p)
        if comp is None:
            return LocalSymbol(p, G.trivial(), self.value(p))
        frob = G.identity
        for c in self.components:
            if c.p != p:
                frob = G.add(frob, c.value(p))
        return LocalSymbol(p, comp.inertia, frob)

    def decomposition_group(self, p) -> Subgroup:
        return self.local_symbol(p).decomposition

    def sort_key(self):
        return (self.discriminant, self.modulus, self.images)

    def restrict_target(self, H: Subgroup) -> "GExtension":
        """Re-express a homomorphism landing in H with H's invariant basis."""
        elems, orders = H.invariant_basis()
        T = FinAbGroup(orders)
        comps = tuple(
            LocalComponent(T, c.p, c.k, tuple(H.coordinates(x) for x in c.images)) for c in self.components
        )
        return GExtension(T, comps)


def character_conductor(ext: GExtension, c) -> int:
    """Conductor of the Dirichlet character psi o ext for psi given by c."""
    return prod(comp.p ** comp.character_exponent(c) for comp in ext.components)


def conductor(ext: GExtension) -> int:
    """Least m' such that ext factors through (Z/m'Z)*."""
    return ext.conductor


def _distinct_characters(ext: GExtension, on):
    """Representatives of characters of G with distinct restrictions to the
    elements `on` (which generate the relevant subgroup)."""
    G = ext.target
    seen = {}
    for c in dual_group(G):
        key = tuple(
            sum(ci * xi * (G.exponent // d) for ci, xi, d in zip(c, x, G.cyclic_orders)) % G.exponent for x in on
        )
        seen.setdefault(key, c)
    return list(seen.values())


def discriminant(ext: GExtension) -> int:
    """Product of conductors of the distinct characters psi o ext."""
    return prod(character_conductor(ext, c) for c in _distinct_characters(ext, ext.image.generators()))


def phi_H(ext: GExtension, H: Subgroup) -> int:
    """Product of conductors of psi o ext over the characters psi of H."""
    if not ext.image <= H:
        raise ValueError("homomorphism does not land in H")
    return prod(character_conductor(ext, c) for c in _distinct_characters(ext, H.generators()))


def homs(m: int, G: FinAbGroup, only_surjective: bool = False, only_primitive: bool = False) -> list:
    """All homomorphisms (Z/mZ)* -> G, lexicographic in the generator images."""
    U = unit_group(m)
    elems = G.elements()
    choices = [[x for x in elems if o % G.element_order(x) == 0] for o in U.orders]
    out = []
    for imgs in itertools.product(*choices):
        ext = GExtension.from_images(G, m, imgs)
        if only_primitive and not ext.is_primitive:
            continue
        if only_surjective and not ext.is_surjective:
            continue
        out.append(ext)
    return out


# ------------------------------------------------------ enumeration engine


@dataclass(frozen=True)
class LocalOption:
    """A primitive nontrivial local component together with its exponent
    in Phi_A for the target A of the search."""

    p: int
    k: int
    images: tuple
    exponent: int
    power: int  # p ** exponent


class SubgroupTable:
    """Subgroups of a small group with cached joins, keyed by integer ids."""

    def __init__(self, G: FinAbGroup):
        self.G = G
        self.subs = subgroups(G)
        self.index = {S: n for n, S in enumerate(self.subs)}
        self.members = [frozenset(S.elements()) for S in self.subs]
        self.trivial_id = self.index[G.trivial()]
        self.full_id = self.index[G.whole()]
        self._join_elem = {}
        self._join = {}

    def id_of(self, S: Subgroup) -> int:
        return self.index[S]

    def join_elem(self, sid: int, x) -> int:
        key = (sid, x)
        r = self._join_elem.get(key)
        if r is None:
            if x in self.members[sid]:
                r = sid
            else:
                r = self.index[self.subs[sid].join(x)]
            self._join_elem[key] = r
        return r

    def join(self, a: int, b: int) -> int:
        if a == b:
            return a
        key = (a, b) if a < b else (b, a)
        r = self._join.get(key)
        if r is None:
            r = self.index[self.subs[a].join(self.subs[b])]
            self._join[key] = r
        return r


def level_cap(p: int, exponent: int) -> int:
    """Largest conductor exponent at p of a map into a group of this exponent."""
    v = valuation(exponent, p) if exponent % p == 0 else 0
    if p == 2:
        return v + 2 if v else 0
    return v + 1 if v else 1


class LocalOptions:
    """Primitive local components with values in a subgroup A of G, with
    exponents measured in Phi_A."""

    def __init__(self, G: FinAbGroup, A: Subgroup | None = None):
        self.G = G
        self.A = A if A is not None else G.whole()
        self.a_order = self.A.order
        self.a_elems = self.A.elements()
        self._orders = {x: G.element_order(x) for x in self.a_elems}
        self._tame = {}
        self._wild = {}
        self.exp_A = 1
        for x in self.a_elems:
            o = self._orders[x]
            self.exp_A = self.exp_A * o // gcd(self.exp_A, o)
        qmin = min(factorize(self.a_order)) if self.a_order > 1 else None
        self.min_exponent = self.a_order - self.a_order // qmin if qmin else None

    def options(self, p: int) -> list:
        if self.a_order == 1:
            return []
        if self.G.order % p:
            g = gcd(p - 1, self.exp_A)
            base = self._tame.get(g)
            if base is None:
                base = []
                for x in self.a_elems:
                    o = self._orders[x]
                    if o > 1 and g % o == 0:
                        base.append((x, self.a_order - self.a_order // o))
                self._tame[g] = base
            return [LocalOption(p, 1, (x, ), e, p**e) for x, e in base]
        got = self._wild.get(p)
        if got is None:
            got = self._wild_options(p)
            self._wild[p] = got
        return got

    def _wild_options(self, p: int) -> list:
        G = self.G
        out = []
        for k in range(1, level_cap(p, self.exp_A) + 1):
            gens, orders = prime_power_units(p, k)
            if not gens:
                continue
            choices = [[x for x in self.a_elems if o % self._orders[x] == 0] for o in orders]
            for imgs in itertools.product(*choices):
                comp = LocalComponent(G, p, k, tuple(imgs))
                if comp.conductor_exponent != k:
                    continue
                e = comp.phi_exponent_full * self.a_order // G.order
                out.append(LocalOption(p, k, tuple(imgs), e, p**e))
        out.sort(key=lambda o: (o.exponent, o.k, o.images))
        return out

    def prime_limit(self, limit: int) -> int:
        if self.min_exponent is None:
            return 1
        return iroot(limit, self.min_exponent)


def search(opts: LocalOptions, limit: int, visit, budget: int | None = None, first_prime_filter=None) -> int:
    """Depth-first search over sets of primitive local options with
    prod p^exponent <= limit. visit(chosen, value) is called for every node,
    including the empty one. Returns the number of nodes visited."""
    if limit < 1:
        return 0
    primes = primes_upto(opts.prime_limit(limit))
    emin = opts.min_exponent or 1
    chosen = []
    count = 0

    def rec(start, cur):
        nonlocal count
        count += 1
        if budget is not None and count > budget:
            raise BudgetExceeded(f"enumeration exceeded budget of {budget} nodes")
        visit(chosen, cur)
        for idx in range(start, len(primes)):
            p = primes[idx]
            if cur * p**emin > limit:
                break
            if not chosen and first_prime_filter is not None and not first_prime_filter(idx):
                continue
            for opt in opts.options(p):
                v = cur * opt.power
                if v <= limit:
                    chosen.append(opt)
                    rec(idx + 1, v)
                    chosen.pop()

    rec(0, 1)
    return count


def extension_from_options(G: FinAbGroup, chosen) -> GExtension:
    return GExtension(G, tuple(LocalComponent(G, o.p, o.k, o.images) for o in chosen))


def _enumerate_part(orders, B, part, nparts, budget):
    G = FinAbGroup(orders)
    opts = LocalOptions(G)
    table = SubgroupTable(G)
    out = []

    def visit(chosen, value):
        if not chosen:
            return
        sid = table.trivial_id
        for o in chosen:
            for x in o.images:
                sid = table.join_elem(sid, x)
        if sid == table.full_id:
            out.append(extension_from_options(G, chosen))

    filt = None if nparts == 1 else (lambda idx: idx % nparts == part)
    search(opts, B, visit, budget=budget, first_prime_filter=filt)
    return out


def enumerate_extensions(G: FinAbGroup, B: int, workers: int = 1, budget: int | None = None) -> list:
    """All primitive surjective (Z/mZ)* -> G with discriminant <= B, sorted
    by (discriminant, modulus, images)."""
    if B < 1:
        raise ValueError("bound must be >= 1")
    if G.order == 1:
        return []
    if workers <= 1:
        found = _enumerate_part(G.cyclic_orders, B, 0, 1, budget)
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_enumerate_part, G.cyclic_orders, B, k, workers, budget) for k in range(workers)]
            found = [e for f in futs for e in f.result()]
    found.sort(key=GExtension.sort_key)
    return found


def find_by_discriminant(G: FinAbGroup, target: int, primes) -> list:
    """All primitive surjective maps onto G with discriminant exactly target
    and ramification inside the given primes."""
    primes = sorted(set(primes))
    if target < 1:
        return []
    fac = factorize(target)
    if any(p not in primes for p in fac):
        return []
    if not fac:
        return []
    opts = LocalOptions(G)
    per_prime = []
    for p, e in sorted(fac.items()):
        cands = [o for o in opts.options(p) if o.exponent == e]
        if not cands:
            return []
        per_prime.append(cands)
    out = []
    for combo in itertools.product(*per_prime):
        ext = extension_from_options(G, combo)
        if ext.is_surjective:
            out.append(ext)
    out.sort(key=GExtension.sort_key)
    return out


def lambda_v_test(ext: GExtension, p: int, i: int, j: int, S) -> bool:
    """e_i^{Q^{a_i-1}} in inertia at p implies the Frobenius coset lies in
    <M, e_1, ..., e_j^Q, ..., e_t>."""
    from .lattice import distinguished_subgroup, v_element

    if p in set(S):
        raise ValueError(f"place {p} lies in S")
    if i == j:
        raise ValueError("i and j must differ")
    G = ext.target
    sym = ext.local_symbol(p)
    if v_element(G, i) not in sym.inertia_image:
        return True
    Lp = distinguished_subgroup(G, j)
    return sym.frobenius_rep in Lp and sym.inertia_image <= Lp


def default_S(G: FinAbGroup) -> tuple:
    """Finite primes of the default S: those dividing |G|."""
    return tuple(sorted(factorize(G.order))) if G.order > 1 else ()


# ------------------------------------------------------------ records/cache


def extension_record(ext: GExtension) -> dict:
    G = ext.target
    syms = []
    for p in ext.ramified_primes:
        s = ext.local_symbol(p)
        syms.append({"p": p, "inertia_basis": [list(x) for x in s.inertia_image.generators()], "frobenius": list(s.frobenius_rep)})
    return {
        "group": str(G),
        "modulus": ext.modulus,
        "generator_orders": list(unit_group(ext.modulus).orders),
        "images": [list(x) for x in ext.images],
        "conductor": ext.conductor,
        "discriminant": str(ext.discriminant),
        "conjugation": list(ext.conjugation),
        "local_symbols": syms,
    }


def extension_from_record(rec: dict) -> GExtension:
    G = FinAbGroup.parse(rec["group"])
    return GExtension.from_images(G, rec["modulus"], [tuple(x) for x in rec["images"]])


def atomic_write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def jsonl_text(G: FinAbGroup, B: int, exts) -> str:
    lines = [json.dumps({"format_version": FORMAT_VERSION, "group": str(G), "bound": str(B)}, sort_keys=True)]
    lines += [json.dumps(extension_record(e), sort_keys=True) for e in exts]
    return "\n".join(lines) + "\n"


def cache_path(cache_dir: str, G: FinAbGroup, B: int) -> str:
    return os.path.join(cache_dir, f"{G}_B{B}_v{FORMAT_VERSION}.jsonl")


def read_cache(path: str, G: FinAbGroup, B: int):
    """Extensions from a cache file, or None if missing or stale."""
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError:
            return None
        if header.get("format_version") != FORMAT_VERSION or header.get("group") != str(G) or header.get("bound") != str(B):
            return None
        return [extension_from_record(json.loads(line)) for line in fh if line.strip()]


def cached_enumeration(G: FinAbGroup, B: int, cache_dir: str | None, workers: int = 1, budget=None) -> list:
    if cache_dir is None:
        return enumerate_extensions(G, B, workers=workers, budget=budget)
    path = cache_path(cache_dir, G, B)
    got = read_cache(path, G, B)
    if got is not None:
        return got
    exts = enumerate_extensions(G, B, workers=workers, budget=budget)
    atomic_write_text(path, jsonl_text(G, B, exts))
    return exts
