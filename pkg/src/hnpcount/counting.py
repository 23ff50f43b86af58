"""Global counting functions and numerical checks built on them: Moebius
inversion over subgroups, Euler products of local transforms, the Poisson
summation identity, the cancellation trend and Tauberian normalisation."""

from __future__ import annotations

import bisect
import itertools
import math

import mpmath
from dataclasses import dataclass, field
from fractions import Fraction

from .dirichlet import (
    BudgetExceeded,
    GExtension,
    LocalComponent,
    LocalOptions,
    default_S,
    level_cap,
    local_log,
    prime_power_units,
    search,
)
from .groups import FinAbGroup, Subgroup, moebius, quotient_type, subgroups
from .lattice import v_element
from .local_fourier import (
    GlobalDualElement,
    LocalCharacter,
    LocalCondition,
    LocalPlace,
    LocalWeight,
    _basis,
    _coords,
    ft_graded,
    nu_k,
)
from .norms import trend_non_increasing
from .numtheory import factorize, int_pow_le, iroot, primes_upto

N_STAR = "N_star"
N_H = "N_H"
N_PLAIN = "N_plain"
MODES = (N_STAR, N_H, N_PLAIN)


class DomainError(ValueError):
    """Evaluation point at or left of the abscissa of convergence."""


class InsufficientData(ValueError):
    pass


def alpha(H, Q: int) -> int:
    """alpha(H) = |H| (1 - 1/Q)."""
    n = H.order
    return n - n // Q


# ---------------------------------------------------------------- counting


@dataclass(frozen=True)
class CountSpec:
    """What to count: maps into H (onto H for N_star) with
    Phi_H <= bound ** scale and, unless the mode is N_plain, f = 1."""

    G: FinAbGroup
    L: Subgroup
    H: Subgroup
    bound: int
    mode: str = N_H
    scale: Fraction = Fraction(1)
    i: int = 1
    S: tuple | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.bound < 1:
            raise ValueError("bound must be >= 1")
        if self.L.ambient != self.G or self.H.ambient != self.G:
            raise ValueError("L and H must be subgroups of G")
        object.__setattr__(self, "scale", Fraction(self.scale))

    @property
    def phi_limit(self) -> int:
        """Largest integer Phi_H allowed."""
        return int_pow_le(self.bound, self.scale.numerator, self.scale.denominator)


class _FEvaluator:
    """f(chi) for search nodes given as lists of LocalOption."""

    def __init__(self, G: FinAbGroup, L: Subgroup, v, S):
        self.G = G
        self.L = frozenset(L.elements())
        self.v = v
        self.S = frozenset(S)
        self._value = {}
        self._has_v = {}

    def value(self, opt, u: int):
        key = (opt, u % opt.p**opt.k)
        r = self._value.get(key)
        if r is None:
            G = self.G
            orders = tuple(G.element_order(a) for a in opt.images)
            r = G.combine(local_log(opt.p, opt.k, u, orders), opt.images)
            self._value[key] = r
        return r

    def has_v(self, opt) -> bool:
        r = self._has_v.get(opt)
        if r is None:
            r = self.v in self.G.subgroup(list(opt.images))
            self._has_v[opt] = r
        return r

    def __call__(self, chosen) -> int:
        G = self.G
        for o in chosen:
            if o.p in self.S or not self.has_v(o):
                continue
            frob = G.identity
            for o2 in chosen:
                if o2 is not o:
                    frob = G.add(frob, self.value(o2, o.p))
            if frob not in self.L:
                return 0
        return 1


def f_global(ext: GExtension, L: Subgroup, S=None, i: int = 1) -> int:
    """Product of the local f_v over the ramified primes outside S."""
    G = ext.target
    S = set(default_S(G) if S is None else S)
    v = v_element(G, i)
    for p in ext.ramified_primes:
        if p in S:
            continue
        sym = ext.local_symbol(p)
        if v in sym.inertia_image and sym.frobenius_rep not in L:
            return 0
    return 1


def count(spec: CountSpec, budget: int | None = None) -> int:
    """Exact count by enumeration over primitive local components."""
    G, H = spec.G, spec.H
    limit = spec.phi_limit
    opts = LocalOptions(G, H)
    H_members = frozenset(H.elements())
    f = None
    if spec.mode != N_PLAIN:
        S = default_S(G) if spec.S is None else spec.S
        f = _FEvaluator(G, spec.L, v_element(G, spec.i), S)
    total = 0

    def visit(chosen, value):
        nonlocal total
        if spec.mode == N_STAR:
            span = G.subgroup([x for o in chosen for x in o.images])
            if span.order != len(H_members):
                return
        if f is not None and not f(chosen):
            return
        total += 1

    search(opts, limit, visit, budget=budget)
    return total


@dataclass
class MoebiusReport:
    G: FinAbGroup
    bound: int
    lhs: int
    rhs: int
    terms: list = field(default_factory=list)  # (H, mu(G/H), count)

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs


def moebius_inversion_check(G: FinAbGroup, L: Subgroup, B: int, S=None, budget: int | None = None) -> MoebiusReport:
    """N*(G, L; B) against sum_H mu(G/H) N(H, L; B^{|H|/|G|})."""
    lhs = count(CountSpec(G, L, G.whole(), B, N_STAR, S=S), budget)
    terms = []
    rhs = 0
    for H in subgroups(G):
        mu = moebius(quotient_type(G, H))
        if mu == 0:
            continue
        n = count(CountSpec(G, L, H, B, N_H, Fraction(H.order, G.order), S=S), budget)
        terms.append((H, mu, n))
        rhs += mu * n
    return MoebiusReport(G, B, lhs, rhs, terms)


# ---------------------------------------------------------- Euler products


def _exponent(J: Subgroup) -> int:
    e = 1
    for c in _basis(J)[1]:
        e = e * c // math.gcd(e, c)
    return e


@dataclass
class EulerValue:
    value: complex
    tail: float
    P: int
    tail_constant: float


def _s_place_factor(x: GlobalDualElement, p: int, H: Subgroup, eta: GExtension | None, s: complex) -> complex:
    """Local transform at a finite place p in S, where f = 1.

    Summing over the image of the uniformizer leaves the indicator of a
    vanishing valuation part times a sum over Hom(Z_p*, J).
    """
    J = x.target
    G = J.ambient
    k = x.S.index(p) + 1
    if any(x.rows[k]):
        return 0j
    _, orders = _basis(J)
    J_elems = J.elements()
    K = max(1, level_cap(p, _exponent(J)))
    eta_comp = None
    if eta is not None and eta.component(p) is not None:
        eta_comp = eta.component(p)
        K = max(K, eta_comp.k)
    gens, gorders = prime_power_units(p, K)
    choices = [[a for a in J_elems if o % G.element_order(a) == 0] for o in gorders]
    bases = [(b, row) for b, row in zip(x.bases, x.rows) if b != p]
    total = 0j
    for imgs in itertools.product(*choices):
        comp = LocalComponent(G, p, K, tuple(imgs))
        phase = Fraction(0)
        for b, row in bases:
            if any(row):
                cs = _coords(J, comp.value(b))
                phase += sum((Fraction(r * a, c) for r, a, c in zip(row, cs, orders)), Fraction(0))
        tw = comp if eta_comp is None else comp.combine(eta_comp)
        e = tw.phi_exponent_full * H.order // G.order
        total += complex(math.cos(2 * math.pi * phase), math.sin(2 * math.pi * phase)) * p ** (-e * s)
    return total


def _eta_local(eta: GExtension | None, H: Subgroup, q: int, place: LocalPlace) -> LocalCharacter | None:
    if eta is None:
        return None
    G = eta.target
    comp = eta.component(q)
    ram = G.identity if comp is None else comp.value(place.primitive_root)
    sym = eta.local_symbol(q)
    return LocalCharacter(H, place, ram, sym.frobenius_rep)


def euler_h(
    eta: GExtension | None,
    x: GlobalDualElement,
    s: complex,
    P: int,
    H: Subgroup,
    condition: LocalCondition | None = None,
) -> EulerValue:
    """prod over places v (finite ones up to P) of the local transforms
    h_{eta_v, v}(x_v; s), with a tail bound for the primes beyond P."""
    J = x.target
    G = J.ambient
    Q = G.q_small
    a = alpha(H, Q)
    if (s.real if isinstance(s, complex) else s) * a <= 1:
        raise DomainError(f"need Re s > 1/alpha(H) = 1/{a}")
    bad = [p for p in factorize(G.order) if p not in x.S]
    if bad:
        raise ValueError(f"primes {bad} dividing |G| must lie in S")
    if P < max(x.S, default=2):
        raise ValueError("P must be at least the largest prime of S")
    # real place: sum over Hom(R*, J) = J[2] of <chi, x_inf>
    if any(x.rows[0]):
        return EulerValue(0j, 0.0, P, 0.0)
    value = complex(J.torsion(2).order)
    for p in x.S:
        value *= _s_place_factor(x, p, H, eta, s)
        if value == 0:
            return EulerValue(0j, 0.0, P, 0.0)
    C = 0.0
    for q in primes_upto(P):
        if q in x.S:
            continue
        place = LocalPlace.of(q)
        weight = LocalWeight(H.order, condition, _eta_local(eta, H, q, place))
        g = ft_graded(x.localize(q), weight)
        value *= g.value(s)
        if eta is None or eta.component(q) is None:
            C = max(C, g.tail_constant())
        if value == 0:
            return EulerValue(0j, 0.0, P, C)
    sigma = s.real if isinstance(s, complex) else s
    e = sigma * a
    # sum_{q > P} C q^{-e} <= C P^{1-e} / ((e - 1) log P)
    t = C * P ** (1 - e) / ((e - 1) * math.log(P))
    # plus a rounding allowance of a few ulps per factor
    t += 4 * len(primes_upto(P)) * 2.0**-52
    return EulerValue(value, abs(value) * math.expm1(t), P, C)


# ------------------------------------------------------------ Poisson check


@dataclass
class PoissonReport:
    s: float
    X: int
    P: int
    lhs: float
    rhs: complex
    tail_lhs: float
    tail_rhs: float
    terms: int

    @property
    def discrepancy(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        return self.discrepancy / abs(self.lhs) if self.lhs else math.inf

    @property
    def within_tails(self) -> bool:
        return self.discrepancy <= self.tail_lhs + self.tail_rhs


def _local_maps(G: FinAbGroup, J: Subgroup, p: int, level: int) -> list:
    """All maps (Z/p^level)* -> J as LocalComponents, the trivial one first."""
    gens, gorders = prime_power_units(p, level)
    Jel = J.elements()
    choices = [[a for a in Jel if o % G.element_order(a) == 0] for o in gorders]
    out = [LocalComponent(G, p, level, tuple(imgs)) for imgs in itertools.product(*choices)]
    out.sort(key=lambda c: (any(any(a) for a in c.images), c.images))
    return out


def twisted_sum(
    H: Subgroup,
    J: Subgroup,
    eta: GExtension | None,
    s: float,
    X: int,
    condition: LocalCondition | None = None,
    budget: int | None = None,
):
    """sum over chi in Hom(A*/k*, J) with Phi_H(chi eta) <= X of
    f(chi eta) / Phi_H(chi eta)^s, and the running counts needed for the
    tail estimate. Returns (value, count(X), count(X/2))."""
    G = J.ambient
    hJ = H.order // J.order
    T = [] if eta is None else [c.p for c in eta.components if c.conductor_exponent]
    Tset = set(T)
    opts = LocalOptions(G, J)
    # choices at the primes where eta ramifies: chi_p of any level, combined
    t_choices = []
    for p in T:
        ec = eta.component(p)
        K = max(ec.k, level_cap(p, _exponent(J)))
        combos = []
        for c in _local_maps(G, J, p, K):
            tw = c.combine(ec)
            combos.append((c, tw))
        t_choices.append(combos)
    emin = opts.min_exponent
    total = 0.0
    n_all = 0
    n_half = 0
    half = X // 2

    def node_value(comps):
        e_total = 1
        for c in comps:
            e_total *= c.p ** (c.phi_exponent_full * H.order // G.order)
        return e_total

    def finish(comps):
        nonlocal total, n_all, n_half
        phi = node_value(comps)
        if phi > X:
            return
        if condition is not None:
            ext = GExtension(G, tuple(sorted(comps, key=lambda c: c.p)))
            if not _f_cond(ext, condition):
                return
        total += phi ** (-s)
        n_all += 1
        if phi <= half:
            n_half += 1

    count_nodes = 0
    for tsel in itertools.product(*t_choices) if t_choices else [()]:
        base = [tw for (_, tw) in tsel]
        base_val = node_value(base)
        if base_val > X:
            continue
        lim_phi_J = iroot(X // base_val, hJ)
        primes = [p for p in primes_upto(opts.prime_limit(lim_phi_J) if emin else 1) if p not in Tset]

        def rec(start, cur, chosen):
            nonlocal count_nodes
            count_nodes += 1
            if budget is not None and count_nodes > budget:
                raise BudgetExceeded(f"sum exceeded budget of {budget} nodes")
            comps = base + [LocalComponent(G, o.p, o.k, o.images) for o in chosen]
            finish(comps)
            for idx in range(start, len(primes)):
                p = primes[idx]
                if cur * p**emin > lim_phi_J:
                    break
                for o in opts.options(p):
                    v = cur * o.power
                    if v <= lim_phi_J:
                        chosen.append(o)
                        rec(idx + 1, v, chosen)
                        chosen.pop()

        rec(0, 1, [])
    return total, n_all, n_half


def _f_cond(ext: GExtension, condition: LocalCondition) -> bool:
    for p in ext.ramified_primes:
        if p in condition.S:
            continue
        sym = ext.local_symbol(p)
        if condition.v in sym.inertia_image and sym.frobenius_rep not in condition.L:
            return False
    return True


def lhs_tail_estimate(n_all: int, n_half: int, X: int, s: float, H: Subgroup, J: Subgroup) -> float:
    """Estimate of sum_{Phi > X} Phi^{-s} from the observed counts.

    Two models are fitted to N(X) and the larger tail is returned: a pure
    power with the growth exponent seen between X/2 and X, and the shape
    c Y^g (log Y)^{w-1} with g = 1/(|H| (1 - 1/Q')) and w = nu(k, J) for Q'
    the smallest prime of |J|. For the second,
        tail = -N(X) X^{-s} + s c Gamma(w, (s - g) log X) / (s - g)^w.
    """
    if n_all == 0:
        return 0.0
    tails = []
    if n_half and n_all > n_half:
        g = math.log2(n_all / n_half)
        tails.append(n_all * g * X ** (-s) / (s - g) if s > g else math.inf)
    Qp = min(factorize(J.order)) if J.order > 1 else 2
    g = 1.0 / alpha(H, Qp)
    w = float(nu_k(J, Qp))
    if s <= g:
        return math.inf
    lx = math.log(X)
    c = n_all / (X**g * lx ** (w - 1))
    integral = float(mpmath.gammainc(w, (s - g) * lx)) / (s - g) ** w
    tails.append(max(0.0, -n_all * X ** (-s) + s * c * integral))
    return max(tails)


def poisson_check(
    H: Subgroup,
    J: Subgroup,
    eta: GExtension | None,
    s: float,
    X: int,
    P: int,
    condition: LocalCondition | None = None,
    S=None,
    budget: int | None = None,
) -> PoissonReport:
    """Both sides of the Poisson summation identity for the twisted sum
    over Hom(A*/k*, J), with stated tail estimates."""
    G = J.ambient
    Q = G.q_small
    a_H = alpha(H, Q)
    if s * a_H <= 1:
        raise DomainError(f"need s > 1/alpha(H) = 1/{a_H}")
    if H.order // J.order != Q or not J <= H:
        raise ValueError("J must have index Q in H")
    S = tuple(sorted(set(default_S(G) if S is None else S)))
    lhs, n_all, n_half = twisted_sum(H, J, eta, s, X, condition, budget)
    tail_lhs = lhs_tail_estimate(n_all, n_half, X, s, H, J)
    rhs = 0j
    tail_rhs = 0.0
    terms = 0
    for x in GlobalDualElement.all_elements(J, S):
        ev = euler_h(eta, x, s, P, H, condition)
        if ev.value != 0:
            terms += 1
        rhs += ev.value
        tail_rhs += ev.tail
    norm = J.torsion(2).order
    return PoissonReport(s, X, P, lhs, rhs / norm, tail_lhs, tail_rhs / norm, terms)


# -------------------------------------------------- cancellation and Tauber


def nu_alpha(G: FinAbGroup):
    Q = G.q_small
    return alpha(G, Q), nu_k(G, Q)


def normaliser(B: int, a: float, omega: float) -> float:
    return B**a * math.log(B) ** (omega - 1)


@dataclass
class CancellationRow:
    bound: int
    n_H: int
    n_J: int
    normalised: float

    @property
    def difference(self) -> int:
        return self.n_H - self.n_J


@dataclass
class CancellationReport:
    rows: list

    @property
    def trend_ok(self) -> bool:
        vals = [r.normalised for r in self.rows if r.bound > 100]
        return trend_non_increasing(vals)


def cancellation_check(
    G: FinAbGroup, L: Subgroup, J: Subgroup, H: Subgroup, bounds, S=None, budget: int | None = None
) -> CancellationReport:
    """N(H, L; B^{|H|/|G|}) - N(J; B^{|J|/|G|}) normalised by
    B^{1/alpha(G)} (log B)^{nu(k, G) - 1}."""
    a, nu = nu_alpha(G)
    rows = []
    for B in sorted(int(b) for b in bounds):
        nH = count(CountSpec(G, L, H, B, N_H, Fraction(H.order, G.order), S=S), budget)
        nJ = count(CountSpec(G, L, J, B, N_PLAIN, Fraction(J.order, G.order), S=S), budget)
        norm = normaliser(B, 1 / a, float(nu)) if B > 1 else 1.0
        rows.append(CancellationRow(B, nH, nJ, (nH - nJ) / norm))
    return CancellationReport(rows)


@dataclass
class TauberFit:
    a: float
    omega: float
    rows: list  # (B, count, normalised)

    @property
    def stability(self) -> float:
        """Largest relative change between consecutive points among the
        last three."""
        last = [r[2] for r in self.rows[-3:]]
        return max(abs(y - x) / abs(x) for x, y in zip(last, last[1:]))


def tauber_fit(points, a: float, omega: float) -> TauberFit:
    """Normalise (B, count) pairs by B^a (log B)^{omega - 1}."""
    if a <= 0 or omega < 1:
        raise ValueError("need a > 0 and omega >= 1")
    pts = sorted((int(B), int(c)) for B, c in points)
    if len(pts) < 3:
        raise InsufficientData("need at least three points")
    rows = [(B, c, c / normaliser(B, a, omega)) for B, c in pts]
    return TauberFit(a, omega, rows)


def hom_counts(J: FinAbGroup, bounds, budget: int | None = None) -> list:
    """(B, #Hom(A*/k*, J) with Phi_J <= B) for each bound, one enumeration."""
    bounds = sorted(int(b) for b in bounds)
    opts = LocalOptions(J)
    vals = []
    search(opts, bounds[-1], lambda chosen, v: vals.append(v), budget=budget)
    vals.sort()
    return [(B, bisect.bisect_right(vals, B)) for B in bounds]


def case1_euler_ratio(G: FinAbGroup, q: int, L: Subgroup | None = None) -> float:
    """f^_{G,v}(0; 1/alpha(G)) / 1^_v(0; 1/alpha(G)) at a tame prime q."""
    H = G.whole()
    cond = LocalCondition.standard(G, L)
    place = LocalPlace.of(q)
    from .local_fourier import DualLocalElement

    x = DualLocalElement.zero(H, place)
    s = 1 / alpha(H, G.q_small)
    num = ft_graded(x, LocalWeight(H.order, cond)).value(s)
    den = ft_graded(x, LocalWeight.trivial(H)).value(s)
    return (num / den).real
