"""Hasse norm principle and weak approximation through the knot image in the
exterior square, plus density scans over enumerated extensions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .dirichlet import (
    GExtension,
    LocalOptions,
    SubgroupTable,
    local_log,
    search,
)
from .groups import FinAbGroup, GroupSpecError, Subgroup, exterior_square
from .lattice import distinguished_subgroup, v_element
from .numtheory import primes_upto


@dataclass(frozen=True)
class KnotImageReport:
    extension: GExtension
    image: Subgroup
    contributing_places: tuple


def knot_image(ext: GExtension, audit_upto: int | None = None) -> KnotImageReport:
    """Subgroup of the exterior square generated by the wedge images of the
    decomposition groups at the ramified primes.

    With audit_upto, unramified primes up to that bound and the real place
    are also checked to contribute nothing.
    """
    G = ext.target
    WS = exterior_square(G)
    image = WS.group.trivial()
    contributing = []
    for p in ext.ramified_primes:
        w = WS.image(ext.decomposition_group(p))
        if not w.is_trivial():
            contributing.append(p)
            image = image.join(w)
    if audit_upto is not None:
        ram = set(ext.ramified_primes)
        places = ["inf"] + [p for p in primes_upto(audit_upto) if p not in ram]
        for p in places:
            w = WS.image(ext.decomposition_group(p))
            if not w.is_trivial():
                raise AssertionError(f"unramified place {p} has non-cyclic decomposition group")
    return KnotImageReport(ext, image, tuple(contributing))


def hnp_holds(ext: GExtension) -> bool:
    return knot_image(ext).image.is_whole()


def wa_holds(ext: GExtension) -> bool:
    return knot_image(ext).image.is_trivial()


# ------------------------------------------------------------ fast scanning


class Classifier:
    """Table driven HNP / WA / Lambda evaluation for search nodes."""

    def __init__(self, G: FinAbGroup, i: int = 1, j: int | None = None, S=None):
        st = G.require_theorem_shape()
        self.G = G
        self.i = i
        self.j = st.t if j is None else j
        if self.i == self.j:
            raise ValueError("i and j must differ")
        from .dirichlet import default_S

        self.S = frozenset(default_S(G) if S is None else S)
        self.table = SubgroupTable(G)
        self.WS = exterior_square(G)
        self.wtable = SubgroupTable(self.WS.group)
        self.v = v_element(G, self.i)
        Lp = distinguished_subgroup(G, self.j)
        self.Lp_members = frozenset(Lp.elements())
        self.has_v = [self.v in m for m in self.table.members]
        self.in_Lp = [m <= self.Lp_members for m in self.table.members]
        self.wedge_id = [self.wtable.id_of(self.WS.image(S_)) for S_ in self.table.subs]
        self._value = {}
        self._inertia = {}

    def value(self, opt, u: int):
        key = (opt, u % opt.p**opt.k)
        r = self._value.get(key)
        if r is None:
            G = self.G
            orders = tuple(G.element_order(a) for a in opt.images)
            r = G.combine(local_log(opt.p, opt.k, u, orders), opt.images)
            self._value[key] = r
        return r

    def inertia_id(self, opt) -> int:
        r = self._inertia.get(opt)
        if r is None:
            r = self.table.trivial_id
            for x in opt.images:
                r = self.table.join_elem(r, x)
            self._inertia[opt] = r
        return r

    def classify(self, chosen):
        """(hnp, wa, lambda) for the homomorphism given by local options."""
        G = self.G
        knot = self.wtable.trivial_id
        lam = True
        for o in chosen:
            frob = G.identity
            for o2 in chosen:
                if o2 is not o:
                    frob = G.add(frob, self.value(o2, o.p))
            iid = self.inertia_id(o)
            did = self.table.join_elem(iid, frob)
            knot = self.wtable.join(knot, self.wedge_id[did])
            if lam and o.p not in self.S and self.has_v[iid]:
                if not (frob in self.Lp_members and self.in_Lp[iid]):
                    lam = False
        return knot == self.wtable.full_id, knot == self.wtable.trivial_id, lam


@dataclass(frozen=True)
class DensityRow:
    bound: int
    total: int
    hnp_fail: int
    wa_hold: int
    lambda_hold: int

    def _ratio(self, n):
        return Fraction(n, self.total) if self.total else None

    @property
    def hnp_fail_ratio(self):
        return self._ratio(self.hnp_fail)

    @property
    def wa_hold_ratio(self):
        return self._ratio(self.wa_hold)

    @property
    def lambda_ratio(self):
        return self._ratio(self.lambda_hold)


def _scan_part(orders, bmax, i, j, S, part, nparts, budget):
    G = FinAbGroup(orders)
    clf = Classifier(G, i, j, S)
    opts = LocalOptions(G)
    table = clf.table
    out = []

    def visit(chosen, value):
        if not chosen:
            return
        sid = table.trivial_id
        for o in chosen:
            sid = table.join(sid, clf.inertia_id(o))
        if sid != table.full_id:
            return
        out.append((value,) + clf.classify(chosen))

    filt = None if nparts == 1 else (lambda idx: idx % nparts == part)
    search(opts, bmax, visit, budget=budget, first_prime_filter=filt)
    return out


def scan_records(G: FinAbGroup, bmax: int, i=1, j=None, S=None, workers=1, budget=None) -> list:
    """(discriminant, hnp, wa, lambda) for every extension with Delta <= bmax."""
    if G.structure.t < 2:
        raise GroupSpecError(f"{G} has cyclic {G.q_small}-Sylow subgroup")
    if workers <= 1:
        recs = _scan_part(G.cyclic_orders, bmax, i, j, S, 0, 1, budget)
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_scan_part, G.cyclic_orders, bmax, i, j, S, k, workers, budget) for k in range(workers)]
            recs = [r for f in futs for r in f.result()]
    recs.sort()
    return recs


def density_scan(G: FinAbGroup, bounds, i=1, j=None, S=None, workers=1, budget=None) -> list:
    """One DensityRow per bound from a single enumeration up to max(bounds)."""
    bounds = sorted(int(b) for b in bounds)
    recs = scan_records(G, bounds[-1], i, j, S, workers, budget)
    rows = []
    for B in bounds:
        sel = [r for r in recs if r[0] <= B]
        rows.append(
            DensityRow(
                B,
                len(sel),
                sum(1 for r in sel if not r[1]),
                sum(1 for r in sel if r[2]),
                sum(1 for r in sel if r[3]),
            )
        )
    return rows


def fmt_ratio(r) -> str:
    return "" if r is None else format(float(r), ".17g")


def density_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["B", "total", "hnp_fail", "wa_hold", "lambda_hold", "hnp_fail_ratio", "wa_hold_ratio", "lambda_ratio"])
    for r in rows:
        w.writerow(
            [r.bound, r.total, r.hnp_fail, r.wa_hold, r.lambda_hold]
            + [fmt_ratio(x) for x in (r.hnp_fail_ratio, r.wa_hold_ratio, r.lambda_ratio)]
        )
    return buf.getvalue()


def trend_non_increasing(values, max_inversions: int = 1, tolerance: float = 0.10) -> bool:
    """Non-increasing up to at most one small relative inversion.

    None entries (undefined ratios) are skipped.
    """
    vals = [float(v) for v in values if v is not None]
    inversions = 0
    for a, b in zip(vals, vals[1:]):
        if b > a:
            if a == 0 or (b - a) / a > tolerance:
                return False
            inversions += 1
    return inversions <= max_inversions
