"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 budget exhausted,
3 a check failed (the first counterexample is printed as JSON).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from .dirichlet import (
    BudgetExceeded,
    GExtension,
    atomic_write_text,
    cached_enumeration,
    extension_record,
    find_by_discriminant,
    jsonl_text,
)
from .groups import FinAbGroup, GroupSpecError, exterior_square, subgroups
from .lattice import condition_subgroup, parse_elements, w_partition
from .norms import density_csv, density_scan, knot_image

CACHE_ENV = "HNPCOUNT_CACHE_DIR"


class CheckFailed(Exception):
    def __init__(self, payload: dict):
        super().__init__(payload.get("check", "check failed"))
        self.payload = payload


# ----------------------------------------------------------------- parsing


def parse_bound(text: str) -> int:
    """Exact integer from "100", "1e8" or "2.5e3"."""
    try:
        d = Decimal(text.strip())
    except InvalidOperation:
        raise GroupSpecError(f"cannot parse bound {text!r}") from None
    if d != d.to_integral_value():
        raise GroupSpecError(f"bound {text!r} is not an integer")
    n = int(d)
    if n < 1:
        raise GroupSpecError("bounds must be >= 1")
    return n


def parse_bounds(text: str) -> list:
    return [parse_bound(t) for t in text.split(",") if t.strip()]


def parse_primes(text: str) -> list:
    """"2,7" or "3..97" (primes in the range)."""
    from .numtheory import isprime, primes_upto

    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = (int(v) for v in part.split(".."))
            out += [p for p in primes_upto(hi) if p >= lo]
        else:
            p = int(part)
            if not isprime(p):
                raise GroupSpecError(f"{p} is not prime")
            out.append(p)
    return sorted(set(out))


@dataclass
class RunConfig:
    group: FinAbGroup
    L: object = None
    bounds: list = field(default_factory=list)
    S: tuple | None = None
    i: int = 1
    j: int | None = None
    workers: int = 1
    out: str | None = None
    fmt: str | None = None
    cache_dir: str | None = None
    budget: int | None = None
    seed: int = 0

    @classmethod
    def from_args(cls, a) -> "RunConfig":
        G = FinAbGroup.parse(a.group)
        L = None
        if getattr(a, "L", None):
            L = G.subgroup(G.m_generators() + parse_elements(G, a.L))
        bounds = []
        if getattr(a, "bound", None):
            bounds = [parse_bound(a.bound)]
        if getattr(a, "bounds", None):
            bounds = parse_bounds(a.bounds)
        S = tuple(parse_primes(a.S)) if getattr(a, "S", None) else None
        if a.i is not None and a.j is not None and a.i == a.j:
            raise GroupSpecError("i and j must differ")
        cache = a.cache_dir or os.environ.get(CACHE_ENV)
        workers = a.workers if a.workers is not None else (os.cpu_count() or 1)
        return cls(G, L, bounds, S, a.i or 1, a.j, max(1, workers), a.out, a.format, cache, a.budget, a.seed)

    def condition_L(self):
        return self.L if self.L is not None else condition_subgroup(self.group)


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        atomic_write_text(cfg.out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_enumerate(cfg: RunConfig) -> None:
    if len(cfg.bounds) != 1:
        raise GroupSpecError("enumerate needs a single --bound")
    B = cfg.bounds[0]
    exts = cached_enumeration(cfg.group, B, cfg.cache_dir, workers=cfg.workers, budget=cfg.budget)
    emit(cfg, jsonl_text(cfg.group, B, exts))


def cmd_density(cfg: RunConfig) -> None:
    if not cfg.bounds:
        raise GroupSpecError("density needs --bounds")
    G = cfg.group
    if G.structure.t < 2:
        raise GroupSpecError(f"{G} has cyclic {G.q_small}-Sylow subgroup; the norm principle always holds")
    rows = density_scan(G, cfg.bounds, cfg.i, cfg.j, cfg.S, workers=cfg.workers, budget=cfg.budget)
    emit(cfg, density_csv(rows))


def cmd_find(cfg: RunConfig, disc: int, ramified) -> None:
    hits = find_by_discriminant(cfg.group, disc, ramified)
    lines = []
    for e in hits:
        rec = extension_record(e)
        rep = knot_image(e)
        rec["hnp_holds"] = rep.image.is_whole()
        rec["wa_holds"] = rep.image.is_trivial()
        rec["noncyclic_places"] = [
            {"p": p, "decomposition_type": str(e.decomposition_group(p).type())}
            for p in e.ramified_primes
            if not _is_cyclic(e.decomposition_group(p))
        ]
        lines.append(json.dumps(rec, sort_keys=True))
    emit(cfg, "".join(line + "\n" for line in lines))
    sys.stderr.write(f"{len(hits)} extension(s) found\n")


def _is_cyclic(H) -> bool:
    return len(H.invariant_basis()[1]) <= 1


def cmd_group_info(cfg: RunConfig) -> None:
    G = cfg.group
    WS = exterior_square(G)
    info = {
        "group": str(G),
        "order": G.order,
        "exterior_square": str(FinAbGroup.canonical(WS.group.cyclic_orders)),
        "subgroups": len(subgroups(G)),
        "Q": G.q_small,
    }
    if G.structure.t >= 2:
        L = cfg.condition_L()
        W, W1, W2 = w_partition(G, L)
        info.update({"L": [list(g) for g in L.generators()], "W": len(W), "W1": len(W1), "W2": len(W2)})
    if cfg.fmt == "jsonl":
        emit(cfg, json.dumps(info, sort_keys=True) + "\n")
    else:
        emit(cfg, "".join(f"{k}: {v}\n" for k, v in info.items()))


def cmd_moebius(cfg: RunConfig) -> None:
    from .counting import moebius_inversion_check

    if len(cfg.bounds) != 1:
        raise GroupSpecError("moebius-check needs a single --bound")
    G = cfg.group
    G.require_theorem_shape()
    rep = moebius_inversion_check(G, cfg.condition_L(), cfg.bounds[0], cfg.S, cfg.budget)
    out = {
        "check": "moebius_inversion",
        "group": str(G),
        "bound": str(rep.bound),
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "terms": [{"H": [list(g) for g in H.generators()], "mu": mu, "count": n} for H, mu, n in rep.terms],
        "pass": rep.ok,
    }
    emit(cfg, json.dumps(out, sort_keys=True) + "\n")
    if not rep.ok:
        raise CheckFailed(out)


def cmd_local_ft_check(cfg: RunConfig, primes, svals) -> None:
    from .ftcheck import run_local_checks

    summary = run_local_checks(cfg.group, primes, svals, L=cfg.L, seed=cfg.seed)
    emit(cfg, json.dumps(summary, sort_keys=True) + "\n")
    if not summary["pass"]:
        raise CheckFailed(summary)


def cmd_poisson(cfg: RunConfig, s: float, X: int, P: int, eta_spec, rel_tol: float) -> None:
    from .counting import poisson_check
    from .local_fourier import LocalCondition

    G = cfg.group
    G.require_theorem_shape()
    L = cfg.condition_L()
    H = G.whole()
    J = H & L
    eta = None
    if eta_spec:
        m, imgs = eta_spec.split(":")
        eta = GExtension.from_images(G, int(m), parse_elements(G, imgs))
    cond = LocalCondition.standard(G, L, cfg.i, cfg.S)
    rep = poisson_check(H, J, eta, s, X, P, cond, S=cfg.S, budget=cfg.budget)
    ok = rep.within_tails and rep.relative <= rel_tol
    out = {
        "check": "poisson",
        "group": str(G),
        "s": s,
        "X": str(X),
        "P": str(P),
        "lhs": format(rep.lhs, ".17g"),
        "rhs": format(rep.rhs.real, ".17g"),
        "rhs_imag": format(rep.rhs.imag, ".17g"),
        "tail_lhs": format(rep.tail_lhs, ".17g"),
        "tail_rhs": format(rep.tail_rhs, ".17g"),
        "discrepancy": format(rep.discrepancy, ".17g"),
        "relative": format(rep.relative, ".17g"),
        "within_tails": rep.within_tails,
        "pass": ok,
    }
    emit(cfg, json.dumps(out, sort_keys=True) + "\n")
    if not ok:
        raise CheckFailed(out)


def cmd_tauber(cfg: RunConfig, a, omega, max_stability: float) -> None:
    from .counting import alpha, hom_counts, tauber_fit
    from .local_fourier import nu_k

    G = cfg.group
    if len(cfg.bounds) < 3:
        raise GroupSpecError("tauber needs at least three --bounds")
    Q = G.q_small
    a = float(Fraction(a)) if a else 1.0 / alpha(G, Q)
    omega = float(Fraction(omega)) if omega else float(nu_k(G, Q))
    fit = tauber_fit(hom_counts(G, cfg.bounds, cfg.budget), a, omega)
    lines = ["B,count,normalised"] + [f"{B},{c},{v:.17g}" for B, c, v in fit.rows]
    lines.append(f"# stability,{fit.stability:.17g}")
    emit(cfg, "\n".join(lines) + "\n")
    if fit.stability > max_stability:
        raise CheckFailed({"check": "tauber", "stability": fit.stability, "max": max_stability})


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", required=True, help='finite abelian group, e.g. "C2xC4"')
    common.add_argument("--L", help='generators of L over the e-basis, e.g. "e1,e2^2" (M is always included)')
    common.add_argument("--bound", help="single bound, scientific notation allowed (1e8)")
    common.add_argument("--bounds", help="comma-separated bounds")
    common.add_argument("--S", help="finite primes of S (default: primes dividing |G|)")
    common.add_argument("--i", type=int, default=None, help="index i of e_i (default 1)")
    common.add_argument("--j", type=int, default=None, help="index j of the distinguished subgroup (default t)")
    common.add_argument("--out", help="output file (written atomically); default stdout")
    common.add_argument("--format", choices=["csv", "jsonl"], help="output format where there is a choice")
    common.add_argument("--cache-dir", help=f"enumeration cache directory (env {CACHE_ENV})")
    common.add_argument("--workers", type=int, default=None, help="worker processes (default: all CPUs)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    common.add_argument("--budget", type=int, default=None, help="maximum number of search nodes")

    p = argparse.ArgumentParser(prog="hnpcount", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("enumerate", parents=[common], help="list G-extensions with discriminant <= bound (JSONL)")
    sub.add_parser("density", parents=[common], help="HNP / WA / Lambda ratios per bound (CSV)")
    f = sub.add_parser("find", parents=[common], help="extensions with a given discriminant")
    f.add_argument("--disc", required=True, type=int)
    f.add_argument("--ramified", required=True, help="allowed ramified primes, e.g. 2,7")
    lf = sub.add_parser("local-ft-check", parents=[common], help="local Fourier transform identities")
    lf.add_argument("--primes", default="3..97")
    lf.add_argument("--s", default="0.3,0.7,1.1,0.5+0.5j", help="comma-separated complex s values")
    po = sub.add_parser("poisson", parents=[common], help="Poisson summation check")
    po.add_argument("--s", type=float, default=0.8)
    po.add_argument("--X", default="1e6")
    po.add_argument("--P", default="1e4")
    po.add_argument("--eta", help='twist as "m:images", e.g. "5:e2"')
    po.add_argument("--rel-tol", type=float, default=0.02)
    ta = sub.add_parser("tauber", parents=[common], help="normalised hom counts and stability")
    ta.add_argument("--a", help="exponent a (default 1/alpha(G))")
    ta.add_argument("--omega", help="log power omega (default nu(k, G))")
    ta.add_argument("--max-stability", type=float, default=0.25)
    sub.add_parser("moebius-check", parents=[common], help="Moebius inversion over subgroups")
    sub.add_parser("group-info", parents=[common], help="presentation, exterior square, subgroup data")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(a)
        random.seed(cfg.seed)
        c = a.command
        if c == "enumerate":
            cmd_enumerate(cfg)
        elif c == "density":
            cmd_density(cfg)
        elif c == "find":
            cmd_find(cfg, a.disc, parse_primes(a.ramified))
        elif c == "local-ft-check":
            cmd_local_ft_check(cfg, parse_primes(a.primes), [complex(v.strip()) for v in a.s.split(",")])
        elif c == "poisson":
            cmd_poisson(cfg, a.s, parse_bound(a.X), parse_bound(a.P), a.eta, a.rel_tol)
        elif c == "tauber":
            cmd_tauber(cfg, a.a, a.omega, a.max_stability)
        elif c == "moebius-check":
            cmd_moebius(cfg)
        elif c == "group-info":
            cmd_group_info(cfg)
    except BudgetExceeded as e:
        sys.stderr.write(f"budget exhausted: {e}\n")
        return 2
    except CheckFailed as e:
        sys.stderr.write(json.dumps(e.payload, sort_keys=True, default=str) + "\n")
        return 3
    except (GroupSpecError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
