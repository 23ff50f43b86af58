"""Small elementary number theory helpers shared by the other modules."""

from __future__ import annotations

from functools import lru_cache
from math import gcd

from sympy import factorint, isprime, primerange

__all__ = [
    "factorize",
    "isprime",
    "primes_upto",
    "divisors",
    "valuation",
    "iroot",
    "int_pow_le",
    "primitive_root",
    "dlog_mod",
    "euler_phi",
    "squarefree_kernel",
    "fundamental_discriminant",
    "lcm",
]


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b if a and b else 0


@lru_cache(maxsize=4096)
def _factor_cached(n: int) -> tuple:
    return tuple(sorted(factorint(n).items()))


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of a positive integer as {p: e}."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    if n == 1:
        return {}
    return dict(_factor_cached(n))


def primes_upto(n: int) -> list[int]:
    return list(primerange(2, n + 1)) if n >= 2 else []


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorize(n).items():
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def euler_phi(n: int) -> int:
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def iroot(n: int, k: int) -> int:
    """Largest integer r with r**k <= n."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    r = int(round(n ** (1.0 / k)))
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def int_pow_le(base: int, num: int, den: int) -> int:
    """floor(base ** (num/den)) computed exactly."""
    return iroot(base**num, den)


@lru_cache(maxsize=None)
def primitive_root(n: int) -> int:
    """Least primitive root modulo n, for n = p^k with p odd (or n in {2, 4})."""
    if n == 2:
        return 1
    if n == 4:
        return 3
    fac = factorize(n)
    if len(fac) != 1 or 2 in fac:
        raise ValueError(f"{n} has no primitive root handled here")
    phi = euler_phi(n)
    qs = list(factorize(phi))
    for g in range(2, n):
        if gcd(g, n) != 1:
            continue
        if all(pow(g, phi // q, n) != 1 for q in qs):
            return g
    raise ArithmeticError(f"no primitive root mod {n}")


@lru_cache(maxsize=None)
def _power_table(h: int, e: int, mod: int) -> dict[int, int]:
    table = {}
    y = 1
    for k in range(e):
        table[y] = k
        y = y * h % mod
    return table


def dlog_mod(u: int, g: int, n: int, mod: int, e: int) -> int:
    """x mod e where u = g^x in the cyclic group <g> of order n modulo mod.

    Requires e | n. Works by projecting to the order-e quotient, so the cost
    is a table of size e rather than n.
    """
    if e == 1:
        return 0
    if n % e:
        raise ValueError("e must divide the group order")
    k = n // e
    h = pow(g, k, mod)
    target = pow(u % mod, k, mod)
    table = _power_table(h, e, mod)
    try:
        return table[target]
    except KeyError:
        raise ValueError(f"{u} is not in the group generated by {g} mod {mod}") from None


def squarefree_kernel(n: int) -> int:
    """Signed squarefree part: n divided by its largest square factor."""
    if n == 0:
        raise ValueError("squarefree kernel of zero")
    sign = -1 if n < 0 else 1
    out = 1
    for p, e in factorize(abs(n)).items():
        if e % 2:
            out *= p
    return sign * out


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt d) for a non-square integer d."""
    d0 = squarefree_kernel(d)
    if d0 == 1:
        raise ValueError("square input gives the trivial field")
    return d0 if d0 % 4 == 1 else 4 * d0
