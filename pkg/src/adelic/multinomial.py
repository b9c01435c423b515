"""The lcm p(n, l) of the multinomial coefficients l!/(i_1!...i_n!).

Two independent routes: direct enumeration of all compositions of l into n
parts, and the closed product over j of lcm(1..[(l+n-1)/j])/(l+j).  Around
them sit the q | r | s divisibility chain, the two divisibilities of the
induction lemma, and the effective bounds (n^l <= p*C(l+n-1, n-1),
p^2 <= n^(3l), lcm(1..m)^2 <= 8^m).  Everything is exact integer arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator

from sympy import primerange

from .errors import CapExceeded

MAX_COMPOSITIONS = 5 * 10**6
MAX_TUPLES = 10**6


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All (i_1..i_parts) >= 0 summing to ``total``, in descending lexicographic order."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def composition_count(total: int, parts: int) -> int:
    return math.comb(total + parts - 1, parts - 1)


def lcm_upto(m: int | Fraction) -> int:
    """d(x) = lcm(1, ..., [x]) as the product of p ** floor(log_p [x])."""
    m = math.floor(m)
    if m < 1:
        raise ValueError("lcm_upto needs m >= 1")
    out = 1
    for p in primerange(2, m + 1):
        pk = p
        while pk * p <= m:
            pk *= p
        out *= pk
    return out


def multinomial(total: int, parts: tuple[int, ...]) -> int:
    if any(i < 0 for i in parts) or sum(parts) != total:
        raise ValueError(f"{parts} is not a composition of {total}")
    out = math.factorial(total)
    for i in parts:
        out //= math.factorial(i)
    return out


def legendre(m: int, p: int) -> int:
    """v_p(m!) = sum_k floor(m / p^k)."""
    v, pk = 0, p
    while pk <= m:
        v += m // pk
        pk *= p
    return v


@dataclass(frozen=True)
class BruteForceLcm:
    value: int
    # per prime p <= l: max over compositions i of v_p(l!/i!), with the first maximizer
    max_valuation: dict[int, int] = field(default_factory=dict)
    argmax: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def reassembled(self) -> int:
        out = 1
        for p, v in self.max_valuation.items():
            out *= p**v
        return out


def p_bruteforce(n: int, l: int, *, valuations: bool = False, cap: int = MAX_COMPOSITIONS) -> int | BruteForceLcm:
    """lcm of l!/i! over every composition i of l into n parts.

    With ``valuations=True`` the per-prime maxima of v_p(l!/i!) are computed
    from Legendre's formula in the same pass and returned alongside.
    """
    if n < 1 or l < 1:
        raise ValueError("n and l must be >= 1")
    count = composition_count(l, n)
    if count > cap:
        raise CapExceeded(f"{count} compositions of {l} into {n} parts exceed the cap {cap}")
    fact = [math.factorial(k) for k in range(l + 1)]
    top = fact[l]
    acc = 1
    seen: set[tuple[int, ...]] = set()
    primes = list(primerange(2, l + 1)) if valuations else []
    leg = {p: [legendre(k, p) for k in range(l + 1)] for p in primes}
    best = {p: -1 for p in primes}
    arg: dict[int, tuple[int, ...]] = {}
    for comp in compositions(l, n):
        if primes:
            for p in primes:
                table = leg[p]
                v = table[l] - sum(table[i] for i in comp)
                if v > best[p]:
                    best[p], arg[p] = v, comp
        key = tuple(sorted(comp))
        if key in seen:
            continue
        seen.add(key)
        denom = 1
        for i in comp:
            denom *= fact[i]
        acc = math.lcm(acc, top // denom)
    if valuations:
        return BruteForceLcm(acc, best, arg)
    return acc


def p_closed_form(n: int, l: int) -> int:
    """prod_{j=1}^{n-1} lcm(1..[(l+n-1)/j]) / (l+j), evaluated over Q."""
    if n < 1 or l < 1:
        raise ValueError("n and l must be >= 1")
    out = Fraction(1)
    for j in range(1, n):
        out *= Fraction(lcm_upto((l + n - 1) // j), l + j)
    if out.denominator != 1:
        raise AssertionError(f"closed form for p({n},{l}) is not integral: {out}")
    return out.numerator


@lru_cache(maxsize=None)
def p_value(n: int, l: int) -> int:
    return p_bruteforce(n, l)


@dataclass(frozen=True)
class ChainValues:
    q: int
    r: int
    s: int
    r_tuples: int  # r via its lcm-of-products description

    @property
    def equal(self) -> bool:
        return self.q == self.r == self.s == self.r_tuples


def q_value(n: int, l: int) -> int:
    if n == 1:
        return 1
    return math.factorial(l + n - 1) // math.factorial(l) * p_value(n, l)


def chain_qrs(n: int, l: int, *, cap: int = MAX_TUPLES) -> ChainValues:
    """q, r and s from their three definitions, and r | s | q | r checked."""
    if n < 1 or l < 1:
        raise ValueError("n and l must be >= 1")
    if n == 1:
        return ChainValues(1, 1, 1, 1)
    top = l + n - 1
    q = q_value(n, l)
    r = 1
    for k in range(1, n):
        r *= lcm_upto(top // k)
    if math.comb(top, n - 1) > cap:
        raise CapExceeded(f"s({n},{l}) needs {math.comb(top, n - 1)} tuples, cap {cap}")
    s = 1
    for tup in combinations(range(1, top + 1), n - 1):
        s = math.lcm(s, math.prod(tup))
    ranges = [range(1, top // h + 1) for h in range(1, n)]
    if math.prod(len(rg) for rg in ranges) > cap:
        raise CapExceeded(f"r({n},{l}) tuple enumeration exceeds cap {cap}")
    r_tuples = 1
    for tup in product(*ranges):
        r_tuples = math.lcm(r_tuples, math.prod(tup))
    for a, b in ((r, s), (s, q), (q, r)):
        if b % a:
            raise AssertionError(f"divisibility chain broken at ({n},{l}): {a} does not divide {b}")
    return ChainValues(q, r, s, r_tuples)


@dataclass(frozen=True)
class LemmaCheck:
    n: int
    l: int
    monotone_quotient: int  # q(n,l) / q(n,l-1)
    descent_quotient: int  # d(1+l/(n-1)) q(n-1,l+1) / q(n,l)


def lemma_divisibilities(n: int, l: int) -> LemmaCheck:
    """q(n,l-1) | q(n,l) and q(n,l) | d(1+l/(n-1)) * q(n-1,l+1)."""
    if n < 2 or l < 2:
        raise ValueError("need n >= 2 and l >= 2")
    q_prev, q_here = q_value(n, l - 1), q_value(n, l)
    bound = lcm_upto(1 + Fraction(l, n - 1)) * q_value(n - 1, l + 1)
    if q_here % q_prev or bound % q_here:
        raise AssertionError(f"lemma fails at ({n},{l})")
    return LemmaCheck(n, l, q_here // q_prev, bound // q_here)


@dataclass(frozen=True)
class BoundsCheck:
    n: int
    l: int
    p: int
    lower_ok: bool  # n^l <= p * C(l+n-1, n-1)
    upper_ok: bool  # p^2 <= n^(3l)

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def bounds_check(n: int, l: int, p: int | None = None) -> BoundsCheck:
    p = p_value(n, l) if p is None else p
    c = math.comb(l + n - 1, n - 1)
    return BoundsCheck(n, l, p, n**l <= p * c, p * p <= n ** (3 * l))


def psi_bound_check(x_max: int) -> list[int]:
    """Integers m <= x_max violating lcm(1..m)^2 <= 8^m (empty when the bound holds)."""
    if x_max < 1:
        raise ValueError("x_max must be >= 1")
    bad = []
    d = 1
    for m in range(1, x_max + 1):
        # d(m) = d(m-1) * p exactly when m is a power of the prime p
        if m > 1:
            f = _prime_power_base(m)
            if f:
                d *= f
        if d * d > 8**m:
            bad.append(m)
    return bad


def _prime_power_base(m: int) -> int:
    from .scalars import factorint

    fac = factorint(m)
    return fac[0][0] if len(fac) == 1 else 0


def factor_string(value: int) -> str:
    from .scalars import factorint

    if value == 1:
        return "1"
    return " * ".join(f"{p}^{k}" for p, k in factorint(value))
