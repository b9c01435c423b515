"""Exact positive reals of the form exp(r0) * prod p_i ** r_i with rational exponents.

Every height, minimum and exponentiated slope handled by the package lives in
this value domain.  Values are stored additively (the log form), so products
and rational powers are exact and equality is syntactic after normalization.

Comparisons between pure prime-power forms are decided exactly by clearing
denominators and comparing two integers.  As soon as the natural-log unit
``e`` is involved, only numeric certification is possible; it uses rigorous
interval arithmetic at escalating precision and may report the comparison as
undecided.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

from mpmath.libmp import from_int, libmpi

from .errors import AdelicError

Rat = Fraction
RatLike = Union[Fraction, int, str]
E = "e"


def rat(value: RatLike) -> Fraction:
    """Parse an int, Fraction or "a/b" string into a canonical Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rat_str(q: Fraction) -> str:
    return str(q)


@lru_cache(maxsize=65536)
def factorint(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of a positive integer as sorted (p, k) pairs."""
    if n < 1:
        raise ValueError(f"factorint needs a positive integer, got {n}")
    if n == 1:
        return ()
    from sympy import factorint as _sympy_factorint

    return tuple(sorted(_sympy_factorint(n).items()))


def valuation(q: Fraction | int, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation of zero is infinite")
    v = 0
    num, den = abs(q.numerator), q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def primes_of(q: Fraction | int) -> set[int]:
    q = Fraction(q)
    out = {p for p, _ in factorint(abs(q.numerator))} if q.numerator else set()
    out.update(p for p, _ in factorint(q.denominator))
    return out


@dataclass(frozen=True)
class PrecisionPolicy:
    """How hard ``compare`` may try before giving up.

    Reports record the policy they were produced with, so this is a value and
    not a module constant.
    """

    start_bits: int = 128
    max_bits: int = 4096
    integer_cap_bits: int = 10**6

    def __post_init__(self):
        if self.start_bits < 32 or self.max_bits < self.start_bits:
            raise ValueError("need 32 <= start_bits <= max_bits")
        if self.integer_cap_bits < 1:
            raise ValueError("integer_cap_bits must be positive")


DEFAULT_POLICY = PrecisionPolicy()


class Order(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class CompareOutcome:
    order: Order
    bits: int | None = None  # None: decided exactly; otherwise the precision used

    @property
    def exact(self) -> bool:
        return self.bits is None and self.order is not Order.UNDECIDED

    def __str__(self):
        if self.order is Order.UNDECIDED:
            return f"UndecidedAtPrecision({self.bits})"
        return self.order.value if self.bits is None else f"{self.order.value}@{self.bits}"


@dataclass(frozen=True)
class Enclosure:
    """Closed interval [lo, hi] with exact dyadic endpoints."""

    lo: Fraction
    hi: Fraction

    def __contains__(self, x) -> bool:
        x = Fraction(x)
        return self.lo <= x <= self.hi

    def contains(self, other: "Enclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class ExactPosReal:
    """exp(e) * prod(p ** r for p, r in logs), all exponents rational.

    ``logs`` is kept as a sorted tuple of (prime, exponent) pairs with no zero
    exponents, which makes structural equality coincide with equality of values
    whenever ``e == 0`` (unique factorization).
    """

    e: Fraction = Fraction(0)
    logs: tuple[tuple[int, Fraction], ...] = field(default=())

    @classmethod
    def _make(cls, e: Fraction, logs: Mapping[int, Fraction]) -> "ExactPosReal":
        return cls(Fraction(e), tuple(sorted((p, r) for p, r in logs.items() if r != 0)))

    @classmethod
    def one(cls) -> "ExactPosReal":
        return cls()

    @classmethod
    def from_rational(cls, q: RatLike) -> "ExactPosReal":
        q = rat(q)
        if q <= 0:
            raise AdelicError(f"non-positive base {q}")
        logs: dict[int, Fraction] = {}
        for p, k in factorint(q.numerator):
            logs[p] = logs.get(p, Fraction(0)) + k
        for p, k in factorint(q.denominator):
            logs[p] = logs.get(p, Fraction(0)) - k
        return cls._make(Fraction(0), logs)

    @classmethod
    def exp(cls, r: RatLike) -> "ExactPosReal":
        return cls(rat(r), ())

    @classmethod
    def prime_power(cls, p: int, r: RatLike) -> "ExactPosReal":
        """p^r; a composite base is factored so the representation stays canonical."""
        if not isinstance(p, int) or p < 2:
            raise AdelicError(f"base must be an integer >= 2, got {p!r}")
        r = rat(r)
        return cls._make(Fraction(0), {q: k * r for q, k in factorint(p)})

    @property
    def prime_logs(self) -> dict[int, Fraction]:
        return dict(self.logs)

    @property
    def is_one(self) -> bool:
        return self.e == 0 and not self.logs

    @property
    def is_rational(self) -> bool:
        return self.e == 0 and all(r.denominator == 1 for _, r in self.logs)

    def as_rational(self) -> Fraction:
        if not self.is_rational:
            raise AdelicError(f"{self} is not rational")
        out = Fraction(1)
        for p, r in self.logs:
            out *= Fraction(p) ** int(r)
        return out

    def __mul__(self, other: "ExactPosReal") -> "ExactPosReal":
        if not isinstance(other, ExactPosReal):
            return NotImplemented
        logs = dict(self.logs)
        for p, r in other.logs:
            logs[p] = logs.get(p, Fraction(0)) + r
        return ExactPosReal._make(self.e + other.e, logs)

    def __truediv__(self, other: "ExactPosReal") -> "ExactPosReal":
        if not isinstance(other, ExactPosReal):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, r: RatLike) -> "ExactPosReal":
        r = rat(r)
        return ExactPosReal._make(self.e * r, {p: s * r for p, s in self.logs})

    def inverse(self) -> "ExactPosReal":
        return self ** -1

    def sqrt(self) -> "ExactPosReal":
        return self ** Fraction(1, 2)

    def log_float(self) -> float:
        return float(self.e) + sum(float(r) * math.log(p) for p, r in self.logs)

    def __float__(self) -> float:
        return math.exp(self.log_float())

    def to_float(self, bits: int = 64) -> Enclosure:
        return to_float(self, bits)

    def to_json(self) -> dict:
        return {"e": rat_str(self.e), "logs": {str(p): rat_str(r) for p, r in self.logs}}

    @classmethod
    def from_json(cls, doc: Mapping) -> "ExactPosReal":
        e = rat(doc.get("e", "0"))
        logs: dict[int, Fraction] = {}
        for key, val in doc.get("logs", {}).items():
            p = int(key)
            if p < 2 or factorint(p) != ((p, 1),):
                raise AdelicError(f"log key {key} is not a prime")
            logs[p] = rat(val)
        return cls._make(e, logs)

    def __str__(self) -> str:
        parts = []
        if self.e:
            parts.append(f"e^({self.e})")
        for p, r in self.logs:
            parts.append(str(p) if r == 1 else f"{p}^({r})")
        return "*".join(parts) or "1"

    def __repr__(self) -> str:
        return f"ExactPosReal({self})"


ONE = ExactPosReal()


def normalize(factors: Iterable[tuple[RatLike, RatLike]]) -> ExactPosReal:
    """Build a value from ``(base, exponent)`` pairs; base is a positive rational or ``"e"``."""
    acc = ONE
    for base, exponent in factors:
        r = rat(exponent)
        if isinstance(base, str) and base.strip() == E:
            acc = acc * ExactPosReal.exp(r)
        else:
            acc = acc * ExactPosReal.from_rational(base) ** r
    return acc


# -- numeric enclosures ------------------------------------------------------

def _mpi_rat(q: Fraction, prec: int):
    a = (from_int(q.numerator), from_int(q.numerator))
    b = (from_int(q.denominator), from_int(q.denominator))
    return libmpi.mpi_div(a, b, prec)


@lru_cache(maxsize=4096)
def _mpi_log_prime(p: int, prec: int):
    return libmpi.mpi_log((from_int(p), from_int(p)), prec)


def _log_enclosure(x: ExactPosReal, prec: int):
    acc = _mpi_rat(x.e, prec)
    for p, r in x.logs:
        acc = libmpi.mpi_add(acc, libmpi.mpi_mul(_mpi_rat(r, prec), _mpi_log_prime(p, prec), prec), prec)
    return acc


def _mpf_to_fraction(v) -> Fraction:
    sign, man, exp, _ = v
    if not man:
        return Fraction(0)
    q = Fraction(int(man)) * (Fraction(2) ** exp)
    return -q if sign else q


def _raw_enclosure(x: ExactPosReal, prec: int) -> tuple[Fraction, Fraction]:
    lo, hi = libmpi.mpi_exp(_log_enclosure(x, prec), prec)
    return _mpf_to_fraction(lo), _mpf_to_fraction(hi)


def to_float(x: ExactPosReal, bits: int = 64) -> Enclosure:
    """Rigorous enclosure of ``x`` with relative width at most 2**(1 - bits).

    Enclosures for increasing ``bits`` are nested: endpoints are snapped
    outward to a dyadic grid whose anchor exponent does not depend on ``bits``.
    """
    if bits < 32:
        raise ValueError("bits must be >= 32")
    if x.is_rational:
        v = x.as_rational()
        return Enclosure(v, v)
    anchor_lo, _ = _raw_enclosure(x, 64)
    e0 = anchor_lo.numerator.bit_length() - anchor_lo.denominator.bit_length()
    if Fraction(2) ** e0 > anchor_lo:
        e0 -= 1
    step = Fraction(2) ** (e0 - bits - 3)
    lo, hi = _raw_enclosure(x, bits + 32)
    lo_k = math.floor(lo / step) - 2
    hi_k = math.ceil(hi / step) + 2
    return Enclosure(max(Fraction(0), lo_k * step), hi_k * step)


def _exact_compare_bits(d: ExactPosReal) -> int:
    den = 1
    for _, r in d.logs:
        den = math.lcm(den, r.denominator)
    return sum(int(abs(r) * den) * p.bit_length() for p, r in d.logs)


def compare(a: ExactPosReal, b: ExactPosReal, policy: PrecisionPolicy = DEFAULT_POLICY) -> CompareOutcome:
    """Order of ``a`` and ``b``; exact whenever no natural-log unit is involved."""
    d = a / b
    if d.is_one:
        return CompareOutcome(Order.EQUAL)
    if d.e == 0 and _exact_compare_bits(d) <= policy.integer_cap_bits:
        den = 1
        for _, r in d.logs:
            den = math.lcm(den, r.denominator)
        up, down = 1, 1
        for p, r in d.logs:
            k = r * den
            if k > 0:
                up *= p ** int(k)
            else:
                down *= p ** int(-k)
        return CompareOutcome(Order.LESS if up < down else Order.GREATER)
    bits = policy.start_bits
    while True:
        lo, hi = _log_enclosure(d, bits)
        lo_q, hi_q = _mpf_to_fraction(lo), _mpf_to_fraction(hi)
        if hi_q < 0:
            return CompareOutcome(Order.LESS, bits)
        if lo_q > 0:
            return CompareOutcome(Order.GREATER, bits)
        if bits >= policy.max_bits:
            return CompareOutcome(Order.UNDECIDED, bits)
        bits = min(2 * bits, policy.max_bits)


def max_of(values: Iterable[ExactPosReal], policy: PrecisionPolicy = DEFAULT_POLICY) -> ExactPosReal:
    it = iter(values)
    best = next(it)
    for v in it:
        out = compare(v, best, policy)
        if out.order is Order.UNDECIDED:
            raise AdelicError(f"cannot order {v} and {best}")
        if out.order is Order.GREATER:
            best = v
    return best


def harmonic(n: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))
