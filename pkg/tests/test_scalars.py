from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from adelic.errors import AdelicError
from adelic.scalars import (
    DEFAULT_POLICY,
    ExactPosReal,
    Order,
    PrecisionPolicy,
    compare,
    factorint,
    harmonic,
    max_of,
    rat,
    to_float,
    valuation,
)

small_rats = st.fractions(min_value=-5, max_value=5, max_denominator=12)
primes = st.sampled_from([2, 3, 5, 7, 11, 13])


@st.composite
def pos_reals(draw):
    x = ExactPosReal.exp(draw(st.sampled_from([0, 0, Fraction(1, 3), Fraction(-5, 12)])))
    for _ in range(draw(st.integers(0, 3))):
        x = x * ExactPosReal.prime_power(draw(primes), draw(small_rats))
    return x


def mp_value(x: ExactPosReal):
    with mpmath.workprec(300):
        out = mpmath.exp(mpmath.mpf(x.e.numerator) / x.e.denominator)
        for p, r in x.logs:
            out *= mpmath.power(p, mpmath.mpf(r.numerator) / r.denominator)
        return out


def test_rat_parses_strings_and_rejects_floats():
    assert rat("3/4") == Fraction(3, 4)
    assert rat(5) == Fraction(5)
    with pytest.raises((TypeError, ValueError)):
        rat(0.5)


def test_factorint_and_valuation():
    assert factorint(360) == ((2, 3), (3, 2), (5, 1))
    assert valuation(Fraction(50, 3), 5) == 2
    assert valuation(Fraction(50, 3), 3) == -1


def test_from_rational_normalizes():
    x = ExactPosReal.from_rational(Fraction(12, 5))
    assert x.prime_logs == {2: 2, 3: 1, 5: -1}
    assert x.as_rational() == Fraction(12, 5)
    with pytest.raises(AdelicError):
        ExactPosReal.from_rational(0)


def test_sqrt2_times_fifth_root_compares_exactly():
    # sqrt(2) * 5^(1/4) < 5^(1/2)  <=>  2^2 * 5 < 5^2 ... after raising to the 4th power: 20 < 625
    lhs = ExactPosReal.from_rational(2).sqrt() * ExactPosReal.prime_power(5, Fraction(1, 4))
    out = compare(lhs, ExactPosReal.prime_power(5, Fraction(1, 2)))
    assert out.order is Order.LESS and out.exact


def test_compare_with_exp_uses_intervals():
    # e^(5/12) ~ 1.5169 < sqrt(3) ~ 1.7320
    out = compare(ExactPosReal.exp(Fraction(5, 12)), ExactPosReal.from_rational(3).sqrt())
    assert out.order is Order.LESS
    assert out.bits is not None


def test_compare_equal_values_with_same_exp_part():
    a = ExactPosReal.exp(1) * ExactPosReal.prime_power(2, Fraction(1, 2))
    b = ExactPosReal.exp(1) * ExactPosReal.prime_power(4, Fraction(1, 4))
    assert a == b
    out = compare(a, b)
    assert out.order is Order.EQUAL and out.exact


def test_compare_undecided_when_precision_runs_out():
    # e vs 2^r with r a 17-digit truncation of 1/log 2: the logs differ by about 1e-17
    policy = PrecisionPolicy(start_bits=32, max_bits=32)
    r = Fraction(14426950408889634, 10**16)
    a, b = ExactPosReal.exp(1), ExactPosReal.prime_power(2, r)
    assert compare(a, b, policy).order is Order.UNDECIDED
    out = compare(a, b, PrecisionPolicy(64, 4096))
    assert out.order is Order.GREATER and out.bits > 32


def test_to_float_encloses_value():
    x = ExactPosReal.from_rational(2).sqrt()
    enc = to_float(x, 128)
    assert enc.lo * enc.lo <= 2 <= enc.hi * enc.hi
    assert enc.width < Fraction(1, 2**100)


def test_harmonic_numbers():
    assert harmonic(1) == 1
    assert harmonic(4) == Fraction(25, 12)


def test_max_of_picks_largest():
    vals = [ExactPosReal.from_rational(3).sqrt(), ExactPosReal.prime_power(2, Fraction(3, 4)), ExactPosReal.one()]
    assert max_of(vals) == ExactPosReal.from_rational(3).sqrt()


def test_json_round_trip_format():
    x = ExactPosReal.prime_power(5, Fraction(-1, 8))
    assert x.to_json() == {"e": "0", "logs": {"5": "-1/8"}}
    assert ExactPosReal.from_json(x.to_json()) == x


@given(pos_reals(), pos_reals())
@settings(max_examples=150, deadline=None)
def test_compare_agrees_with_mpmath(a, b):
    out = compare(a, b, DEFAULT_POLICY)
    va, vb = mp_value(a), mp_value(b)
    if out.order is Order.LESS:
        assert va < vb
    elif out.order is Order.GREATER:
        assert va > vb
    elif out.order is Order.EQUAL:
        assert a == b


@given(pos_reals(), pos_reals(), small_rats)
@settings(max_examples=150, deadline=None)
def test_group_laws(a, b, r):
    assert a * b == b * a
    assert (a * b) / b == a
    assert (a * b) ** r == a**r * b**r
    assert a * a.inverse() == ExactPosReal.one()
    assert a.sqrt() ** 2 == a


@given(pos_reals())
@settings(max_examples=100, deadline=None)
def test_enclosures_are_nested_and_contain_the_value(x):
    coarse, fine = to_float(x, 64), to_float(x, 256)
    assert coarse.lo <= fine.lo <= fine.hi <= coarse.hi
    with mpmath.workprec(200):
        v = mp_value(x)
        assert mpmath.mpf(coarse.lo.numerator) / coarse.lo.denominator <= v * (1 + mpmath.mpf(2) ** -150)
        assert v <= mpmath.mpf(coarse.hi.numerator) / coarse.hi.denominator * (1 + mpmath.mpf(2) ** -150)


@given(pos_reals())
@settings(max_examples=100, deadline=None)
def test_json_round_trip(x):
    assert ExactPosReal.from_json(x.to_json()) == x
