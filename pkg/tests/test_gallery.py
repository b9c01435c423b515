import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from adelic import bundles as bd
from adelic import gallery
from adelic import linalg as la
from adelic.errors import CapExceeded, InvalidBundle
from adelic.scalars import ExactPosReal, Order, compare


def test_double_factorial():
    assert [gallery.double_factorial(m) for m in range(8)] == [1, 1, 2, 3, 8, 15, 48, 105]


def test_mh_matrix_n2():
    assert gallery.mh_matrix(2) == la.mat([[2, 3], [3, 8]])


def test_mh_construct_n2():
    b, cert = gallery.mh_construct(2, Fraction(1, 100))
    # minors 2, 3, 3, 8 and det 7: the prime is nextprime(8)
    assert cert.max_minor == 8 and cert.minor_count == 5
    assert cert.p == 11
    assert cert.exponents[0] == 0
    assert gallery.mh_window_ok(cert)
    assert bd.height(b, [1, 0]).value.is_one
    assert bd.slope(b) == cert.q_invariant


def test_mh_exponent_is_floor_at_least_dyadic_level():
    _, cert = gallery.mh_construct(3, Fraction(1, 100))
    for i, (c, t) in enumerate(zip(cert.exponents, cert.dyadic_levels), start=1):
        if i == 1:
            continue
        # c = floor(2^t log_p sqrt i) / 2^t, checked in integers: p^(2k) <= i^(2^t) < p^(2k+2)
        k = c * 2**t
        assert k.denominator == 1
        assert cert.p ** (2 * int(k)) <= i ** (2**t) < cert.p ** (2 * int(k) + 2)


def test_mh_q_invariant_bounds():
    for n in range(2, 5):
        _, cert = gallery.mh_construct(n, Fraction(1, 100))
        lower = ExactPosReal.from_rational(Fraction(99, 100)) * ExactPosReal.from_rational(math.factorial(n)) ** Fraction(1, 2 * n)
        assert compare(cert.q_invariant, lower).order is Order.GREATER


def test_mh_guards():
    with pytest.raises(InvalidBundle):
        gallery.mh_construct(1, Fraction(1, 100))
    with pytest.raises(InvalidBundle):
        gallery.mh_construct(3, Fraction(1, 2))
    with pytest.raises(CapExceeded):
        gallery.mh_construct(7, Fraction(1, 100))


def test_mh_sample_check_small_box():
    b, cert = gallery.mh_construct(3, Fraction(1, 100))
    rep = gallery.mh_sample_check(b, cert, 2, 2)
    assert rep.ok
    assert rep.min_height.is_one and rep.min_witness == (1, 0, 0)


def test_mh_box_respects_cap():
    for n in range(2, 7):
        r, d = gallery.mh_box(n)
        values = {Fraction(a, k) for a in range(-r, r + 1) for k in range(1, d + 1)}
        assert len(values) ** n <= gallery.MH_BOX_CAP


def test_eq_precondition():
    assert gallery.eq_precondition(Fraction(1, 4))
    # 5^(2/5) < 2 because 5^2 = 25 < 32 = 2^5
    assert not gallery.eq_precondition(Fraction(1, 5))
    with pytest.raises(InvalidBundle):
        gallery.counterexample_Eq(Fraction(1, 5))


def test_an_ambient():
    assert gallery.an_ambient((1, 0, 0)) == (1, 0, 0, -1)
    assert gallery.an_ambient((1, -1, 0)) == (1, -1, 0, 0)


@given(st.integers(1, 12))
@settings(max_examples=12, deadline=None)
def test_an_slope(n):
    assert bd.slope(gallery.root_lattice_An(n)) == ExactPosReal.from_rational(n + 1) ** Fraction(-1, 2 * n)


def test_metadata():
    b = gallery.counterexample_Eq(Fraction(1, 4))
    meta = gallery.expected_metadata("eq", b, q=Fraction(1, 4))
    assert meta["expected"]["slope"] == {"e": "0", "logs": {"5": "-1/8"}}
    b, cert = gallery.mh_construct(2, Fraction(1, 100))
    meta = gallery.expected_metadata("mh", b, certificate=cert)
    assert meta["certificate"]["p"] == 11
