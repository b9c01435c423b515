import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from adelic import multinomial as mn
from adelic.errors import CapExceeded


def oracle_p(n: int, l: int) -> int:
    """lcm of l!/i! over all i in N^n with |i| = l, by plain product enumeration."""
    out = 1
    for i in itertools.product(range(l + 1), repeat=n):
        if sum(i) == l:
            out = math.lcm(out, math.factorial(l) // math.prod(math.factorial(k) for k in i))
    return out


def test_lcm_upto_known_values():
    assert mn.lcm_upto(5) == 60
    assert mn.lcm_upto(10) == 2520
    assert mn.lcm_upto(Fraction(7, 2)) == 6
    with pytest.raises(ValueError):
        mn.lcm_upto(0)


def test_lcm_upto_matches_math_lcm():
    for m in range(1, 80):
        assert mn.lcm_upto(m) == math.lcm(*range(1, m + 1))


def test_compositions_order_and_count():
    comps = list(mn.compositions(2, 3))
    assert comps == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]
    assert comps == sorted(comps, reverse=True)
    assert mn.composition_count(7, 4) == len(list(mn.compositions(7, 4)))


def test_legendre_against_factorial():
    for m in range(0, 60):
        for p in (2, 3, 5, 7):
            f, v = math.factorial(m), 0
            while f % p == 0:
                f //= p
                v += 1
            assert mn.legendre(m, p) == v


def test_p_small_values():
    assert mn.p_bruteforce(2, 4) == 12
    assert mn.p_closed_form(2, 4) == 12
    assert mn.p_bruteforce(3, 2) == 2
    assert mn.p_closed_form(1, 100) == 1


def test_p_matches_product_oracle():
    for n in range(1, 5):
        for l in range(1, 9):
            assert mn.p_bruteforce(n, l) == oracle_p(n, l)
            assert mn.p_closed_form(n, l) == oracle_p(n, l)


def test_bruteforce_valuations_reassemble():
    res = mn.p_bruteforce(3, 6, valuations=True)
    assert res.reassembled() == res.value == oracle_p(3, 6)
    for p, i in res.argmax.items():
        coeff = mn.multinomial(6, i)
        v = 0
        while coeff % p == 0:
            coeff //= p
            v += 1
        assert v == res.max_valuation[p]


def test_bruteforce_cap():
    with pytest.raises(CapExceeded):
        mn.p_bruteforce(6, 30, cap=1000)


def test_williams_case_small():
    for l in range(1, 60):
        assert mn.p_value(2, l) * (l + 1) == mn.lcm_upto(l + 1)


def test_chain_known_values():
    assert mn.chain_qrs(2, 2).q == 6
    assert mn.chain_qrs(2, 4).q == 60
    assert mn.chain_qrs(3, 2).q == 24
    assert mn.chain_qrs(3, 2).equal


def test_chain_cap():
    with pytest.raises(CapExceeded):
        mn.chain_qrs(5, 15, cap=10)


def test_lemma_divisibilities():
    for n in range(2, 5):
        for l in range(2, 10):
            chk = mn.lemma_divisibilities(n, l)
            assert chk.monotone_quotient * mn.q_value(n, l - 1) == mn.q_value(n, l)


def test_bounds_hold_on_a_grid():
    for n in range(1, 6):
        for l in range(1, 15):
            p = mn.p_value(n, l)
            assert n**l <= p * math.comb(l + n - 1, n - 1)
            assert p * p <= n ** (3 * l)


def test_psi_bound_no_violations():
    assert mn.psi_bound_check(2000) == []


def test_factor_string():
    assert mn.factor_string(2) == "2^1"
    assert mn.factor_string(12) == "2^2 * 3^1"
    assert mn.factor_string(1) == "1"


@given(st.integers(1, 4), st.integers(1, 10))
@settings(max_examples=40, deadline=None)
def test_identity_property(n, l):
    assert mn.p_bruteforce(n, l) == mn.p_closed_form(n, l)


@given(st.integers(1, 4), st.integers(1, 10))
@settings(max_examples=40, deadline=None)
def test_every_multinomial_divides_p(n, l):
    p = mn.p_value(n, l)
    for i in mn.compositions(l, n):
        assert p % mn.multinomial(l, i) == 0
