from fractions import Fraction

import sympy
from hypothesis import given, settings, strategies as st

from adelic import linalg as la

entries = st.fractions(min_value=-4, max_value=4, max_denominator=3)


def square(n):
    return st.lists(st.lists(entries, min_size=n, max_size=n), min_size=n, max_size=n).map(la.mat)


def to_sympy(a):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in a])


@given(st.integers(1, 4).flatmap(square))
@settings(max_examples=80, deadline=None)
def test_det_rank_inverse_match_sympy(a):
    s = to_sympy(a)
    assert la.det(a) == Fraction(str(s.det()))
    assert la.rank(a) == s.rank()
    if s.det() != 0:
        inv = la.inverse(a)
        assert la.matmul(a, inv) == la.identity(len(a))


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(square(n), square(n))), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_compound_is_multiplicative(ab, l):
    a, b = ab
    if l > len(a):
        return
    assert la.compound(la.matmul(a, b), l) == la.matmul(la.compound(a, l), la.compound(b, l))


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(square(n), square(n))), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_sym_power_matrix_is_multiplicative(ab, l):
    a, b = ab
    assert la.sym_power_matrix(la.matmul(a, b), l) == la.matmul(la.sym_power_matrix(a, l), la.sym_power_matrix(b, l))


def test_kron_mixed_product():
    a = la.mat([[1, 2], [3, 4]])
    b = la.mat([[0, 1], [1, 1]])
    c = la.mat([[2, 0], [1, 1]])
    d = la.mat([[1, -1], [0, 3]])
    assert la.matmul(la.kron(a, b), la.kron(c, d)) == la.kron(la.matmul(a, c), la.matmul(b, d))


def test_ldl_reconstructs():
    g = la.mat([[4, 2, 1], [2, 3, 0], [1, 0, 2]])
    u, d = la.ldl(g)
    assert la.matmul(la.matmul(la.transpose(u), la.diag(d)), u) == g
    assert la.leading_minors_positive(g)
    assert not la.leading_minors_positive(la.mat([[1, 2], [2, 1]]))


def test_permanent_against_brute_force():
    a = la.mat([[1, 2, 0], [Fraction(1, 2), 1, 3], [2, -1, 1]])
    assert la.permanent(a) == la.brute_permanent(a)


def test_sym_gram_routes_agree():
    g = la.mat([[2, 1, 0], [1, 2, 1], [0, 1, 3]])
    for l in (1, 2, 3):
        assert la.sym_power_gram(g, l) == la.sym_power_gram_permanent(g, l)


def test_sym_gram_of_identity():
    assert la.sym_power_gram(la.identity(2), 3) == la.diag([1, Fraction(1, 3), Fraction(1, 3), 1])


def test_monomials_descending():
    assert la.monomials(2, 2) == [(2, 0), (1, 1), (0, 2)]


def test_monomial_pattern():
    assert la.monomial_pattern(la.mat([[0, 2], [3, 0]])) == (1, 0)
    assert la.monomial_pattern(la.mat([[1, 1], [0, 1]])) is None
