import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from adelic import bundles as bd
from adelic import linalg as la
from adelic.errors import CapExceeded, InvalidBundle
from adelic.gallery import counterexample_Eq, root_lattice_An, standard
from adelic.scalars import ExactPosReal, Order, compare, valuation

seeds = st.integers(0, 10**6)
SQRT2 = ExactPosReal.from_rational(2).sqrt()


def oracle_log_height(b: bd.Bundle, x) -> float:
    """log H(x) straight from the definition, for bundles without right shifts (mpmath floats)."""
    x = [Fraction(c) for c in x]
    with mpmath.workprec(200):
        g = b.arch_gram
        q = sum(x[i] * x[j] * g[i][j] for i in range(b.dim) for j in range(b.dim))
        out = mpmath.log(mpmath.mpf(q.numerator) / q.denominator) / 2
        primes = {t.p for t in b.twists}
        for xi in x:
            if xi:
                primes |= {p for p in sympy_primes(xi)}
        for p in primes:
            used = Fraction(0)
            for t in (t for t in b.twists if t.p == p):
                y = la.matvec(t.m, x)
                local = max(-t.d_left[i] - valuation(y[i], p) for i in range(b.dim) if y[i])
                out += t.weight * local * mpmath.log(p)
                used += t.weight
            rest = 1 - used
            if rest:
                out += rest * max(-valuation(c, p) for c in x if c) * mpmath.log(p)
        return float(out)


def sympy_primes(q: Fraction):
    import sympy

    return set(sympy.primefactors(q.numerator)) | set(sympy.primefactors(q.denominator))


def random_case(seed, *, split=False, right_shifts=True, dims=(1, 3)):
    rng = random.Random(seed)
    b = bd.random_bundle(rng, rng.randint(*dims), split=split, right_shifts=right_shifts)
    return rng, b


# --- construction and JSON ---------------------------------------------------------------

def test_invalid_bundles_rejected():
    with pytest.raises(InvalidBundle):
        bd.make_bundle(2, [[1, 2], [2, 1]])
    with pytest.raises(InvalidBundle):
        bd.make_bundle(2, [[1, 0], [1, 1]])
    with pytest.raises(InvalidBundle):
        bd.make_bundle(1, None, [{"p": 4, "weight": "1", "d_left": ["0"], "m": [["1"]]}])
    with pytest.raises(InvalidBundle):
        bd.make_bundle(1, None, [{"p": 3, "weight": "2/3", "d_left": ["0"], "m": [["1"]]}] * 2)
    with pytest.raises(InvalidBundle):
        bd.loads("{not json")


def test_json_layout_of_eq():
    doc = bd.bundle_to_json(counterexample_Eq("1/4"))
    assert doc["dim"] == 2 and "arch_gram" not in doc
    assert doc["twists"][0]["d_left"] == ["0", "-1/4"]
    assert "d_right" not in doc["twists"][0]


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_json_round_trip(seed):
    _, b = random_case(seed)
    assert bd.loads(bd.dumps(b)) == b


# --- heights ---------------------------------------------------------------------------------

def test_eq_heights():
    b = counterexample_Eq(Fraction(1, 4))
    five = ExactPosReal.prime_power(5, Fraction(1, 4))
    assert bd.height(b, [1, 0]).value == five
    assert bd.height(b, [0, 1]).value == five
    assert bd.height(b, [1, 1]).value == SQRT2 * ExactPosReal.prime_power(5, Fraction(1, 8))
    t = bd.tensor(b, b)
    assert bd.height(t, [1, 0, 0, -1]).value == SQRT2 * five


def test_standard_height_is_euclidean_over_primitive():
    b = standard(3)
    assert bd.height(b, [2, 4, 6]).value == ExactPosReal.from_rational(14).sqrt()
    assert bd.height(b, [Fraction(1, 2), 1, 0]).value == ExactPosReal.from_rational(5).sqrt()


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        bd.height(standard(2), [0, 0])


@given(seeds)
@settings(max_examples=80, deadline=None)
def test_height_matches_definition(seed):
    rng, b = random_case(seed, right_shifts=False)
    x = bd.random_vector(rng, b.dim)
    h = bd.height(b, x)
    assert h.is_exact
    assert math.isclose(h.value.log_float(), oracle_log_height(b, x), rel_tol=1e-9, abs_tol=1e-9)


@given(seeds)
@settings(max_examples=80, deadline=None)
def test_height_interval_is_ordered(seed):
    rng, b = random_case(seed)
    x = bd.random_vector(rng, b.dim)
    h = bd.height(b, x)
    assert compare(h.lower, h.upper).order in (Order.LESS, Order.EQUAL)


@given(seeds, st.fractions(min_value=-50, max_value=50, max_denominator=50).filter(bool))
@settings(max_examples=80, deadline=None)
def test_product_formula(seed, c):
    rng, b = random_case(seed)
    x = bd.random_vector(rng, b.dim)
    h1, h2 = bd.height(b, x), bd.height(b, [c * xi for xi in x])
    assert h1 == h2


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_evaluator_matches_height(seed):
    rng, b = random_case(seed)
    ev = bd.HeightEvaluator(b)
    for _ in range(5):
        y = bd.primitive_vector(bd.random_vector(rng, b.dim))
        assert ev(y) == bd.height(b, y)


@given(seeds)
@settings(max_examples=50, deadline=None)
def test_tensor_height_of_pure_tensors_multiplies(seed):
    rng = random.Random(seed)
    a = bd.random_bundle(rng, rng.randint(1, 2), right_shifts=False)
    b = bd.random_bundle(rng, rng.randint(1, 2), right_shifts=False)
    x, y = bd.random_vector(rng, a.dim), bd.random_vector(rng, b.dim)
    xy = [xi * yj for xi in x for yj in y]
    assert bd.height(bd.tensor(a, b), xy).value == bd.height(a, x).value * bd.height(b, y).value


# --- slopes ------------------------------------------------------------------------------------

def test_slope_examples():
    assert bd.slope(standard(4)).is_one
    assert bd.slope(root_lattice_An(3)) == ExactPosReal.from_rational(4) ** Fraction(-1, 6)
    assert bd.slope(counterexample_Eq("1/4")) == ExactPosReal.prime_power(5, Fraction(-1, 8))


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_slope_identities(seed):
    rng = random.Random(seed)
    a = bd.random_bundle(rng, rng.randint(1, 3))
    b = bd.random_bundle(rng, rng.randint(1, 3))
    sa, sb = bd.slope(a), bd.slope(b)
    assert bd.slope(bd.dual(a)) == sa.inverse()
    assert bd.slope(bd.tensor(a, b)) == sa * sb
    assert bd.slope(bd.direct_sum(a, b)) ** (a.dim + b.dim) == sa**a.dim * sb**b.dim
    l = rng.randint(1, a.dim)
    assert bd.slope(bd.ext_power(a, l)) == sa**l
    # the normalized symmetric Gram shifts the slope by that of S^2(standard(n))
    assert bd.slope(bd.sym_power(a, 2)) == sa**2 * bd.slope(bd.sym_power(standard(a.dim), 2))


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_dual_of_dual(seed):
    _, b = random_case(seed)
    assert bd.slope(bd.dual(bd.dual(b))) == bd.slope(b)
    assert bd.dual(bd.dual(b)).arch_gram == b.arch_gram


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_full_subspace_slope_is_slope(seed):
    _, b = random_case(seed)
    full = [bd.unit_vector(b.dim, i) for i in range(b.dim)]
    assert bd.subspace_slope(b, full) == bd.slope(b)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_line_subspace_slope_is_inverse_height(seed):
    rng, b = random_case(seed, right_shifts=False)
    x = bd.random_vector(rng, b.dim)
    assert bd.subspace_slope(b, [x]) == bd.height(b, x).value.inverse()


def test_sym_power_gram_and_max_slope():
    s = bd.sym_power(standard(2), 3)
    assert s.arch_gram == la.diag([1, Fraction(1, 3), Fraction(1, 3), 1])
    ms = bd.max_slope(s)
    assert ms.kind == "Exact" and ms.value == ExactPosReal.from_rational(3).sqrt()


def test_dimension_cap():
    with pytest.raises(CapExceeded):
        bd.sym_power(standard(12), 12, cap=1000)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_max_slope_bounds_slope(seed):
    _, b = random_case(seed, split=True)
    exact = bd.max_slope(b)
    assert compare(exact.value, bd.slope(b)).order in (Order.GREATER, Order.EQUAL)
    search = bd.max_slope(b, "search")
    assert search.kind == "LowerBound"
    assert compare(search.value, exact.value).order in (Order.LESS, Order.EQUAL)


# --- minima --------------------------------------------------------------------------------------

def test_min_search_examples():
    r = bd.min_search(standard(3), 2)
    assert r.height.value.is_one and r.witness == (1, 0, 0)
    r = bd.min_search(root_lattice_An(3), 2)
    assert r.height.value == SQRT2 and r.witness == (1, 0, 0)
    r = bd.min_search(counterexample_Eq("1/4"), 3, 4)
    assert r.height.value == ExactPosReal.prime_power(5, Fraction(1, 4)) and r.witness == (1, 0)


def test_min_search_cap():
    with pytest.raises(CapExceeded):
        bd.min_search(counterexample_Eq("1/4"), 3, 4, cap=10)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_fincke_pohst_agrees_with_box_search(seed):
    rng = random.Random(seed)
    b = bd.random_bundle(rng, rng.randint(1, 3), max_twists=0)
    # a weight-1 identity twist at 2 leaves every height unchanged but forces the box search
    forced = bd.make_bundle(b.dim, b.arch_gram, [bd.LocalTwist.identity(2, Fraction(1), b.dim)])
    fp, box = bd.min_search(b, 2), bd.min_search(forced, 2)
    assert fp.method == "fincke-pohst" and box.method == "box"
    assert fp.height == box.height
    assert fp.witness == box.witness


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_split_minimum_meets_lower_bound(seed):
    _, b = random_case(seed, split=True, dims=(1, 2))
    lower = bd.lambda_lower_bound(b)
    found = bd.min_search(b, 2, 2)
    assert compare(lower, found.height.upper).order in (Order.LESS, Order.EQUAL)


def test_split_detect():
    assert bd.split_detect(standard(3)).is_split
    assert not bd.split_detect(root_lattice_An(2)).is_split
    assert not bd.split_detect(counterexample_Eq("1/4")).is_split
    with pytest.raises(ValueError):
        bd.max_slope(root_lattice_An(2), "exact-split")


def test_wedge_witness_height():
    w = bd.ext_power(root_lattice_An(3), 2)
    assert bd.height(w, bd.unit_vector(w.dim, 0)).value == ExactPosReal.from_rational(3).sqrt()
