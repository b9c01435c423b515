"""Named example bundles with their expected exact values.

* ``standard(n)``: Q^n with the euclidean and sup norms.
* ``root_lattice_An(n)``: the hyperplane x_1 + ... + x_{n+1} = 0 in the basis
  e_i - e_{n+1}; Gram I + ones, no finite twist.
* ``counterexample_Eq(q)``: the rank-2 bundle twisted at the two places over 5
  by A_eps = diag(1, 5^-q) [[1, 0], [1, eps]], eps = +-1; its minimum does not
  multiply under tensor square.
* ``mh_construct(n, eps)``: the explicit Minkowski-Hlawka bundle, a single twist
  at a large prime p by diag(p^c) M with M(i, j) = (i + j)!!.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sympy import nextprime

from . import linalg as la
from .bundles import (
    Bundle,
    LocalTwist,
    HeightEvaluator,
    _height,
    make_bundle,
    primitive_vector,
    slope,
)
from .errors import CapExceeded, InvalidBundle
from .scalars import DEFAULT_POLICY, ExactPosReal, Order, PrecisionPolicy, compare, rat

MH_MINOR_CAP = 6
MH_T_CAP = 64
# Raw box points (|values|^n) allowed in mh_sample_check before the box shrinks.
MH_BOX_CAP = 150_000
MH_BOXES = ((3, 4), (3, 3), (2, 3), (3, 2), (2, 2), (1, 2), (2, 1), (1, 1))


def standard(n: int) -> Bundle:
    if n < 1:
        raise InvalidBundle("n must be >= 1")
    return make_bundle(n)


def root_lattice_An(n: int) -> Bundle:
    if n < 1:
        raise InvalidBundle("n must be >= 1")
    return make_bundle(n, [[2 if i == j else 1 for j in range(n)] for i in range(n)])


def an_ambient(x: Sequence) -> tuple:
    """Coordinates in Q^{n+1} of sum x_i (e_i - e_{n+1})."""
    x = tuple(x)
    return x + (-sum(x),)


def eq_precondition(q: Fraction) -> bool:
    """5^{2q} > 2, decided exactly."""
    return compare(ExactPosReal.prime_power(5, 2 * q), ExactPosReal.from_rational(2)).order is Order.GREATER


def counterexample_Eq(q) -> Bundle:
    q = rat(q)
    if q <= 0 or not eq_precondition(q):
        raise InvalidBundle(f"E_q needs q > 0 and 5^(2q) > 2; q = {q} fails")
    twists = [
        LocalTwist(5, Fraction(1, 2), (Fraction(0), -q), la.mat([[1, 0], [1, eps]]), (Fraction(0), Fraction(0)))
        for eps in (1, -1)
    ]
    return make_bundle(2, None, twists)


# --- Minkowski-Hlawka ----------------------------------------------------------

def double_factorial(m: int) -> int:
    """m!! = m (m-2) (m-4) ... ending at 1 or 2; 0!! = 1."""
    if m < 0:
        raise ValueError("double factorial of a negative integer")
    return math.prod(range(m, 0, -2))


def mh_matrix(n: int) -> la.Mat:
    return la.mat([[double_factorial(i + j) for j in range(1, n + 1)] for i in range(1, n + 1)])


def all_minors(m: la.Mat):
    n = len(m)
    for k in range(1, n + 1):
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                yield rows, cols, la.det(la.submatrix(m, rows, cols))


@dataclass(frozen=True)
class MHCertificate:
    n: int
    eps: Fraction
    matrix: la.Mat
    p: int
    exponents: tuple[Fraction, ...]  # a_i = p^{c_i}, c_1 = 0
    dyadic_levels: tuple[int, ...]  # t used for each c_i (0 for c_1)
    max_minor: int
    minor_count: int

    @property
    def q_invariant(self) -> ExactPosReal:
        return ExactPosReal.prime_power(self.p, sum(self.exponents) / self.n)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "eps": str(self.eps),
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "p": self.p,
            "exponents": [str(c) for c in self.exponents],
            "dyadic_levels": list(self.dyadic_levels),
            "max_minor": self.max_minor,
            "minor_count": self.minor_count,
            "q_invariant": self.q_invariant.to_json(),
        }


def mh_eps_admissible(n: int, eps: Fraction) -> bool:
    """0 < eps < 1 - sqrt(1 - 1/n), i.e. (1 - eps)^2 > 1 - 1/n with eps < 1."""
    return 0 < eps < 1 and (1 - eps) ** 2 > 1 - Fraction(1, n)


def _dyadic_exponent(p: int, i: int, eps: Fraction, policy: PrecisionPolicy) -> tuple[Fraction, int]:
    """c = floor(2^t log_p sqrt(i)) / 2^t for the least t >= 1 with sqrt(i)(1 - eps) < p^c <= sqrt(i)."""
    sqrt_i = ExactPosReal.from_rational(i).sqrt()
    target_lo = sqrt_i * ExactPosReal.from_rational(1 - eps)
    for t in range(1, MH_T_CAP + 1):
        scale = 2**t
        # largest k with p^{2k} <= i^{2^t}; float guess then exact correction
        k = math.floor(scale * math.log(i) / (2 * math.log(p)))
        while p ** (2 * (k + 1)) <= i**scale:
            k += 1
        while p ** (2 * k) > i**scale:
            k -= 1
        c = Fraction(k, scale)
        if compare(ExactPosReal.prime_power(p, c), target_lo, policy).order is Order.GREATER:
            return c, t
    raise CapExceeded(f"no dyadic exponent with t <= {MH_T_CAP} for i = {i}")


def mh_construct(n: int, eps, *, policy: PrecisionPolicy = DEFAULT_POLICY) -> tuple[Bundle, MHCertificate]:
    eps = rat(eps)
    if n < 2:
        raise InvalidBundle("the construction needs n >= 2")
    if n > MH_MINOR_CAP:
        raise CapExceeded(f"exhaustive minor check is capped at n <= {MH_MINOR_CAP}")
    if not mh_eps_admissible(n, eps):
        raise InvalidBundle(f"eps = {eps} is not in (0, 1 - sqrt(1 - 1/{n}))")
    m = mh_matrix(n)
    biggest = 0
    count = 0
    for rows, cols, d in all_minors(m):
        if d == 0:
            raise AssertionError(f"vanishing minor rows={rows} cols={cols}")
        biggest = max(biggest, abs(int(d)))
        count += 1
    p = int(nextprime(biggest))
    exps = [Fraction(0)]
    levels = [0]
    for i in range(2, n + 1):
        c, t = _dyadic_exponent(p, i, eps, policy)
        exps.append(c)
        levels.append(t)
    twist = LocalTwist(p, Fraction(1), tuple(exps), m, (Fraction(0),) * n)
    cert = MHCertificate(n, eps, m, p, tuple(exps), tuple(levels), biggest, count)
    return make_bundle(n, None, [twist]), cert


def mh_window_ok(cert: MHCertificate, policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
    """sqrt(i)(1 - eps) < p^{c_i} <= sqrt(i) for every i, exactly."""
    for i, c in enumerate(cert.exponents, start=1):
        a = ExactPosReal.prime_power(cert.p, c)
        s = ExactPosReal.from_rational(i).sqrt()
        if compare(a, s, policy).order is Order.GREATER:
            return False
        if compare(a, s * ExactPosReal.from_rational(1 - cert.eps), policy).order is not Order.GREATER:
            return False
    return True


def mh_box(n: int, cap: int = MH_BOX_CAP) -> tuple[int, int]:
    """Largest (radius, denom_bound) from MH_BOXES whose raw point count fits the cap."""
    for radius, den in MH_BOXES:
        values = {Fraction(a, d) for a in range(-radius, radius + 1) for d in range(1, den + 1)}
        if len(values) ** n <= cap:
            return radius, den
    return 1, 1


@dataclass(frozen=True)
class MHSampleReport:
    radius: int
    denom_bound: int
    vectors: int
    e1_height: ExactPosReal
    min_height: ExactPosReal
    min_witness: tuple[int, ...]
    below_one: tuple[tuple[int, ...], ...]
    support_bound_failures: tuple[tuple[int, ...], ...]

    @property
    def ok(self) -> bool:
        return self.e1_height.is_one and not self.below_one and not self.support_bound_failures


def mh_sample_check(
    b: Bundle,
    cert: MHCertificate,
    radius: int | None = None,
    denom_bound: int | None = None,
    *,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> MHSampleReport:
    """Every box vector has height >= 1, and >= p^{-c_t} sqrt(t) when it has t nonzero entries."""
    if radius is None or denom_bound is None:
        radius, denom_bound = mh_box(b.dim)
    values = sorted({Fraction(a, d) for a in range(-radius, radius + 1) for d in range(1, denom_bound + 1)})
    e1 = tuple(1 if i == 0 else 0 for i in range(b.dim))
    e1_height = _height(b, la.vec(e1)).value
    one = ExactPosReal()
    seen: set[tuple[int, ...]] = set()
    best: tuple[ExactPosReal, tuple[int, ...]] | None = None
    evaluate = HeightEvaluator(b)
    below, support_fail = [], []
    for point in itertools.product(values, repeat=b.dim):
        if not any(point) or next(c for c in point if c) < 0:
            continue
        y = primitive_vector(point)
        if y in seen:
            continue
        seen.add(y)
        h = evaluate(y).value
        if compare(h, one, policy).order is Order.LESS:
            below.append(y)
        t = sum(1 for c in y if c)
        floor_t = ExactPosReal.prime_power(cert.p, -cert.exponents[t - 1]) * ExactPosReal.from_rational(t).sqrt()
        if compare(h, floor_t, policy).order is Order.LESS:
            support_fail.append(y)
        if best is None:
            best = (h, y)
        else:
            order = compare(h, best[0], policy).order
            if order is Order.LESS or (order is Order.EQUAL and tuple(-c for c in y) < tuple(-c for c in best[1])):
                best = (h, y)
    return MHSampleReport(
        radius, denom_bound, len(seen), e1_height, best[0], best[1], tuple(below), tuple(support_fail)
    )


# --- metadata for the CLI ----------------------------------------------------------

def expected_metadata(name: str, b: Bundle, **params) -> dict:
    meta: dict = {"name": name, "params": {k: str(v) for k, v in params.items()}}
    expected: dict = {"slope": slope(b).to_json()}
    if name == "standard":
        n = params["n"]
        expected["min_height"] = ExactPosReal().to_json()
        expected["height_all_ones"] = ExactPosReal.from_rational(n).sqrt().to_json()
        meta["provenance"] = "standard bundle: zero slope, minimum 1 at e_1, height of (1,...,1) is sqrt(n)"
    elif name == "an":
        n = params["n"]
        expected["min_height"] = ExactPosReal.from_rational(2).sqrt().to_json()
        meta["provenance"] = f"A_{n}: slope -(1/2n) log(n+1) from det(I + ones) = n+1; minimum sqrt(2) at a root"
    elif name == "eq":
        q = rat(params["q"])
        expected["height_e1"] = ExactPosReal.prime_power(5, q).to_json()
        expected["tensor_square_height_1_0_0_-1"] = (
            ExactPosReal.from_rational(2).sqrt() * ExactPosReal.prime_power(5, q)
        ).to_json()
        meta["provenance"] = "E_q: slope -(q/2) log 5; H(e_1) = 5^q; tensor square height of (1,0,0,-1) is sqrt(2)*5^q"
    elif name == "mh":
        cert = params["certificate"]
        meta["params"] = {"n": str(cert.n), "eps": str(cert.eps)}
        meta["certificate"] = cert.to_json()
        expected["height_e1"] = ExactPosReal().to_json()
        meta["provenance"] = "Minkowski-Hlawka bundle: H(e_1) = 1, q-invariant p^(sum c / n)"
    meta["expected"] = expected
    return meta
