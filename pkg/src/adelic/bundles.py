"""Twisted-standard adelic hermitian vector bundles over Q-bar, exactly.

A bundle of dimension n is a rational Gram matrix G for the (single, uniform)
archimedean class together with a list of local twists.  A twist at the
prime p with weight w stands for a group of finite places over p of total
normalized local degree w whose norm is x -> |D_L M D_R x|_sup, where M is an
invertible rational matrix and D_L = diag(pi^{d_left}), D_R = diag(pi^{d_right})
hold elements of prescribed (rational) valuation.  The weight left over at p
(1 - sum of twist weights) and every other prime carry the plain sup norm.

Heights, slopes and subspace slopes are returned as ExactPosReal: a slope
mu is represented by the value exp(mu), so its JSON form is the log form.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import linalg as la
from .errors import CapExceeded, Indeterminate, InvalidBundle
from .linalg import Mat, Vec
from .scalars import (
    DEFAULT_POLICY,
    ONE,
    ExactPosReal,
    Order,
    PrecisionPolicy,
    compare,
    factorint,
    primes_of,
    rat,
    valuation,
)

DIMENSION_CAP = 5000
SEARCH_CAP = 2_000_000
SUBSET_CAP = 4096
# Tolerance of the floating-point prefilter in searches; exact comparison decides
# everything within this distance of the current optimum.
_LOG_SLACK = 1e-9


def _is_prime(p: int) -> bool:
    return p >= 2 and factorint(p) == ((p, 1),)


@dataclass(frozen=True)
class LocalTwist:
    p: int
    weight: Fraction
    d_left: Vec
    m: Mat
    d_right: Vec

    @property
    def dim(self) -> int:
        return len(self.d_left)

    @classmethod
    def identity(cls, p: int, weight: Fraction, n: int) -> "LocalTwist":
        zeros = (Fraction(0),) * n
        return cls(p, weight, zeros, la.identity(n), zeros)

    def with_weight(self, weight: Fraction) -> "LocalTwist":
        return LocalTwist(self.p, weight, self.d_left, self.m, self.d_right)

    @property
    def det_exponent(self) -> Fraction:
        """Valuation of det(D_L M D_R)."""
        return sum(self.d_left) + sum(self.d_right) + valuation(la.det(self.m), self.p)


@dataclass(frozen=True)
class Bundle:
    dim: int
    arch_gram: Mat
    twists: tuple[LocalTwist, ...] = ()

    def twist_primes(self) -> list[int]:
        return sorted({t.p for t in self.twists})

    def weight_at(self, p: int) -> Fraction:
        return sum((t.weight for t in self.twists if t.p == p), Fraction(0))


def make_bundle(dim: int, arch_gram: Sequence[Sequence] | None = None, twists: Iterable = ()) -> Bundle:
    """Validated bundle; twists may be LocalTwist instances or dicts in the JSON layout."""
    if not isinstance(dim, int) or dim < 1:
        raise InvalidBundle(f"dimension must be a positive integer, got {dim!r}")
    gram = la.identity(dim) if arch_gram is None else la.mat(arch_gram)
    if len(gram) != dim or any(len(r) != dim for r in gram):
        raise InvalidBundle(f"arch_gram must be {dim}x{dim}")
    if not la.is_symmetric(gram):
        raise InvalidBundle("arch_gram is not symmetric")
    if not la.leading_minors_positive(gram):
        raise InvalidBundle("arch_gram is not positive definite")
    out = []
    for t in twists:
        if not isinstance(t, LocalTwist):
            t = _twist_from_mapping(t, dim)
        _validate_twist(t, dim)
        out.append(t)
    totals: dict[int, Fraction] = {}
    for t in out:
        totals[t.p] = totals.get(t.p, Fraction(0)) + t.weight
    for p, w in totals.items():
        if w > 1:
            raise InvalidBundle(f"twist weights at p={p} sum to {w} > 1")
    return Bundle(dim, gram, tuple(out))


def _twist_from_mapping(doc: Mapping, dim: int) -> LocalTwist:
    try:
        p = doc["p"]
        if isinstance(p, str):
            p = int(p)
        d_right = doc.get("d_right")
        return LocalTwist(
            p,
            rat(doc["weight"]),
            la.vec(rat(x) for x in doc["d_left"]),
            la.mat([[rat(x) for x in row] for row in doc["m"]]),
            la.vec(rat(x) for x in d_right) if d_right is not None else (Fraction(0),) * dim,
        )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidBundle(f"malformed twist {doc!r}: {exc}") from exc


def _validate_twist(t: LocalTwist, dim: int) -> None:
    if not isinstance(t.p, int) or not _is_prime(t.p):
        raise InvalidBundle(f"twist prime {t.p!r} is not prime")
    if not 0 < t.weight <= 1:
        raise InvalidBundle(f"twist weight {t.weight} outside (0, 1]")
    if len(t.d_left) != dim or len(t.d_right) != dim or len(t.m) != dim or any(len(r) != dim for r in t.m):
        raise InvalidBundle("twist dimensions do not match the bundle")
    if la.det(t.m) == 0:
        raise InvalidBundle(f"twist matrix at p={t.p} is singular")


# --- JSON -------------------------------------------------------------------

def bundle_to_json(b: Bundle) -> dict:
    doc: dict = {"dim": b.dim}
    if not la.is_identity(b.arch_gram):
        doc["arch_gram"] = [[str(x) for x in row] for row in b.arch_gram]
    twists = []
    for t in b.twists:
        td = {
            "p": t.p,
            "weight": str(t.weight),
            "d_left": [str(x) for x in t.d_left],
            "m": [[str(x) for x in row] for row in t.m],
        }
        if any(t.d_right):
            td["d_right"] = [str(x) for x in t.d_right]
        twists.append(td)
    doc["twists"] = twists
    return doc


def bundle_from_json(doc: Mapping) -> Bundle:
    if not isinstance(doc, Mapping) or "dim" not in doc:
        raise InvalidBundle("bundle JSON needs a 'dim' field")
    gram = doc.get("arch_gram")
    try:
        gram = None if gram is None else [[rat(x) for x in row] for row in gram]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidBundle(f"malformed arch_gram: {exc}") from exc
    return make_bundle(doc["dim"], gram, doc.get("twists", []))


def dumps(b: Bundle) -> str:
    return json.dumps(bundle_to_json(b), sort_keys=True)


def loads(text: str) -> Bundle:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidBundle(f"invalid JSON: {exc}") from exc
    return bundle_from_json(doc)


# --- heights ------------------------------------------------------------------

@dataclass(frozen=True)
class HeightResult:
    """Height of a vector: exact when lower == upper, otherwise a certified interval."""

    lower: ExactPosReal
    upper: ExactPosReal

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> ExactPosReal:
        if not self.is_exact:
            raise Indeterminate(f"height only known to lie in [{self.lower}, {self.upper}]")
        return self.lower

    def to_json(self) -> dict:
        if self.is_exact:
            return {"exact": self.lower.to_json()}
        return {"interval": {"lower": self.lower.to_json(), "upper": self.upper.to_json()}}

    def __str__(self) -> str:
        return str(self.lower) if self.is_exact else f"[{self.lower}, {self.upper}]"


def _min_valuation(xs: Iterable[Fraction], p: int) -> int:
    return min(valuation(x, p) for x in xs if x != 0)


def _grouped_valuation(row: Sequence[Fraction], x: Sequence[Fraction], shifts: Sequence[Fraction], p: int):
    """Valuation of sum_j row_j pi^{shift_j} x_j: (value, exact?) or None if it vanishes.

    Terms with the same shift are added as rationals; distinct shifts are
    unrelated elements, so the min rule applies and a tie leaves only a lower bound.
    """
    groups: dict[Fraction, Fraction] = {}
    for c, s, xj in zip(row, shifts, x):
        if c and xj:
            groups[s] = groups.get(s, Fraction(0)) + c * xj
    vals = sorted(s + valuation(v, p) for s, v in groups.items() if v != 0)
    if not vals:
        return None
    return vals[0], len(vals) == 1 or vals[1] > vals[0]


def local_norm_exponents(t: LocalTwist, x: Sequence[Fraction]) -> tuple[Fraction, Fraction]:
    """(lo, hi) with p^lo <= ||x||_t <= p^hi, where ||x||_t = |D_L M D_R x|_sup."""
    p = t.p
    exact_best: Fraction | None = None  # smallest certified row valuation
    bound_best: Fraction | None = None  # smallest row valuation lower bound
    for i, row in enumerate(t.m):
        got = _grouped_valuation(row, x, t.d_right, p)
        if got is None:
            continue
        v, exact = got
        v += t.d_left[i]
        if exact and (exact_best is None or v < exact_best):
            exact_best = v
        if bound_best is None or v < bound_best:
            bound_best = v
    hi = -bound_best
    if exact_best is not None and exact_best == bound_best:
        return hi, hi
    # ||x||_sup <= ||a^-1|| * ||a x|| with the ultrametric operator norm of a^-1
    minv = la.inverse(t.m)
    op = max(
        t.d_right[j] + t.d_left[i] - valuation(minv[j][i], p)
        for j in range(t.dim) for i in range(t.dim) if minv[j][i] != 0
    )
    lo = -(_min_valuation(x, p) + op)
    if exact_best is not None:
        lo = max(lo, -exact_best)
    return lo, hi


def height(b: Bundle, x: Sequence, *, policy: PrecisionPolicy = DEFAULT_POLICY) -> HeightResult:
    """H(x): product over all places of the weighted local norms of x."""
    x = la.vec(rat(c) for c in x)
    if len(x) != b.dim:
        raise InvalidBundle(f"vector has length {len(x)}, bundle has dimension {b.dim}")
    if not any(x):
        raise InvalidBundle("height of the zero vector is undefined")
    return _height(b, x)


def _height(b: Bundle, x: Vec, primitive: bool = False) -> HeightResult:
    arch = ExactPosReal.from_rational(la.quad_form(b.arch_gram, x)).sqrt()
    lo_logs: dict[int, Fraction] = {}
    hi_logs: dict[int, Fraction] = {}
    residual: dict[int, Fraction] = {}
    for t in b.twists:
        lo, hi = local_norm_exponents(t, x)
        lo_logs[t.p] = lo_logs.get(t.p, Fraction(0)) + t.weight * lo
        hi_logs[t.p] = hi_logs.get(t.p, Fraction(0)) + t.weight * hi
        residual[t.p] = residual.get(t.p, Fraction(1)) - t.weight
    if not primitive:
        primes: set[int] = set()
        for c in x:
            if c:
                primes |= primes_of(c)
        for p in primes:
            residual.setdefault(p, Fraction(1))
    for p, w in residual.items():
        if w and not primitive:
            e = -w * _min_valuation(x, p)
            lo_logs[p] = lo_logs.get(p, Fraction(0)) + e
            hi_logs[p] = hi_logs.get(p, Fraction(0)) + e
    lower = arch * ExactPosReal._make(Fraction(0), lo_logs)
    upper = arch * ExactPosReal._make(Fraction(0), hi_logs)
    return HeightResult(lower, upper)


def _int_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class HeightEvaluator:
    """Heights of primitive integer vectors with the bundle data pre-scaled to integers.

    Searches call this millions of times; it agrees with ``height`` (the sup
    norms at non-twist primes and the residual weights are trivial on
    primitive vectors) and is tested against it.
    """

    def __init__(self, b: Bundle):
        self.bundle = b
        g_den = math.lcm(*(x.denominator for row in b.arch_gram for x in row))
        self.g_den = g_den
        self.g_int = [[int(x * g_den) for x in row] for row in b.arch_gram]
        self.fast = []
        self.slow = []
        for t in b.twists:
            if len(set(t.d_right)) != 1:
                self.slow.append(t)
                continue
            rows = []
            for i, row in enumerate(t.m):
                den = math.lcm(*(x.denominator for x in row))
                rows.append(([int(x * den) for x in row], t.d_left[i] + t.d_right[0] - valuation(den, t.p)))
            self.fast.append((t.p, t.weight, rows))

    def __call__(self, y: Sequence[int]) -> HeightResult:
        q = 0
        for gi, yi in zip(self.g_int, y):
            if yi:
                q += yi * sum(g * yj for g, yj in zip(gi, y))
        arch = ExactPosReal.from_rational(Fraction(q, self.g_den)).sqrt()
        lo_logs: dict[int, Fraction] = {}
        hi_logs: dict[int, Fraction] = {}
        for p, w, rows in self.fast:
            best = None
            for coeffs, shift in rows:
                s = sum(c * yj for c, yj in zip(coeffs, y))
                if s:
                    v = shift + _int_valuation(abs(s), p)
                    if best is None or v < best:
                        best = v
            lo_logs[p] = lo_logs.get(p, Fraction(0)) - w * best
            hi_logs[p] = hi_logs.get(p, Fraction(0)) - w * best
        if self.slow:
            x = la.vec(y)
            for t in self.slow:
                lo, hi = local_norm_exponents(t, x)
                lo_logs[t.p] = lo_logs.get(t.p, Fraction(0)) + t.weight * lo
                hi_logs[t.p] = hi_logs.get(t.p, Fraction(0)) + t.weight * hi
        lower = arch * ExactPosReal._make(Fraction(0), lo_logs)
        if lo_logs == hi_logs:
            return HeightResult(lower, lower)
        return HeightResult(lower, arch * ExactPosReal._make(Fraction(0), hi_logs))


def primitive_vector(x: Sequence) -> tuple[int, ...]:
    """The primitive integer vector on the line of x, first nonzero entry positive."""
    x = [rat(c) for c in x]
    den = math.lcm(*(c.denominator for c in x))
    ints = [int(c * den) for c in x]
    g = math.gcd(*ints)
    if g == 0:
        raise InvalidBundle("zero vector")
    first = next(c for c in ints if c)
    g = g if first > 0 else -g
    return tuple(c // g for c in ints)


# --- slopes -------------------------------------------------------------------

def slope(b: Bundle) -> ExactPosReal:
    """exp(mu-hat(b)), i.e. the slope in log form."""
    det_g = la.det(b.arch_gram)
    logs: dict[int, Fraction] = {}
    for t in b.twists:
        logs[t.p] = logs.get(t.p, Fraction(0)) + t.weight * t.det_exponent
    covol = ExactPosReal._make(Fraction(0), logs) / ExactPosReal.from_rational(det_g).sqrt()
    return covol ** Fraction(1, b.dim)


# --- derived bundles --------------------------------------------------------------

def dual(b: Bundle) -> Bundle:
    twists = tuple(
        LocalTwist(t.p, t.weight, tuple(-d for d in t.d_left), la.inverse(la.transpose(t.m)), tuple(-d for d in t.d_right))
        for t in b.twists
    )
    return Bundle(b.dim, la.inverse(b.arch_gram), twists)


def _classes(b: Bundle, p: int) -> list[tuple[Fraction, LocalTwist | None]]:
    out: list[tuple[Fraction, LocalTwist | None]] = [(t.weight, t) for t in b.twists if t.p == p]
    rest = 1 - sum((w for w, _ in out), Fraction(0))
    if rest > 0:
        out.append((rest, None))
    return out


def _refine(a: Bundle, b: Bundle):
    """Common refinement of the place classes of a and b, prime by prime.

    Classes are laid out on [0, 1] in list order (residual last); each piece of
    the refinement pairs the classes of a and b covering it.
    """
    for p in sorted(set(a.twist_primes()) | set(b.twist_primes())):
        ca, cb = _classes(a, p), _classes(b, p)
        i = j = 0
        left_a, left_b = ca[0][0], cb[0][0]
        while i < len(ca) and j < len(cb):
            w = min(left_a, left_b)
            ta, tb = ca[i][1], cb[j][1]
            if ta is not None or tb is not None:
                yield p, w, ta, tb
            left_a -= w
            left_b -= w
            if left_a == 0:
                i += 1
                left_a = ca[i][0] if i < len(ca) else Fraction(0)
            if left_b == 0:
                j += 1
                left_b = cb[j][0] if j < len(cb) else Fraction(0)


def _parts(t: LocalTwist | None, p: int, n: int) -> tuple[Vec, Mat, Vec]:
    if t is None:
        t = LocalTwist.identity(p, Fraction(1), n)
    return t.d_left, t.m, t.d_right


def direct_sum(a: Bundle, b: Bundle) -> Bundle:
    twists = []
    for p, w, ta, tb in _refine(a, b):
        la_, ma, ra = _parts(ta, p, a.dim)
        lb, mb, rb = _parts(tb, p, b.dim)
        twists.append(LocalTwist(p, w, la_ + lb, la.block_diag(ma, mb), ra + rb))
    return Bundle(a.dim + b.dim, la.block_diag(a.arch_gram, b.arch_gram), tuple(twists))


def tensor(a: Bundle, b: Bundle) -> Bundle:
    """a (x) b on the basis e_i (x) f_j, index i*dim(b) + j."""
    twists = []
    for p, w, ta, tb in _refine(a, b):
        la_, ma, ra = _parts(ta, p, a.dim)
        lb, mb, rb = _parts(tb, p, b.dim)
        twists.append(LocalTwist(
            p, w,
            tuple(x + y for x in la_ for y in lb),
            la.kron(ma, mb),
            tuple(x + y for x in ra for y in rb),
        ))
    return Bundle(a.dim * b.dim, la.kron(a.arch_gram, b.arch_gram), tuple(twists))


def tensor_index(i: int, j: int, dim_b: int) -> int:
    return i * dim_b + j


def sym_power(b: Bundle, l: int, *, cap: int = DIMENSION_CAP) -> Bundle:
    """S^l(b) on the monomial basis e^alpha, alpha in descending lexicographic order."""
    if l < 1:
        raise ValueError("symmetric power needs l >= 1")
    dim = math.comb(l + b.dim - 1, b.dim - 1)
    if dim > cap:
        raise CapExceeded(f"S^{l} of a rank {b.dim} bundle has dimension {dim} > cap {cap}")
    basis = la.monomials(b.dim, l)

    def shifts(d: Vec) -> Vec:
        return tuple(sum((k * di for k, di in zip(alpha, d)), Fraction(0)) for alpha in basis)

    twists = tuple(
        LocalTwist(t.p, t.weight, shifts(t.d_left), la.sym_power_matrix(t.m, l), shifts(t.d_right))
        for t in b.twists
    )
    return Bundle(dim, la.sym_power_gram(b.arch_gram, l), twists)


def ext_power(b: Bundle, l: int, *, cap: int = DIMENSION_CAP) -> Bundle:
    """Lambda^l(b) on the basis e_S, S the l-subsets in lexicographic order."""
    if not 1 <= l <= b.dim:
        raise ValueError(f"exterior power needs 1 <= l <= {b.dim}")
    dim = math.comb(b.dim, l)
    if dim > cap:
        raise CapExceeded(f"Lambda^{l} of a rank {b.dim} bundle has dimension {dim} > cap {cap}")
    subsets = list(itertools.combinations(range(b.dim), l))

    def shifts(d: Vec) -> Vec:
        return tuple(sum((d[i] for i in s), Fraction(0)) for s in subsets)

    twists = tuple(
        LocalTwist(t.p, t.weight, shifts(t.d_left), la.compound(t.m, l), shifts(t.d_right))
        for t in b.twists
    )
    return Bundle(dim, la.compound(b.arch_gram, l), twists)


def standard(n: int) -> Bundle:
    return make_bundle(n)


# --- subspaces ------------------------------------------------------------------

def _content_valuation(a: Sequence[Sequence[Fraction]], shifts: Sequence[Fraction], p: int) -> Fraction:
    """min over maximal minors I of sum_{i in I} shifts_i + v_p(det a[I, :]).

    Full-pivot elimination over the valuation ring: the entry of least
    (shifted) valuation divides everything in its row and column, so clearing
    its column is unimodular and the content splits off one pivot at a time.
    """
    rows = [list(r) for r in a]
    sh = list(shifts)
    total = Fraction(0)
    ncols = len(rows[0]) if rows else 0
    cols = list(range(ncols))
    for _ in range(ncols):
        best = None
        for i, r in enumerate(rows):
            for c in cols:
                if r[c]:
                    v = sh[i] + valuation(r[c], p)
                    if best is None or v < best[0]:
                        best = (v, i, c)
        if best is None:
            raise InvalidBundle("basis is not independent")
        v, i, c = best
        total += v
        piv = rows[i]
        for k, r in enumerate(rows):
            if k != i and r[c]:
                f = r[c] / piv[c]
                rows[k] = [x - f * y for x, y in zip(r, piv)]
        del rows[i]
        del sh[i]
        cols.remove(c)
    return total


def _minor_content_grouped(t: LocalTwist, bmat: Mat) -> Fraction:
    """Content of Lambda^m(D_L M D_R) applied to b_1 ^ ... ^ b_m by Cauchy-Binet.

    Used when the right shifts differ: each maximal minor is a sum over column
    subsets J of det(M[I,J]) * prod pi^{d_right[J]} * det(B[J,:]); subsets with
    the same multiset of shifts share the element and are added exactly.
    """
    n, m = len(bmat), len(bmat[0])
    p = t.p
    j_minors = {}
    for J in itertools.combinations(range(n), m):
        d = la.det(la.submatrix(bmat, J, range(m)))
        if d:
            j_minors[J] = d
    exact_min: Fraction | None = None
    tie_min: Fraction | None = None
    for I in itertools.combinations(range(n), m):
        groups: dict[tuple[Fraction, ...], Fraction] = {}
        for J, dj in j_minors.items():
            c = la.det(la.submatrix(t.m, I, J))
            if c:
                key = tuple(sorted(t.d_right[j] for j in J))
                groups[key] = groups.get(key, Fraction(0)) + c * dj
        vals = sorted(sum(k) + valuation(v, p) for k, v in groups.items() if v)
        if not vals:
            continue
        v = vals[0] + sum(t.d_left[i] for i in I)
        if len(vals) == 1 or vals[1] > vals[0]:
            exact_min = v if exact_min is None else min(exact_min, v)
        else:
            tie_min = v if tie_min is None else min(tie_min, v)
    if exact_min is None or (tie_min is not None and tie_min < exact_min):
        raise Indeterminate(f"wedge valuation at p={p} depends on cancellation between unrelated elements")
    return exact_min


def _integral_basis(basis: Sequence[Sequence]) -> Mat:
    """Columns are the basis vectors, each scaled to a primitive integer vector."""
    cols = [primitive_vector(v) for v in basis]
    return la.transpose(la.mat(cols))


def wedge_height(b: Bundle, basis: Sequence[Sequence]) -> ExactPosReal:
    """H of b_1 ^ ... ^ b_m in Lambda^m(b), from minors (no compound matrix built)."""
    basis = [la.vec(rat(c) for c in v) for v in basis]
    m = len(basis)
    if m == 0 or any(len(v) != b.dim for v in basis):
        raise InvalidBundle("basis vectors must be nonempty and match the dimension")
    if la.rank(la.mat(basis)) < m:
        raise InvalidBundle("basis vectors are dependent")
    bmat = _integral_basis(basis)
    bt = la.transpose(bmat)
    arch = ExactPosReal.from_rational(la.det(la.matmul(la.matmul(bt, b.arch_gram), bmat))).sqrt()
    logs: dict[int, Fraction] = {}
    residual: dict[int, Fraction] = {}
    for t in b.twists:
        if len(set(t.d_right)) == 1:
            content = _content_valuation(la.matmul(t.m, bmat), t.d_left, t.p) + m * t.d_right[0]
        else:
            content = _minor_content_grouped(t, bmat)
        logs[t.p] = logs.get(t.p, Fraction(0)) - t.weight * content
        residual[t.p] = residual.get(t.p, Fraction(1)) - t.weight
    gram_int = la.det(la.matmul(bt, bmat))
    for p, _ in factorint(int(gram_int)):
        residual.setdefault(p, Fraction(1))
    zeros = (Fraction(0),) * b.dim
    for p, w in residual.items():
        if w:
            logs[p] = logs.get(p, Fraction(0)) - w * _content_valuation(bmat, zeros, p)
    return arch * ExactPosReal._make(Fraction(0), logs)


def subspace_slope(b: Bundle, basis: Sequence[Sequence]) -> ExactPosReal:
    """exp(mu-hat) of the span of ``basis`` with the induced metrics: H(b_1^...^b_m)^(-1/m)."""
    return wedge_height(b, basis) ** Fraction(-1, len(basis))


# --- maximal slope ----------------------------------------------------------------

@dataclass(frozen=True)
class SplitWitness:
    is_split: bool
    # for each twist, sigma with M[sigma[j]][j] != 0: coordinate line j goes to line sigma[j]
    permutations: tuple[tuple[int, ...], ...] = ()


def split_detect(b: Bundle) -> SplitWitness:
    if not la.is_diagonal(b.arch_gram):
        return SplitWitness(False)
    perms = []
    for t in b.twists:
        sigma = la.monomial_pattern(t.m)
        if sigma is None:
            return SplitWitness(False)
        perms.append(sigma)
    return SplitWitness(True, tuple(perms))


@dataclass(frozen=True)
class MaxSlope:
    value: ExactPosReal  # exp(mu-hat-max) or a lower bound for it
    kind: str  # "Exact" or "LowerBound"
    witness: tuple  # maximizing line index (split) or spanning basis (search)
    candidates: int = 0
    indeterminate: int = 0


def unit_vector(n: int, i: int) -> tuple[int, ...]:
    return tuple(1 if k == i else 0 for k in range(n))


def line_slopes(b: Bundle) -> list[ExactPosReal]:
    return [_height(b, la.vec(unit_vector(b.dim, i))).value.inverse() for i in range(b.dim)]


def max_slope(
    b: Bundle,
    mode: str = "exact-split",
    *,
    bases: Sequence[Sequence[Sequence]] = (),
    subset_size: int | None = None,
    radius: int = 1,
    cap: int = SUBSET_CAP,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> MaxSlope:
    """Maximal slope: exact for split bundles, a certified lower bound from a search otherwise."""
    if mode == "exact-split":
        if not split_detect(b).is_split:
            raise ValueError("exact-split mode needs a split bundle")
        slopes = line_slopes(b)
        best = 0
        for i in range(1, b.dim):
            if compare(slopes[i], slopes[best], policy).order is Order.GREATER:
                best = i
        return MaxSlope(slopes[best], "Exact", (best,), b.dim)
    if mode != "search":
        raise ValueError(f"unknown max_slope mode {mode!r}")
    best_val: ExactPosReal | None = None
    best_basis: tuple = ()
    count = skipped = 0
    for basis in search_family(b.dim, bases=bases, subset_size=subset_size, radius=radius, cap=cap):
        count += 1
        try:
            val = subspace_slope(b, basis)
        except Indeterminate:
            skipped += 1
            continue
        if best_val is None or compare(val, best_val, policy).order is Order.GREATER:
            best_val, best_basis = val, tuple(tuple(v) for v in basis)
    if best_val is None:
        raise Indeterminate("no candidate subspace had a certified slope")
    return MaxSlope(best_val, "LowerBound", best_basis, count, skipped)


def search_family(n: int, *, bases=(), subset_size: int | None = None, radius: int = 1, cap: int = SUBSET_CAP):
    """Candidate subspaces: the full space, coordinate subspaces, user bases, small lines."""
    seen = 0
    yield [unit_vector(n, i) for i in range(n)]
    top = n - 1 if subset_size is None else min(subset_size, n - 1)
    for k in range(1, top + 1):
        for s in itertools.combinations(range(n), k):
            seen += 1
            if seen > cap:
                return
            yield [unit_vector(n, i) for i in s]
    yield from ([list(v) for v in basis] for basis in bases)
    for x in small_primitive_vectors(n, radius):
        if sum(1 for c in x if c) < 2:
            continue  # coordinate lines already covered
        seen += 1
        if seen > cap:
            return
        yield [x]


def small_primitive_vectors(n: int, radius: int):
    """Primitive integer vectors in [-radius, radius]^n with first nonzero entry positive."""
    for x in itertools.product(range(-radius, radius + 1), repeat=n):
        if not any(x):
            continue
        first = next(c for c in x if c)
        if first > 0 and math.gcd(*x) == 1:
            yield x


# --- minimum search ---------------------------------------------------------------

@dataclass(frozen=True)
class MinSearchResult:
    height: HeightResult
    witness: tuple[int, ...]
    candidates: int
    method: str

    def to_json(self) -> dict:
        return {
            "height": self.height.to_json(),
            "witness": list(self.witness),
            "candidates": self.candidates,
            "method": self.method,
        }


def _tie_key(x: Sequence[int]) -> tuple[int, ...]:
    return tuple(-c for c in x)


def min_search(
    b: Bundle,
    radius: int,
    denom_bound: int = 1,
    *,
    cap: int = SEARCH_CAP,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> MinSearchResult:
    """Least height over rational vectors with coordinates a/d, |a| <= radius, 1 <= d <= denom_bound.

    An upper bound for the minimum over Q (and so over Q-bar).  Witnesses are
    primitive integer vectors with first nonzero entry positive; ties go to the
    one with the smallest key (-x_1, ..., -x_n), so e_1 wins over e_2.
    """
    if radius < 1 or denom_bound < 1:
        raise ValueError("radius and denom_bound must be >= 1")
    if not b.twists and denom_bound == 1:
        return _fincke_pohst(b, radius)
    values = sorted({Fraction(a, d) for a in range(-radius, radius + 1) for d in range(1, denom_bound + 1)})
    total = len(values) ** b.dim
    if total > cap:
        raise CapExceeded(f"{total} search points exceed the cap {cap}")
    seen: set[tuple[int, ...]] = set()
    best: tuple[HeightResult, tuple[int, ...], float] | None = None
    evaluate = HeightEvaluator(b)
    for point in itertools.product(values, repeat=b.dim):
        if not any(point):
            continue
        first = next(c for c in point if c)
        if first < 0:
            continue  # -x gives the same line
        y = primitive_vector(point)
        if y in seen:
            continue
        seen.add(y)
        h = evaluate(y)
        best = _better(best, h, y, policy)
    return MinSearchResult(best[0], best[1], len(seen), "box")


def _better(best, h: HeightResult, y: tuple[int, ...], policy: PrecisionPolicy):
    """Keep the candidate with the smaller certified upper bound (ties: _tie_key)."""
    lf = h.upper.log_float()
    if best is None:
        return h, y, lf
    if lf > best[2] + _LOG_SLACK:
        return best
    order = compare(h.upper, best[0].upper, policy).order
    if order is Order.LESS or (order is Order.EQUAL and _tie_key(y) < _tie_key(best[1])):
        return h, y, lf
    return best


def _fincke_pohst(b: Bundle, radius: int) -> MinSearchResult:
    """Exact enumeration of integer points of Q(x) <= C inside the box, C shrinking to the minimum.

    Without twists, H(x) = sqrt(Q(x)) for primitive integer x, and the smallest
    value of Q on nonzero box points is attained at primitive points only.
    """
    n = b.dim
    u, d = la.ldl(b.arch_gram)
    bound = min(b.arch_gram[i][i] for i in range(n))
    found: list[tuple[int, ...]] = []
    x = [0] * n
    visited = 0

    upper = [[(j, u[i][j]) for j in range(i + 1, n) if u[i][j]] for i in range(n)]

    def centre(i: int) -> Fraction:
        return -sum((c * x[j] for j, c in upper[i] if x[j]), Fraction(0))

    def recurse(i: int, partial: Fraction) -> None:
        nonlocal bound, found, visited
        c = centre(i)
        room = (bound - partial) / d[i]
        if room < 0:
            return
        r = math.sqrt(float(room)) + 1
        lo = max(-radius, math.floor(float(c) - r))
        hi = min(radius, math.ceil(float(c) + r))
        for xi in range(lo, hi + 1):
            t = d[i] * (xi - c) ** 2
            q = partial + t
            if q > bound:
                continue
            x[i] = xi
            visited += 1
            if i == 0:
                if any(x):
                    if q < bound:
                        bound, found = q, []
                    found.append(tuple(x))
            else:
                recurse(i - 1, q)
        x[i] = 0

    recurse(n - 1, Fraction(0))
    witnesses = {primitive_vector(v) for v in found}
    w = min(witnesses, key=_tie_key)
    value = ExactPosReal.from_rational(bound).sqrt()
    return MinSearchResult(HeightResult(value, value), w, visited, "fincke-pohst")


# --- lower bounds for the absolute minimum -------------------------------------------

def lambda_lower_bound(b: Bundle | None = None, via: str = "exact-split", factors: Sequence[Bundle] = ()) -> ExactPosReal:
    """Certified lower bound exp(-mu-hat-max) for the minimum over Q-bar.

    ``via="tensor-factorization"`` bounds the minimum of a tensor product of
    split factors by exp(-sum of their maximal slopes).
    """
    if via == "exact-split":
        if b is None:
            raise ValueError("exact-split route needs a bundle")
        return max_slope(b, "exact-split").value.inverse()
    if via == "tensor-factorization":
        if not factors:
            raise ValueError("tensor-factorization route needs the list of factors")
        out = ONE
        for f in factors:
            out = out * max_slope(f, "exact-split").value.inverse()
        return out
    raise ValueError(f"unknown route {via!r}")


# --- random instances ---------------------------------------------------------------

_SMALL_PRIMES = (2, 3, 5, 7)


def _random_rat(rng: random.Random, num: int = 3, den: int = 3) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def _random_invertible(rng: random.Random, n: int, monomial: bool = False) -> Mat:
    while True:
        if monomial:
            perm = list(range(n))
            rng.shuffle(perm)
            entries = [[Fraction(0)] * n for _ in range(n)]
            for j, i in enumerate(perm):
                entries[i][j] = Fraction(rng.choice([-3, -2, -1, 1, 2, 3, 5]), rng.choice([1, 1, 2, 3]))
            m = la.mat(entries)
        else:
            m = la.mat([[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
        if la.det(m) != 0:
            return m


def random_bundle(
    rng: random.Random,
    dim: int,
    *,
    split: bool = False,
    max_twists: int = 2,
    right_shifts: bool = True,
) -> Bundle:
    """A random valid bundle with small rational data (split: diagonal Gram, monomial twists)."""
    if split:
        gram = la.diag([Fraction(rng.randint(1, 6), rng.randint(1, 3)) for _ in range(dim)])
    else:
        a = la.mat([[rng.randint(-2, 2) for _ in range(dim)] for _ in range(dim)])
        gram = la.matmul(la.transpose(a), a)
        gram = tuple(tuple(g + (1 if i == j else 0) for j, g in enumerate(row)) for i, row in enumerate(gram))
    twists = []
    used: dict[int, Fraction] = {}
    for _ in range(rng.randint(0, max_twists)):
        p = rng.choice(_SMALL_PRIMES)
        room = 1 - used.get(p, Fraction(0))
        if room <= 0:
            continue
        w = min(room, Fraction(rng.randint(1, 4), 4))
        used[p] = used.get(p, Fraction(0)) + w
        d_left = tuple(_random_rat(rng, 2, 2) for _ in range(dim))
        d_right = tuple(_random_rat(rng, 1, 2) for _ in range(dim)) if right_shifts and rng.random() < 0.5 else (Fraction(0),) * dim
        twists.append(LocalTwist(p, w, d_left, _random_invertible(rng, dim, monomial=split), d_right))
    return make_bundle(dim, gram, twists)


def random_vector(rng: random.Random, dim: int, num: int = 6, den: int = 4) -> Vec:
    while True:
        x = tuple(Fraction(rng.randint(-num, num), rng.randint(1, den)) for _ in range(dim))
        if any(x):
            return x
