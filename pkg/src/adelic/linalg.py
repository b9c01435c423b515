"""Exact dense linear algebra over Q.

Matrices are tuples of row tuples of Fraction, vectors are tuples of
Fraction; everything is immutable so bundles can share them freely.
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Sequence

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]

ZERO = Fraction(0)
ONE_Q = Fraction(1)


def vec(xs: Iterable) -> Vec:
    return tuple(Fraction(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    out = tuple(vec(r) for r in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def identity(n: int) -> Mat:
    return tuple(tuple(ONE_Q if i == j else ZERO for j in range(n)) for i in range(n))


def diag(entries: Sequence) -> Mat:
    n = len(entries)
    return tuple(tuple(Fraction(entries[i]) if i == j else ZERO for j in range(n)) for i in range(n))


def is_identity(a: Mat) -> bool:
    return all(a[i][j] == (1 if i == j else 0) for i in range(len(a)) for j in range(len(a)))


def is_diagonal(a: Mat) -> bool:
    return all(a[i][j] == 0 for i in range(len(a)) for j in range(len(a)) if i != j)


def monomial_pattern(a: Mat) -> tuple[int, ...] | None:
    """For a monomial matrix return sigma with a[sigma[j]][j] != 0, else None."""
    n = len(a)
    sigma = []
    for j in range(n):
        rows = [i for i in range(n) if a[i][j] != 0]
        if len(rows) != 1:
            return None
        sigma.append(rows[0])
    return tuple(sigma) if len(set(sigma)) == n else None


def transpose(a: Mat) -> Mat:
    return tuple(zip(*a)) if a else a


def matmul(a: Mat, b: Mat) -> Mat:
    """Product accumulated over nonzero entries only (the bundles here are mostly sparse)."""
    ncols = len(b[0]) if b else 0
    b_nz = [[(j, y) for j, y in enumerate(row) if y] for row in b]
    out = []
    for row in a:
        acc = [ZERO] * ncols
        for k, x in enumerate(row):
            if x:
                for j, y in b_nz[k]:
                    acc[j] += x * y
        out.append(tuple(acc))
    return tuple(out)


def matvec(a: Mat, x: Sequence[Fraction]) -> Vec:
    return tuple(sum((c * xi for c, xi in zip(row, x)), ZERO) for row in a)


def quad_form(g: Mat, x: Sequence[Fraction]) -> Fraction:
    nz = [(i, xi) for i, xi in enumerate(x) if xi]
    return sum((xi * xj * g[i][j] for i, xi in nz for j, xj in nz), ZERO)


def _echelon(a: Mat) -> tuple[list[list[Fraction]], list[int], int]:
    """Row echelon form by Gaussian elimination; returns (rows, pivot columns, swap sign)."""
    rows = [list(r) for r in a]
    pivots: list[int] = []
    sign = 1
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
            sign = -sign
        for i in range(r + 1, len(rows)):
            if rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots, sign


def det(a: Mat) -> Fraction:
    n = len(a)
    if n == 0:
        return ONE_Q
    rows, pivots, sign = _echelon(a)
    if len(pivots) < n:
        return ZERO
    out = Fraction(sign)
    for i in range(n):
        out *= rows[i][i]
    return out


def rank(a: Mat) -> int:
    if not a:
        return 0
    return len(_echelon(a)[1])


def inverse(a: Mat) -> Mat:
    n = len(a)
    aug = [list(a[i]) + [ONE_Q if i == j else ZERO for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv_p = 1 / aug[c][c]
        aug[c] = [x * inv_p for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return tuple(tuple(row[n:]) for row in aug)


def kron(a: Mat, b: Mat) -> Mat:
    """Kronecker product; row/column index i*len(b)+j pairs index i of a with j of b."""
    return tuple(
        tuple(x * y for x in ra for y in rb)
        for ra in a for rb in b
    )


def block_diag(a: Mat, b: Mat) -> Mat:
    n, m = len(a), len(b)
    top = tuple(tuple(row) + (ZERO,) * m for row in a)
    bottom = tuple((ZERO,) * n + tuple(row) for row in b)
    return top + bottom


def submatrix(a: Mat, rows: Sequence[int], cols: Sequence[int]) -> Mat:
    return tuple(tuple(a[i][j] for j in cols) for i in rows)


def compound(a: Mat, l: int) -> Mat:
    """l-th compound matrix: all l x l minors, subsets in lexicographic order."""
    subsets = list(combinations(range(len(a)), l))
    if is_diagonal(a):
        return diag([math.prod(a[i][i] for i in s) for s in subsets])
    return tuple(tuple(det(submatrix(a, r, c)) for c in subsets) for r in subsets)


def leading_minors_positive(g: Mat) -> bool:
    """Sylvester's criterion via the pivots of an exact LDL^T factorization."""
    try:
        _, d = ldl(g)
    except ValueError:
        return False
    return all(x > 0 for x in d)


def ldl(g: Mat) -> tuple[Mat, Vec]:
    """G = U^T diag(d) U with U unit upper triangular (the Fincke-Pohst form).

    Raises ValueError on a zero pivot.  Then x^T G x = sum_i d_i (x_i + sum_{j>i} U_ij x_j)^2.
    """
    n = len(g)
    if is_diagonal(g):
        if any(g[i][i] == 0 for i in range(n)):
            raise ValueError("zero pivot: matrix is not definite")
        return identity(n), tuple(g[i][i] for i in range(n))
    q = [list(r) for r in g]
    for i in range(n):
        if q[i][i] == 0:
            raise ValueError("zero pivot: matrix is not definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    d = tuple(q[i][i] for i in range(n))
    u = tuple(tuple(ONE_Q if i == j else (q[i][j] if j > i else ZERO) for j in range(n)) for i in range(n))
    return u, d


def is_symmetric(g: Mat) -> bool:
    return all(g[i][j] == g[j][i] for i in range(len(g)) for j in range(i))


# --- symmetric powers -----------------------------------------------------

def monomials(n: int, l: int) -> list[tuple[int, ...]]:
    """Exponent vectors alpha with |alpha| = l, in descending lexicographic order."""
    from .multinomial import compositions

    return list(compositions(l, n))


def multi_factorial(alpha: Sequence[int]) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def _index_list(alpha: Sequence[int]) -> list[int]:
    return [i for i, a in enumerate(alpha) for _ in range(a)]


def permanent(a: Mat) -> Fraction:
    """Ryser's formula; exact."""
    n = len(a)
    if n == 0:
        return ONE_Q
    total = ZERO
    for mask in range(1, 1 << n):
        cols = [j for j in range(n) if mask >> j & 1]
        prod = ONE_Q
        for row in a:
            s = sum((row[j] for j in cols), ZERO)
            if s == 0:
                prod = ZERO
                break
            prod *= s
        if (n - len(cols)) % 2:
            total -= prod
        else:
            total += prod
    return total


def sym_power_matrix(a: Mat, l: int) -> Mat:
    """Matrix of S^l(a) on the monomial bases e^alpha (alpha in descending lex order).

    Column beta is the expansion of prod_j (a e_j)^{beta_j}.
    """
    n = len(a)
    basis = monomials(n, l)
    index = {alpha: k for k, alpha in enumerate(basis)}
    if is_diagonal(a):
        return diag([math.prod((a[i][i] ** k for i, k in enumerate(alpha)), start=ONE_Q) for alpha in basis])
    cols_a = [{i: a[i][j] for i in range(n) if a[i][j] != 0} for j in range(n)]
    columns = []
    for beta in basis:
        poly: dict[tuple[int, ...], Fraction] = {(0,) * n: ONE_Q}
        for j, k in enumerate(beta):
            for _ in range(k):
                nxt: dict[tuple[int, ...], Fraction] = {}
                for mono, c in poly.items():
                    for i, x in cols_a[j].items():
                        m2 = mono[:i] + (mono[i] + 1,) + mono[i + 1:]
                        nxt[m2] = nxt.get(m2, ZERO) + c * x
                poly = {m2: c for m2, c in nxt.items() if c != 0}
        col = [ZERO] * len(basis)
        for mono, c in poly.items():
            col[index[mono]] = c
        columns.append(col)
    return transpose(tuple(tuple(c) for c in columns))


def sym_power_gram(g: Mat, l: int) -> Mat:
    """Gram matrix of S^l with <x1...xl, y1...yl> = (1/l!) sum_sigma prod <x_i, y_sigma(i)>.

    Computed through G = U^T D U: the monomials in a D-orthogonal basis are
    orthogonal with squared norm prod d_i^{alpha_i} alpha!/l!.
    """
    n = len(g)
    basis = monomials(n, l)
    lf = math.factorial(l)
    u, d = ldl(g)
    weights = [
        math.prod((d[i] ** k for i, k in enumerate(alpha)), start=ONE_Q) * Fraction(multi_factorial(alpha), lf)
        for alpha in basis
    ]
    if is_identity(u):
        return diag(weights)
    s = sym_power_matrix(u, l)
    st = transpose(s)
    return tuple(
        tuple(sum((st[r][k] * weights[k] * s[k][c] for k in range(len(basis))), ZERO) for c in range(len(basis)))
        for r in range(len(basis))
    )


def sym_power_gram_permanent(g: Mat, l: int) -> Mat:
    """Same Gram matrix straight from the permanent formula (independent cross-check)."""
    basis = monomials(len(g), l)
    lf = math.factorial(l)
    idx = [_index_list(a) for a in basis]
    return tuple(
        tuple(permanent(submatrix(g, ia, ib)) / lf for ib in idx)
        for ia in idx
    )


def brute_permanent(a: Mat) -> Fraction:
    n = len(a)
    return sum((math.prod((a[i][s[i]] for i in range(n)), start=ONE_Q) for s in permutations(range(n))), ZERO)
