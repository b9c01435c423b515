"""Verification suite: each check evaluates one inequality family on concrete instances.

Every entry records both sides in serialized form, the relation, and a
verdict.  ``recheck`` recomputes a verdict from the serialized entry alone,
so reports are self-verifying.  Verdicts:

* Holds -- decided by exact arithmetic;
* HoldsNumerically -- certified by interval arithmetic at the recorded precision;
* Violated -- certified failure (the entry carries a reproducible witness);
* Undecided -- precision or search budget exhausted, or a cap was hit;
* ConsistentWithPaper -- the statement is only provable over Q-bar by the
  theory being checked; the entry holds the unconditional evidence for it.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import bundles as bd
from . import gallery, multinomial as mn
from . import linalg as la
from .config import Config
from .errors import AdelicError, CapExceeded, Indeterminate
from .scalars import (
    DEFAULT_POLICY,
    ExactPosReal,
    Order,
    PrecisionPolicy,
    compare,
    harmonic,
    to_float,
)

NUMERIC_BITS = 256
# twisted bundles get a box search for an upper bound of the minimum only below this many points
TWISTED_SEARCH_POINTS = 20_000


class Verdict(enum.Enum):
    HOLDS = "Holds"
    HOLDS_NUMERICALLY = "HoldsNumerically"
    VIOLATED = "Violated"
    UNDECIDED = "Undecided"
    CONSISTENT = "ConsistentWithPaper"


# --- values -------------------------------------------------------------------------
# A side of a relation is an int, an ExactPosReal, or a sum of ExactPosReals.

@dataclass(frozen=True)
class RealSum:
    terms: tuple[ExactPosReal, ...]


Value = int | ExactPosReal | RealSum


def value_to_json(v: Value) -> dict:
    if isinstance(v, bool):
        return {"int": str(int(v))}
    if isinstance(v, int):
        return {"int": str(v)}
    if isinstance(v, ExactPosReal):
        return {"real": v.to_json()}
    if isinstance(v, RealSum):
        return {"sum": [t.to_json() for t in v.terms]}
    raise TypeError(f"unsupported value {v!r}")


def value_from_json(doc: dict) -> Value:
    if "int" in doc:
        return int(doc["int"])
    if "real" in doc:
        return ExactPosReal.from_json(doc["real"])
    if "sum" in doc:
        return RealSum(tuple(ExactPosReal.from_json(t) for t in doc["sum"]))
    raise ValueError(f"unknown value encoding {doc!r}")


RELATIONS = ("=", "<", "<=", ">", ">=", "divides")


def _order_ok(order: Order, relation: str) -> bool:
    return {
        "=": order is Order.EQUAL,
        "<": order is Order.LESS,
        "<=": order in (Order.LESS, Order.EQUAL),
        ">": order is Order.GREATER,
        ">=": order in (Order.GREATER, Order.EQUAL),
    }[relation]


def _as_rational(v: Value) -> Fraction | None:
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, ExactPosReal):
        return v.as_rational() if v.is_rational else None
    if all(t.is_rational for t in v.terms):
        return sum((t.as_rational() for t in v.terms), Fraction(0))
    return None


def _enclose(v: Value, bits: int) -> tuple[Fraction, Fraction]:
    if isinstance(v, int):
        return Fraction(v), Fraction(v)
    if isinstance(v, ExactPosReal):
        enc = to_float(v, bits)
        return enc.lo, enc.hi
    encs = [to_float(t, bits) for t in v.terms]
    return sum((e.lo for e in encs), Fraction(0)), sum((e.hi for e in encs), Fraction(0))


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    bits: int | None = None
    tie: bool = False  # numeric enclosures overlapped on an equality-admitting relation


def decide(lhs: Value, rhs: Value, relation: str, policy: PrecisionPolicy = DEFAULT_POLICY) -> Decision:
    """Verdict for ``lhs relation rhs``: exact whenever the values allow it."""
    if relation == "divides":
        if not (isinstance(lhs, int) and isinstance(rhs, int)):
            raise TypeError("divisibility needs integers")
        return Decision(Verdict.HOLDS if lhs != 0 and rhs % lhs == 0 else Verdict.VIOLATED)
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    if isinstance(lhs, (int, ExactPosReal)) and isinstance(rhs, (int, ExactPosReal)) and not (
        isinstance(lhs, int) and isinstance(rhs, int)
    ):
        a = lhs if isinstance(lhs, ExactPosReal) else ExactPosReal.from_rational(lhs)
        b = rhs if isinstance(rhs, ExactPosReal) else ExactPosReal.from_rational(rhs)
        out = compare(a, b, policy)
        if out.order is Order.UNDECIDED:
            return Decision(Verdict.UNDECIDED, out.bits)
        ok = _order_ok(out.order, relation)
        if out.bits is None:
            return Decision(Verdict.HOLDS if ok else Verdict.VIOLATED)
        return Decision(Verdict.HOLDS_NUMERICALLY if ok else Verdict.VIOLATED, out.bits)
    qa, qb = _as_rational(lhs), _as_rational(rhs)
    if qa is not None and qb is not None:
        order = Order.LESS if qa < qb else Order.GREATER if qa > qb else Order.EQUAL
        return Decision(Verdict.HOLDS if _order_ok(order, relation) else Verdict.VIOLATED)
    # sums of irrational terms: enclosures at the policy's starting precision
    bits = policy.start_bits
    alo, ahi = _enclose(lhs, bits)
    blo, bhi = _enclose(rhs, bits)
    if ahi < blo:
        order = Order.LESS
    elif alo > bhi:
        order = Order.GREATER
    else:
        if relation in ("<=", ">=", "="):
            return Decision(Verdict.HOLDS_NUMERICALLY, bits, tie=True)
        return Decision(Verdict.UNDECIDED, bits)
    return Decision(Verdict.HOLDS_NUMERICALLY if _order_ok(order, relation) else Verdict.VIOLATED, bits)


# --- report ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Entry:
    statement_id: str
    instance: str
    lhs: Value | None
    rhs: Value | None
    relation: str
    verdict: Verdict
    bits: int | None = None
    witness: dict | None = None
    note: str = ""
    conditional: bool = False

    def to_json(self) -> dict:
        return {
            "statement_id": self.statement_id,
            "instance": self.instance,
            "lhs": None if self.lhs is None else value_to_json(self.lhs),
            "rhs": None if self.rhs is None else value_to_json(self.rhs),
            "relation": self.relation,
            "verdict": self.verdict.value,
            "bits": self.bits,
            "witness": self.witness,
            "note": self.note,
            "conditional": self.conditional,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Entry":
        return cls(
            doc["statement_id"],
            doc["instance"],
            None if doc["lhs"] is None else value_from_json(doc["lhs"]),
            None if doc["rhs"] is None else value_from_json(doc["rhs"]),
            doc["relation"],
            Verdict(doc["verdict"]),
            doc.get("bits"),
            doc.get("witness"),
            doc.get("note", ""),
            doc.get("conditional", False),
        )

    @property
    def verdict_label(self) -> str:
        if self.verdict is Verdict.HOLDS_NUMERICALLY:
            return f"HoldsNumerically({self.bits})"
        if self.verdict is Verdict.UNDECIDED and self.bits:
            return f"Undecided({self.bits})"
        return self.verdict.value


def recheck(entry: Entry, policy: PrecisionPolicy = DEFAULT_POLICY) -> Verdict:
    """Recompute the verdict of an entry from its recorded sides."""
    if entry.lhs is None or entry.rhs is None:
        return Verdict.UNDECIDED
    if entry.bits:
        policy = PrecisionPolicy(max(policy.start_bits, entry.bits), max(policy.max_bits, entry.bits), policy.integer_cap_bits)
    verdict = decide(entry.lhs, entry.rhs, entry.relation, policy).verdict
    if entry.conditional and verdict in (Verdict.HOLDS, Verdict.HOLDS_NUMERICALLY):
        return Verdict.CONSISTENT
    return verdict


def _display(v: Value | None) -> str:
    if v is None:
        return "-"
    if isinstance(v, RealSum):
        return " + ".join(str(t) for t in v.terms)
    return str(v)


@dataclass
class Report:
    header: dict = field(default_factory=dict)
    entries: list[Entry] = field(default_factory=list)

    def add(self, entry: Entry) -> None:
        self.entries.append(entry)

    def extend(self, entries: Iterable[Entry]) -> None:
        self.entries.extend(entries)

    def sorted(self) -> "Report":
        return Report(dict(self.header), sorted(self.entries, key=lambda e: (e.statement_id, e.instance)))

    def counts(self) -> dict[str, int]:
        out = {v.value: 0 for v in Verdict}
        for e in self.entries:
            out[e.verdict.value] += 1
        return out

    @property
    def violated(self) -> list[Entry]:
        return [e for e in self.entries if e.verdict is Verdict.VIOLATED]

    def select(self, prefix: str) -> list[Entry]:
        return [e for e in self.entries if e.statement_id == prefix or e.statement_id.startswith(prefix + ".")]

    def to_json(self) -> str:
        rep = self.sorted()
        doc = {"header": rep.header, "summary": rep.counts(), "entries": [e.to_json() for e in rep.entries]}
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        doc = json.loads(text)
        return cls(doc.get("header", {}), [Entry.from_json(e) for e in doc["entries"]])

    def to_markdown(self) -> str:
        rep = self.sorted()
        lines = ["| statement | instance | lhs | relation | rhs | verdict | note |", "|---|---|---|---|---|---|---|"]
        for e in rep.entries:
            cells = [e.statement_id, e.instance, _display(e.lhs), e.relation, _display(e.rhs), e.verdict_label, e.note]
            lines.append("| " + " | ".join(c.replace("|", "\\|") for c in cells) + " |")
        summary = ", ".join(f"{k}: {v}" for k, v in rep.counts().items())
        return "\n".join([f"Summary: {summary}", ""] + lines) + "\n"

    def to_csv(self) -> str:
        rep = self.sorted()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["statement_id", "instance", "lhs", "relation", "rhs", "verdict", "bits", "note"])
        for e in rep.entries:
            w.writerow([e.statement_id, e.instance, _display(e.lhs), e.relation, _display(e.rhs), e.verdict.value, e.bits or "", e.note])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "md": self.to_markdown, "csv": self.to_csv}[fmt]()


def entry(
    statement_id: str,
    instance: str,
    lhs: Value,
    relation: str,
    rhs: Value,
    *,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    witness: dict | None = None,
    note: str = "",
    conditional: bool = False,
) -> Entry:
    d = decide(lhs, rhs, relation, policy)
    verdict = d.verdict
    if conditional and verdict in (Verdict.HOLDS, Verdict.HOLDS_NUMERICALLY):
        verdict = Verdict.CONSISTENT
    if d.tie:
        note = (note + "; " if note else "") + "enclosures overlap: equality within tolerance"
    return Entry(statement_id, instance, lhs, rhs, relation, verdict, d.bits, witness, note, conditional)


def undecided(statement_id: str, instance: str, note: str) -> Entry:
    return Entry(statement_id, instance, None, None, "-", Verdict.UNDECIDED, note=note)


def _guard(statement_id: str, instance: str, fn: Callable[[], list[Entry]]) -> list[Entry]:
    """Run fn; caps and undecidable valuations become Undecided entries, never silence."""
    try:
        return fn()
    except (CapExceeded, Indeterminate) as exc:
        return [undecided(statement_id, instance, f"{type(exc).__name__}: {exc}")]


def _vec_json(x: Sequence) -> list[str]:
    return [str(c) for c in x]


def _q(x) -> ExactPosReal:
    return ExactPosReal.from_rational(x)


def factorial_value(n: int) -> ExactPosReal:
    """n! as a prime-power form via Legendre's formula (no factoring)."""
    from sympy import primerange

    return ExactPosReal._make(Fraction(0), {p: Fraction(mn.legendre(n, p)) for p in primerange(2, n + 1)})


# --- multinomial lcm --------------------------------------------------------------------

def check_lcm(config: Config = Config(), n_max: int = 6, l_max: int = 30) -> list[Entry]:
    out: list[Entry] = []
    grid = [(n, l) for n in range(1, n_max + 1) for l in range(1, l_max + 1)]
    for n, l in grid:
        inst = f"n={n} l={l}"
        brute = mn.p_value(n, l)
        if config.selected("lcm.identity"):
            out.append(entry("lcm.identity", inst, brute, "=", mn.p_closed_form(n, l)))
        if config.selected("lcm.bounds"):
            c = math.comb(l + n - 1, n - 1)
            out.append(entry("lcm.bounds.lower", inst, n**l, "<=", brute * c, note="n^l <= p*C(l+n-1,n-1)"))
            out.append(entry("lcm.bounds.upper", inst, brute * brute, "<=", n ** (3 * l), note="p^2 <= n^(3l)"))
    if config.selected("lcm.williams"):
        for l in range(1, 1001):
            out.append(entry("lcm.williams", f"l={l}", mn.p_value(2, l) * (l + 1), "=", mn.lcm_upto(l + 1)))
    if config.selected("lcm.chain"):
        for n in range(2, 6):
            for l in range(1, 16):
                inst = f"n={n} l={l}"
                try:
                    ch = mn.chain_qrs(n, l)
                except CapExceeded as exc:
                    out.append(undecided("lcm.chain", inst, str(exc)))
                    continue
                out.append(entry("lcm.chain.r_divides_s", inst, ch.r, "divides", ch.s))
                out.append(entry("lcm.chain.s_divides_q", inst, ch.s, "divides", ch.q))
                out.append(entry("lcm.chain.q_divides_r", inst, ch.q, "divides", ch.r))
                out.append(entry("lcm.chain.r_tuples", inst, ch.r_tuples, "=", ch.r, note="r from its lcm-of-products form"))
    if config.selected("lcm.lemma"):
        for n in range(2, 6):
            for l in range(2, 16):
                inst = f"n={n} l={l}"
                q_prev, q_here = mn.q_value(n, l - 1), mn.q_value(n, l)
                bound = mn.lcm_upto(1 + Fraction(l, n - 1)) * mn.q_value(n - 1, l + 1)
                out.append(entry("lcm.lemma.monotone", inst, q_prev, "divides", q_here))
                out.append(entry("lcm.lemma.descent", inst, q_here, "divides", bound))
    if config.selected("lcm.reassembly"):
        for n in range(1, 5):
            for l in range(1, 13):
                res = mn.p_bruteforce(n, l, valuations=True)
                out.append(entry(
                    "lcm.reassembly", f"n={n} l={l}", res.reassembled(), "=", res.value,
                    witness={"max_valuation": {str(p): v for p, v in res.max_valuation.items()},
                             "argmax": {str(p): list(a) for p, a in res.argmax.items()}},
                ))
    if config.selected("lcm.psi"):
        bad = mn.psi_bound_check(10**4)
        out.append(entry("lcm.psi", "m<=10000", len(bad), "=", 0, witness={"violations": bad[:20]} if bad else None,
                         note="count of m with d(m)^2 > 8^m"))
    return out


# --- slopes and minima -----------------------------------------------------------------

def check_slopes(config: Config = Config(), n_max: int = 50, random_count: int = 100) -> list[Entry]:
    out: list[Entry] = []
    policy = config.policy
    if config.selected("bundle.slope.standard"):
        for n in range(1, n_max + 1):
            out.append(entry("bundle.slope.standard", f"n={n}", bd.slope(gallery.standard(n)), "=", ExactPosReal()))
    if config.selected("bundle.slope.an"):
        for n in range(1, n_max + 1):
            expected = _q(n + 1) ** Fraction(-1, 2 * n)
            out.append(entry("bundle.slope.an", f"n={n}", bd.slope(gallery.root_lattice_An(n)), "=", expected,
                             note="exp slope = (n+1)^(-1/2n)"))
    if config.selected("bundle.slope.eq"):
        q = Fraction(1, 4)
        out.append(entry("bundle.slope.eq", "q=1/4", bd.slope(gallery.counterexample_Eq(q)), "=",
                         ExactPosReal.prime_power(5, -q / 2)))
    if config.wants("bundle.slope"):
        rng = random.Random(config.seed)
        for k in range(random_count):
            a = bd.random_bundle(rng, rng.randint(1, 3))
            b = bd.random_bundle(rng, rng.randint(1, 3))
            l = rng.randint(1, a.dim)
            inst = f"random#{k:03d} seed={config.seed}"
            wit = {"a": bd.bundle_to_json(a), "b": bd.bundle_to_json(b), "l": l}
            sa, sb = bd.slope(a), bd.slope(b)
            if config.selected("bundle.slope.dual"):
                out.append(entry("bundle.slope.dual", inst, bd.slope(bd.dual(a)), "=", sa.inverse(), witness=wit))
            if config.selected("bundle.slope.tensor"):
                out.append(entry("bundle.slope.tensor", inst, bd.slope(bd.tensor(a, b)), "=", sa * sb, witness=wit))
            if config.selected("bundle.slope.ext"):
                out.append(entry("bundle.slope.ext", inst, bd.slope(bd.ext_power(a, l)), "=", sa**l, witness=wit))
            if config.selected("bundle.slope.sum"):
                lhs = bd.slope(bd.direct_sum(a, b)) ** (a.dim + b.dim)
                out.append(entry("bundle.slope.sum", inst, lhs, "=", sa**a.dim * sb**b.dim, witness=wit,
                                 note="(n+m) mu(a+b) = n mu(a) + m mu(b)"))
    return out


def check_minima(config: Config = Config(), n_max: int = 10) -> list[Entry]:
    out: list[Entry] = []
    radius = config.search_radius
    root2 = _q(2).sqrt()
    for n in range(1, n_max + 1):
        inst = f"n={n}"
        if radius < 1:
            out.append(undecided("min.an", inst, "search radius 0: empty search"))
            out.append(undecided("min.standard", inst, "search radius 0: empty search"))
            continue
        if config.selected("min.an"):
            b = gallery.root_lattice_An(n)
            r = bd.min_search(b, min(radius, 2))
            amb = gallery.an_ambient(r.witness)
            is_root = sorted(c for c in amb if c) == [-1, 1]
            out.append(entry("min.an", inst, r.height.value, "=", root2,
                             witness={"basis": list(r.witness), "ambient": list(amb)}))
            out.append(entry("min.an.witness_is_root", inst, int(is_root), "=", 1, witness={"ambient": list(amb)}))
        if config.selected("min.standard"):
            r = bd.min_search(gallery.standard(n), radius)
            out.append(entry("min.standard", inst, r.height.value, "=", ExactPosReal(), witness={"witness": list(r.witness)}))
    return out


# --- counterexample E_q -------------------------------------------------------------------

def check_counterexample(q=Fraction(1, 4), config: Config = Config()) -> list[Entry]:
    q = Fraction(q)
    inst = f"q={q}"
    out: list[Entry] = []
    five_q = ExactPosReal.prime_power(5, q)
    pre = ExactPosReal.prime_power(5, 2 * q)
    out.append(entry("counterexample.precondition", inst, pre, ">", _q(2), note="5^(2q) > 2"))
    if out[-1].verdict is not Verdict.HOLDS:
        return out
    b = gallery.counterexample_Eq(q)
    t = bd.tensor(b, b)
    root2 = _q(2).sqrt()
    out.append(entry("counterexample.height_e1", inst, bd.height(b, [1, 0]).value, "=", five_q))
    out.append(entry("counterexample.height_e2", inst, bd.height(b, [0, 1]).value, "=", five_q))
    tensor_h = bd.height(t, [1, 0, 0, -1]).value
    out.append(entry("counterexample.tensor_height", inst, tensor_h, "=", root2 * five_q, witness={"x": [1, 0, 0, -1]}))
    out.append(entry("counterexample.strict", inst, tensor_h, "<", five_q * five_q,
                     note="minimum of the tensor square is below the square of the minimum"))
    radius, den = config.search_radius, config.denom_bound
    if radius < 1:
        out.append(undecided("counterexample.lemma_samples", inst, "search radius 0: empty search"))
        out.append(undecided("counterexample.minimum", inst, "search radius 0: empty search"))
        return out
    values = sorted({Fraction(a, d) for a in range(-radius, radius + 1) for d in range(1, den + 1)})
    evaluate = bd.HeightEvaluator(b)
    seen: set[tuple[int, ...]] = set()
    best: tuple[ExactPosReal, tuple[int, ...]] | None = None
    for x, y in itertools.product(values, repeat=2):
        if x == 0 or y == 0:
            continue
        v = bd.primitive_vector((x, y))
        if v in seen:
            continue
        seen.add(v)
        h = evaluate(v).value
        if best is None or compare(h, best[0]).order is Order.LESS:
            best = (h, v)
    out.append(entry("counterexample.lemma_samples", f"{inst} radius={radius} den<={den}", best[0], ">", root2,
                     witness={"min_vector": list(best[1]), "vectors": len(seen)},
                     note="least height over searched xy != 0 vectors"))
    found = bd.min_search(b, radius, den)
    out.append(entry("counterexample.minimum", inst, found.height.value, "=", five_q, conditional=True,
                     witness={"witness": list(found.witness), "vectors": found.candidates},
                     note="search minimum over Q equals 5^q; the value over Q-bar needs Zhang's theorem"))
    return out


# --- Minkowski-Hlawka ------------------------------------------------------------------------

def check_mh(config: Config = Config(), n_values: Sequence[int] = range(2, 7), eps=Fraction(1, 100)) -> list[Entry]:
    out: list[Entry] = []
    eps = Fraction(eps)
    num_policy = config.numeric_policy(NUMERIC_BITS)
    for n in n_values:
        inst = f"n={n} eps={eps}"
        b, cert = gallery.mh_construct(n, eps, policy=config.policy)
        zero_minors = sum(1 for _, _, d in gallery.all_minors(cert.matrix) if d == 0 or d % cert.p == 0)
        out.append(entry("mh.minors", inst, zero_minors, "=", 0,
                         witness={"p": cert.p, "max_minor": cert.max_minor, "minors": cert.minor_count},
                         note="minors vanishing or divisible by p"))
        out.append(entry("mh.window", inst, int(gallery.mh_window_ok(cert)), "=", 1,
                         witness={"exponents": [str(c) for c in cert.exponents]},
                         note="sqrt(i)(1-eps) < p^c_i <= sqrt(i) for all i"))
        qinv = cert.q_invariant
        out.append(entry("mh.q_exact", inst, qinv, ">=", _q(1 - eps) * factorial_value(n) ** Fraction(1, 2 * n),
                         note="q >= (1-eps) n!^(1/2n)"))
        out.append(entry("mh.q_numeric", inst, qinv, ">=", _q(n).sqrt() * ExactPosReal.exp(Fraction(-1, 2)),
                         policy=num_policy, note="q >= sqrt(n/e)"))
        out.append(entry("mh.slope", inst, bd.slope(b), "=", qinv, note="exp slope equals the q-invariant"))
        out.append(entry("mh.e1", inst, bd.height(b, [1] + [0] * (n - 1)).value, "=", ExactPosReal()))
        if config.search_radius < 1:
            out.append(undecided("mh.samples", inst, "search radius 0: empty search"))
            continue
        radius, den = gallery.mh_box(n)
        radius, den = min(radius, config.search_radius), min(den, config.denom_bound)
        rep = gallery.mh_sample_check(b, cert, radius, den, policy=config.policy)
        box = f"{inst} radius={radius} den<={den}"
        out.append(entry("mh.samples", box, len(rep.below_one), "=", 0,
                         witness={"vectors": rep.vectors, "below_one": [list(v) for v in rep.below_one[:10]]},
                         note="searched vectors of height < 1"))
        out.append(entry("mh.support_bound", box, len(rep.support_bound_failures), "=", 0,
                         note="vectors with t nonzero entries below p^(-c_t) sqrt(t)"))
        out.append(entry("mh.minimum", box, rep.min_height, "=", ExactPosReal(), conditional=True,
                         witness={"witness": list(rep.min_witness), "vectors": rep.vectors},
                         note="box minimum is 1; minimum 1 over Q-bar is the theorem's claim"))
    return out


# --- symmetric powers ------------------------------------------------------------------------

SYM_BUNDLE_DIM = 300


def _sym_scan(n: int, l: int) -> tuple[int, tuple[int, ...], int, bool]:
    """One pass over all compositions: max multinomial, argmax, lcm, all-equal flag."""
    fact = [math.factorial(k) for k in range(l + 1)]
    top = fact[l]
    best, arg, acc = 0, (), 1
    first = None
    all_equal = True
    seen: set[tuple[int, ...]] = set()
    for comp in mn.compositions(l, n):
        key = tuple(sorted(comp))
        if key in seen:
            continue
        seen.add(key)
        denom = 1
        for i in comp:
            denom *= fact[i]
        val = top // denom
        if first is None:
            first = val
        elif val != first:
            all_equal = False
        acc = math.lcm(acc, val)
        if val > best:
            best, arg = val, comp
    return best, arg, acc, all_equal


def lambda_closed_form(n: int, l: int) -> int:
    lam = l // n
    return math.factorial(l) // (math.factorial(lam) ** n * (lam + 1) ** (l - n * lam))


def check_sym(n: int, l: int, config: Config = Config()) -> list[Entry]:
    inst = f"n={n} l={l}"
    out: list[Entry] = []
    count = math.comb(l + n - 1, n - 1)
    if count > mn.MAX_COMPOSITIONS:
        return [undecided("sym.maxslope", inst, f"{count} compositions exceed the cap")]
    best, arg, p_nl, all_equal = _sym_scan(n, l)
    # exp(2 mu_max) = max multinomial for S^l of the standard bundle
    out.append(entry("sym.maxslope", inst, best, "=", lambda_closed_form(n, l), witness={"argmax": list(arg)},
                     note="max over i of l!/i! equals l!/(lam!^n (lam+1)^(l-n lam))"))
    out.append(entry("sym.sandwich.lower", inst, best, ">=", 1, note="mu_max(S^l) - l mu_max(E) >= 0, squared"))
    out.append(entry("sym.sandwich.upper", inst, best, "<=", count * p_nl * p_nl,
                     note="exp(2 mu_max) <= C(l+n-1,n-1) p(n,l)^2"))
    out.append(entry("sym.semistable", inst, int(all_equal), "=", int(n == 1 or l == 1),
                     note="semistable iff n = 1 or l = 1"))
    out.append(entry("sym.cap", inst, count * p_nl * p_nl, "<=", n ** (4 * l), note="C p^2 <= n^(4l)"))
    if count <= min(SYM_BUNDLE_DIM, config.dimension_cap):
        s = bd.sym_power(gallery.standard(n), l, cap=config.dimension_cap)
        ms = bd.max_slope(s, "exact-split")
        closed = _q(lambda_closed_form(n, l)).sqrt()
        out.append(entry("sym.bundle.maxslope", inst, ms.value, "=", closed,
                         witness={"line": list(la.monomials(n, l)[ms.witness[0]])}))
        lower = bd.lambda_lower_bound(s)
        if config.search_radius >= 1:
            found = bd.min_search(s, 1)
            out.append(entry("sym.bundle.minimum", inst, found.height.value, "=", lower,
                             witness={"witness": list(found.witness)},
                             note="search minimum meets the lower bound exp(-mu_max)"))
    return out


# --- exterior powers -------------------------------------------------------------------------

def _psi_gram_ok(n: int, l: int) -> bool:
    """psi(e_S) = sum_sigma sgn(sigma) e_{s_sigma(1)} (x) ... has Gram l! I in the standard tensor power."""
    subsets = list(itertools.combinations(range(n), l))
    images = []
    for s in subsets:
        vec: dict[tuple[int, ...], int] = {}
        for perm in itertools.permutations(range(l)):
            inv = sum(1 for i in range(l) for j in range(i + 1, l) if perm[i] > perm[j])
            vec[tuple(s[i] for i in perm)] = -1 if inv % 2 else 1
        images.append(vec)
    lf = math.factorial(l)
    for i, a in enumerate(images):
        for j, b in enumerate(images):
            dot = sum(v * b.get(k, 0) for k, v in a.items())
            if dot != (lf if i == j else 0):
                return False
    return True


def check_ext(n: int, l: int, config: Config = Config()) -> list[Entry]:
    inst = f"n={n} l={l}"
    out: list[Entry] = []
    a = gallery.root_lattice_An(n)
    w = bd.ext_power(a, l, cap=config.dimension_cap)
    mu = _q(n + 1) ** Fraction(-l, 2 * n)
    out.append(entry("ext.slope", inst, bd.slope(w), "=", mu, note="exp slope = (n+1)^(-l/2n)"))
    std = bd.ext_power(gallery.standard(n), l, cap=config.dimension_cap)
    out.append(entry("ext.standard.maxslope", inst, bd.max_slope(std).value, "=", ExactPosReal()))
    out.append(entry("ext.standard.upper", inst, 1, "<=", math.factorial(n) // math.factorial(n - l),
                     note="0 <= (1/2) log(n!/(n-l)!)"))
    if n <= 5:
        out.append(entry("ext.psi_gram", inst, int(_psi_gram_ok(n, l)), "=", 1, note="psi images have Gram l! I"))
        if config.search_radius < 1:
            out.append(undecided("ext.minimum", inst, "search radius 0: empty search"))
        else:
            found = bd.min_search(w, min(config.search_radius, 2))
            root = _q(l + 1).sqrt()
            out.append(entry("ext.minimum", inst, found.height.value, "=", root, witness={"witness": list(found.witness)}))
            wedge = bd.unit_vector(w.dim, 0)  # (e_1 - e_{n+1}) ^ ... ^ (e_l - e_{n+1})
            out.append(entry("ext.witness", inst, bd.height(w, wedge).value, "=", root, witness={"wedge": list(wedge)}))
    if n <= 4:
        ms = bd.max_slope(w, "search", radius=1)
        out.append(entry("ext.maxslope", inst, ms.value, "=", mu, conditional=True,
                         witness={"candidates": ms.candidates},
                         note="search lower bound equals l mu(A_n); equality with mu_max is semistability"))
    return out


# --- Zhang sandwich --------------------------------------------------------------------------

def lambda_upper(b: bd.Bundle, config: Config) -> tuple[ExactPosReal, tuple[int, ...], str]:
    """An upper bound for the minimum: a box search when affordable, else the coordinate vectors."""
    affordable = not b.twists or 3**b.dim <= TWISTED_SEARCH_POINTS
    if config.search_radius >= 1 and affordable:
        try:
            r = bd.min_search(b, config.search_radius if not b.twists else 1, 1)
            return r.height.upper, r.witness, r.method
        except CapExceeded:
            pass
    heights = [bd.height(b, bd.unit_vector(b.dim, i)).upper for i in range(b.dim)]
    best = 0
    for i in range(1, b.dim):
        if compare(heights[i], heights[best]).order is Order.LESS:
            best = i
    return heights[best], bd.unit_vector(b.dim, best), "coordinates"


def check_zhang(b: bd.Bundle, name: str, config: Config = Config()) -> list[Entry]:
    if not bd.split_detect(b).is_split:
        raise ValueError("check_zhang needs a split bundle")
    out: list[Entry] = []
    lam, wit, method = lambda_upper(b, config)
    ms = bd.max_slope(b, "exact-split")
    product = lam * ms.value
    w = {"witness": list(wit), "method": method, "line": list(ms.witness)}
    out.append(entry("zhang.lower", name, product, ">=", ExactPosReal(), witness=w,
                     note="search minimum times exp(mu_max) >= 1"))
    out.append(entry("zhang.upper", name, product, "<=", _q(b.dim).sqrt(), policy=config.numeric_policy(NUMERIC_BITS),
                     witness=w, note="search minimum times exp(mu_max) <= sqrt(n)"))
    if b.dim == 1:
        out.append(entry("zhang.line", name, lam * bd.slope(b), "=", ExactPosReal()))
    return out


def check_zhang_chain(n: int, config: Config = Config()) -> list[Entry]:
    policy = config.numeric_policy(NUMERIC_BITS)
    mid = ExactPosReal.exp((harmonic(n) - 1) / 2)
    inst = f"n={n}"
    return [
        entry("zhang.chain.left", inst, factorial_value(n) ** Fraction(1, 2 * n), "<=", mid, policy=policy,
              note="n!^(1/2n) <= exp((H_n - 1)/2)"),
        entry("zhang.chain.right", inst, mid, "<=", _q(n).sqrt(), policy=policy, note="exp((H_n - 1)/2) <= sqrt(n)"),
    ]


def zhang_instances(config: Config) -> list[tuple[str, bd.Bundle]]:
    out = [(f"standard n={n}", gallery.standard(n)) for n in range(1, 13)]
    for n, l in ((2, 2), (2, 5), (2, 11), (3, 2), (3, 3), (3, 4), (4, 2)):
        out.append((f"sym standard n={n} l={l}", bd.sym_power(gallery.standard(n), l)))
    rng = random.Random(config.seed)
    for k in range(12):
        dim = k + 1
        out.append((f"random split dim={dim} seed={config.seed}", bd.random_bundle(rng, dim, split=True)))
    return out


# --- tensor products ---------------------------------------------------------------------------

def tensor_family(n: int, m: int) -> list[list[tuple[int, ...]]]:
    """Coordinate subspaces of size <= 2, S (x) T for coordinate S and T a line or everything, and the full space."""
    dim = n * m
    fam = [[bd.unit_vector(dim, i) for i in range(dim)]]
    for k in (1, 2):
        for s in itertools.combinations(range(dim), k):
            fam.append([bd.unit_vector(dim, i) for i in s])
    for k in range(1, n + 1):
        for s in itertools.combinations(range(n), k):
            for t in [(j,) for j in range(m)] + [tuple(range(m))]:
                fam.append([bd.unit_vector(dim, bd.tensor_index(i, j, m)) for i in s for j in t])
    return fam


def check_tensor(a: bd.Bundle, b: bd.Bundle, name: str, config: Config = Config()) -> list[Entry]:
    """min_search(a (x) b) between exp(-mu_max(a) - mu_max(b)) and the product of upper bounds; mu_max(a (x) b) >= mu_max(a) + mu_max(b)."""
    out: list[Entry] = []
    t = bd.tensor(a, b)
    ms_a, ms_b = bd.max_slope(a), bd.max_slope(b)
    ms_t = bd.max_slope(t)
    out.append(entry("tensor.maxslope_sum", name, ms_t.value, ">=", ms_a.value * ms_b.value,
                     note="mu_max of the tensor product >= sum of maximal slopes"))
    if config.search_radius < 1:
        out.append(undecided("tensor.minimum", name, "search radius 0: empty search"))
        return out
    found = bd.min_search(t, 1)
    lower = bd.lambda_lower_bound(via="tensor-factorization", factors=[a, b])
    ub_a, _, _ = lambda_upper(a, config)
    ub_b, _, _ = lambda_upper(b, config)
    w = {"witness": list(found.witness)}
    out.append(entry("tensor.min_lower", name, lower, "<=", found.height.upper, witness=w,
                     note="exp(-mu_max(a) - mu_max(b)) <= search minimum"))
    out.append(entry("tensor.product_upper", name, found.height.lower, "<=", ub_a * ub_b, witness=w,
                     note="search minimum <= product of the factors' search minima"))
    return out


def tensor_family(n: int, m: int) -> list[list[tuple[int, ...]]]:
    """Coordinate subspaces of size <= 2, S (x) T for coordinate S and T a line or everything, and the full space."""
    dim = n * m
    fam = [[bd.unit_vector(dim, i) for i in range(dim)]]
    for k in (1, 2):
        for s in itertools.combinations(range(dim), k):
            fam.append([bd.unit_vector(dim, i) for i in s])
    for k in range(1, n + 1):
        for s in itertools.combinations(range(n), k):
            for t in [(j,) for j in range(m)] + [tuple(range(m))]:
                fam.append([bd.unit_vector(dim, bd.tensor_index(i, j, m)) for i in s for j in t])
    return fam


def check_tensor_an(n: int, m: int, config: Config = Config()) -> list[Entry]:
    """A_n (x) standard(m): maximal slope and minimum, with the conditional equalities reported as such."""
    inst = f"A_{n} x standard({m})"
    out: list[Entry] = []
    a, e = gallery.root_lattice_An(n), gallery.standard(m)
    t = bd.tensor(a, e)
    mu_a = bd.slope(a)
    target = mu_a * bd.max_slope(e).value
    best = None
    best_basis: list = []
    exceed = 0
    fam = tensor_family(n, m)
    for basis in fam:
        val = bd.subspace_slope(t, basis)
        if compare(val, target).order is Order.GREATER:
            exceed += 1
        if best is None or compare(val, best).order is Order.GREATER:
            best, best_basis = val, basis
    wit = {"subspaces": len(fam), "best_dim": len(best_basis)}
    out.append(entry("tensor.an.maxslope", inst, best, "=", target, witness=wit,
                     note="search lower bound for mu_max equals mu(A_n) + mu_max(E)"))
    out.append(entry("tensor.an.no_exceed", inst, exceed, "=", 0, witness=wit,
                     note="enumerated subspaces with slope above mu(A_n) + mu_max(E); nonzero would flag a bug"))
    out.append(entry("tensor.an.maxslope_equality", inst, best, "=", target, conditional=True,
                     note="equality with mu_max rests on the symmetric-group invariance argument"))
    if config.search_radius < 1:
        out.append(undecided("tensor.an.minimum", inst, "search radius 0: empty search"))
        return out
    found = bd.min_search(t, 1)
    root2 = _q(2).sqrt()
    x = found.witness
    rows = [x[i * m:(i + 1) * m] for i in range(n)]
    pure = la.rank(la.mat(rows)) == 1
    out.append(entry("tensor.an.minimum", inst, found.height.value, "=", root2, witness={"witness": list(x)}))
    out.append(entry("tensor.an.split_witness", inst, int(pure), "=", 1, witness={"witness": list(x)},
                     note="the minimizing witness is a pure tensor"))
    root = (1, -1) + (0,) * (n - 2) if n >= 2 else (1,)
    pure_vec = tuple(r * c for r in root for c in bd.unit_vector(m, 0))
    out.append(entry("tensor.an.root_times_unit", inst, bd.height(t, pure_vec).value, "=", root2,
                     witness={"x": list(pure_vec)}))
    out.append(entry("tensor.an.min_lower", inst, root2 * bd.lambda_lower_bound(e), "<=", found.height.value,
                     conditional=True,
                     note="Lambda(A_n) exp(-mu_max(E)) <= search minimum, with Lambda(A_n) = sqrt(2) over Q-bar assumed"))
    return out


def tensor_pairs(config: Config) -> list[tuple[str, bd.Bundle, bd.Bundle]]:
    out = [(f"standard({n}) x standard({m})", gallery.standard(n), gallery.standard(m)) for n, m in ((1, 1), (2, 3), (3, 3))]
    rng = random.Random(config.seed + 2)
    for k in range(6):
        a = bd.random_bundle(rng, rng.randint(1, 2), split=True)
        b = bd.random_bundle(rng, rng.randint(1, 3), split=True)
        out.append((f"random split pair#{k} seed={config.seed}", a, b))
    return out


# --- convexity --------------------------------------------------------------------------------

def check_convexity(trials: int = 500, seed: int = 42, config: Config = Config()) -> list[Entry]:
    rng = random.Random(seed)
    out: list[Entry] = []
    policy = config.numeric_policy(NUMERIC_BITS)
    for k in range(trials):
        a = bd.random_bundle(rng, rng.randint(1, 3), split=True)
        b = bd.random_bundle(rng, rng.randint(1, 3), split=True)
        s = bd.direct_sum(a, b)
        mode = rng.random()
        x = bd.random_vector(rng, a.dim) if mode > 0.15 else (Fraction(0),) * a.dim
        y = bd.random_vector(rng, b.dim) if mode < 0.85 else (Fraction(0),) * b.dim
        inst = f"trial#{k:03d} seed={seed}"
        wit = {"a": bd.bundle_to_json(a), "b": bd.bundle_to_json(b), "x": _vec_json(x), "y": _vec_json(y)}
        hs = bd.height(s, x + y).value
        if not any(y):
            out.append(entry("convexity.sum", inst, hs, "=", bd.height(a, x).value, witness=wit, note="zero second block"))
        elif not any(x):
            out.append(entry("convexity.sum", inst, hs, "=", bd.height(b, y).value, witness=wit, note="zero first block"))
        else:
            rhs = RealSum((bd.height(a, x).value ** 2, bd.height(b, y).value ** 2))
            out.append(entry("convexity.sum", inst, hs**2, ">=", rhs, policy=policy, witness=wit))
        if config.search_radius >= 1 and k % 10 == 0 and s.dim <= 4:
            ma, mb, msum = (bd.min_search(c, 1, 2) for c in (a, b, s))
            lo = ma.height.value
            if compare(mb.height.value, lo).order is Order.LESS:
                lo = mb.height.value
            out.append(entry("convexity.min", inst, msum.height.value, "=", lo, witness=wit,
                             note="box minimum of a direct sum is the smaller box minimum"))
    return out


def check_product_formula(trials: int = 500, seed: int = 42) -> list[Entry]:
    rng = random.Random(seed + 1)
    out = []
    for k in range(trials):
        b = bd.random_bundle(rng, rng.randint(1, 3))
        x = bd.random_vector(rng, b.dim)
        c = Fraction(rng.choice([-1, 1]) * rng.randint(1, 60), rng.randint(1, 60))
        h1, h2 = bd.height(b, x), bd.height(b, tuple(c * xi for xi in x))
        inst = f"trial#{k:03d} seed={seed}"
        wit = {"bundle": bd.bundle_to_json(b), "x": _vec_json(x), "c": str(c)}
        out.append(entry("convexity.product_formula", inst, h2.lower, "=", h1.lower, witness=wit, note="lower ends"))
        if not h1.is_exact or not h2.is_exact:
            out.append(entry("convexity.product_formula.upper", inst, h2.upper, "=", h1.upper, witness=wit))
    return out


# --- driver -------------------------------------------------------------------------------------

GROUPS = ("lcm", "bundle", "min", "counterexample", "mh", "sym", "ext", "zhang", "tensor", "convexity")


def _filtered(entries: Iterable[Entry], config: Config) -> list[Entry]:
    return [e for e in entries if config.selected(e.statement_id)]


def run_all(config: Config = Config()) -> Report:
    """The full acceptance grid; deterministic given the configuration (seed included)."""
    report = Report(header={
        "config": config.to_json(),
        "policy": {"start_bits": config.policy.start_bits, "max_bits": config.policy.max_bits,
                   "integer_cap_bits": config.policy.integer_cap_bits},
        "numeric_bits": NUMERIC_BITS,
        "seed": config.seed,
    })
    jobs: list[tuple[str, str, Callable[[], list[Entry]]]] = []
    if config.wants("lcm"):
        jobs.append(("lcm", "grid", lambda: check_lcm(config)))
    if config.wants("bundle"):
        jobs.append(("bundle", "grid", lambda: check_slopes(config)))
    if config.wants("min"):
        jobs.append(("min", "grid", lambda: check_minima(config)))
    if config.wants("counterexample"):
        jobs.append(("counterexample", "q=1/4", lambda: check_counterexample(Fraction(1, 4), config)))
    if config.wants("mh"):
        jobs.append(("mh", "n=2..6", lambda: check_mh(config)))
    if config.wants("sym"):
        for n in range(1, 13):
            for l in range(1, 13):
                jobs.append(("sym", f"n={n} l={l}", lambda n=n, l=l: check_sym(n, l, config)))
    if config.wants("ext"):
        for n in range(1, 9):
            for l in range(1, n + 1):
                jobs.append(("ext", f"n={n} l={l}", lambda n=n, l=l: check_ext(n, l, config)))
    if config.wants("zhang"):
        for name, b in zhang_instances(config):
            jobs.append(("zhang", name, lambda b=b, name=name: check_zhang(b, name, config)))
        jobs.append(("zhang.chain", "n<=1000", lambda: [e for n in range(1, 1001) for e in check_zhang_chain(n, config)]))
    if config.wants("tensor"):
        for n in range(1, 7):
            for m in range(1, 7):
                jobs.append(("tensor.an", f"n={n} m={m}", lambda n=n, m=m: check_tensor_an(n, m, config)))
        for name, a, b in tensor_pairs(config):
            jobs.append(("tensor", name, lambda a=a, b=b, name=name: check_tensor(a, b, name, config)))
    if config.wants("convexity"):
        jobs.append(("convexity", "trials", lambda: check_convexity(config.convexity_trials, config.seed, config)))
        jobs.append(("convexity.product_formula", "trials",
                     lambda: check_product_formula(config.convexity_trials, config.seed)))
    for group, inst, job in jobs:
        report.extend(_filtered(_guard(group, inst, job), config))
    return report.sorted()
