"""Command-line front end: ``adelic pnl | pnl-grid | gallery | bundle | verify``.

Exit codes: 0 success, 1 a Violated entry (or a --check mismatch), 2 invalid
input or an exceeded cap, 3 I/O failure.  Config fields can be overridden
through ADELIC_<FIELD> environment variables (e.g. ADELIC_SEARCH_RADIUS=2);
explicit flags win over the environment.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from . import bundles as bd
from . import gallery
from . import multinomial as mn
from .config import FORMATS, from_env
from .errors import AdelicError, CapExceeded
from .scalars import rat
from .theorems import run_all

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3


class InputError(Exception):
    """Bad command-line input: reported with exit code 2."""


def _emit(doc) -> None:
    print(json.dumps(doc, sort_keys=True))


def _rational_list(text: str) -> list[Fraction]:
    try:
        return [rat(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse vector {text!r}: {exc}") from exc


# --- pnl ---------------------------------------------------------------------------------

def cmd_pnl(args) -> int:
    if args.n < 1 or args.l < 1:
        raise InputError("n and l must be >= 1")
    method = "both" if args.check else args.method
    values = []
    if method in ("brute", "both"):
        values.append(mn.p_bruteforce(args.n, args.l))
    if method in ("closed", "both"):
        values.append(mn.p_closed_form(args.n, args.l))
    if args.factored:
        print(" ".join(f"{v} = {mn.factor_string(v)}" for v in values))
    else:
        print(" ".join(str(v) for v in values) + (" OK" if args.check and values[0] == values[1] else ""))
    if args.check and values[0] != values[1]:
        print("MISMATCH", file=sys.stderr)
        return EXIT_VIOLATED
    return EXIT_OK


def cmd_pnl_grid(args) -> int:
    if args.n_max < 1 or args.l_max < 1:
        raise InputError("grid bounds must be >= 1")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "l", "p", "factored"])
    for n in range(1, args.n_max + 1):
        for l in range(1, args.l_max + 1):
            v = mn.p_closed_form(n, l)
            w.writerow([n, l, v, mn.factor_string(v)])
    return EXIT_OK


# --- gallery -------------------------------------------------------------------------------

def cmd_gallery(args) -> int:
    if args.name == "standard":
        b = gallery.standard(args.n)
        meta = gallery.expected_metadata("standard", b, n=args.n)
    elif args.name == "an":
        b = gallery.root_lattice_An(args.n)
        meta = gallery.expected_metadata("an", b, n=args.n)
    elif args.name == "eq":
        q = rat(args.q)
        b = gallery.counterexample_Eq(q)
        meta = gallery.expected_metadata("eq", b, q=q)
    else:
        b, cert = gallery.mh_construct(args.n, rat(args.eps))
        meta = gallery.expected_metadata("mh", b, certificate=cert)
    doc = bd.bundle_to_json(b)
    doc["metadata"] = meta
    text = json.dumps(doc, sort_keys=True, indent=1)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


# --- bundle ----------------------------------------------------------------------------------

def _load_bundle(path: str) -> bd.Bundle:
    with open(path) as fh:  # OSError propagates as exit 3
        text = fh.read()
    return bd.loads(text)


def _max_slope_json(ms: bd.MaxSlope) -> dict:
    return {
        "value": ms.value.to_json(),
        "kind": ms.kind,
        "witness": [list(v) if isinstance(v, tuple) else v for v in ms.witness],
        "candidates": ms.candidates,
        "indeterminate": ms.indeterminate,
    }


def cmd_bundle(args) -> int:
    b = _load_bundle(args.file)
    action = args.action
    if action == "height":
        if not args.x:
            raise InputError("height needs --x, e.g. --x 1,0,0,-1")
        x = _rational_list(args.x)
        if len(x) != b.dim:
            raise InputError(f"vector has {len(x)} entries, bundle has dimension {b.dim}")
        if not any(x):
            raise InputError("the height of the zero vector is undefined")
        _emit(bd.height(b, x).to_json())
    elif action == "slope":
        _emit(bd.slope(b).to_json())
    elif action == "dual":
        _emit(bd.bundle_to_json(bd.dual(b)))
    elif action == "tensor":
        other = _load_bundle(args.other) if args.other else b
        _emit(bd.bundle_to_json(bd.tensor(b, other)))
    elif action in ("sym", "ext"):
        build = bd.sym_power if action == "sym" else bd.ext_power
        try:
            _emit(bd.bundle_to_json(build(b, args.l, cap=args.dimension_cap)))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    elif action == "minsearch":
        _emit(bd.min_search(b, args.radius, args.denom_bound).to_json())
    elif action == "maxslope":
        mode = args.mode or ("exact-split" if bd.split_detect(b).is_split else "search")
        _emit(_max_slope_json(bd.max_slope(b, mode)))
    return EXIT_OK


# --- verify ----------------------------------------------------------------------------------

def cmd_verify(args) -> int:
    changes: dict = {}
    if args.only:
        changes["only"] = tuple(s.strip() for s in args.only.split(",") if s.strip())
    for flag, name in (("seed", "seed"), ("radius", "search_radius"), ("precision_bits", "precision_bits"),
                       ("denom_bound", "denom_bound"), ("format", "output_format"), ("trials", "convexity_trials")):
        value = getattr(args, flag)
        if value is not None:
            changes[name] = value
    try:
        config = from_env().replace(**changes)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = run_all(config)
    text = report.render(config.output_format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    counts = report.counts()
    print(", ".join(f"{k}: {v}" for k, v in counts.items()), file=sys.stderr)
    return EXIT_VIOLATED if report.violated else EXIT_OK


# --- parser ----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adelic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pnl", help="lcm p(n, l) of the multinomial coefficients l!/i!")
    p.add_argument("n", type=int)
    p.add_argument("l", type=int)
    p.add_argument("--method", choices=("brute", "closed", "both"), default="closed")
    p.add_argument("--factored", action="store_true", help="print the prime factorization too")
    p.add_argument("--check", action="store_true", help="compute both ways and compare")
    p.set_defaults(func=cmd_pnl)

    p = sub.add_parser("pnl-grid", help="CSV table of p(n, l)")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--l-max", type=int, default=12)
    p.set_defaults(func=cmd_pnl_grid)

    p = sub.add_parser("gallery", help="emit a named bundle as JSON with expected values")
    p.add_argument("name", choices=("standard", "an", "eq", "mh"))
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--q", default="1/4")
    p.add_argument("--eps", default="1/100")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("bundle", help="operate on a bundle JSON file")
    p.add_argument("file")
    p.add_argument("action", choices=("height", "slope", "dual", "tensor", "sym", "ext", "minsearch", "maxslope"))
    p.add_argument("--x", help="comma-separated rational coordinates (height)")
    p.add_argument("--other", help="second bundle file (tensor; default: the bundle itself)")
    p.add_argument("--l", type=int, default=2, help="power (sym, ext)")
    p.add_argument("--radius", type=int, default=2, help="box radius (minsearch)")
    p.add_argument("--denom-bound", type=int, default=1, help="largest denominator (minsearch)")
    p.add_argument("--mode", choices=("exact-split", "search"), help="maxslope mode (default: by split detection)")
    p.add_argument("--dimension-cap", type=int, default=bd.DIMENSION_CAP)
    p.set_defaults(func=cmd_bundle)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--only", help="comma-separated statement-id prefixes, e.g. lcm,mh")
    p.add_argument("--seed", type=int)
    p.add_argument("--radius", type=int)
    p.add_argument("--denom-bound", type=int)
    p.add_argument("--precision-bits", type=int)
    p.add_argument("--trials", type=int, help="random trials for the convexity checks")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, AdelicError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
