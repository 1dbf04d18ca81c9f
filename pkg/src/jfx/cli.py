"""Command-line entry point: ``jfx algebra``, ``jfx eval`` and ``jfx verify``.

Exit codes: 0 pass, 1 identity failure, 2 usage or domain error, 3 numeric
non-convergence. Reports are JSON lines (or CSV with ``--csv``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np
from gmpy2 import mpq

from . import bessel as B
from . import errors
from .jordan import get_algebra
from .polyengine import as_partition, check_wallach, engine
from .suites import SUITES, SuiteSpec, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
CONVERGENCE_ERRORS = (errors.NotConverged, errors.QuadratureNotConverged)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- parsing

def parse_rational(text: str):
    try:
        return mpq(text.strip())
    except ValueError as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def parse_lambdas(text: str | None) -> list | None:
    if text is None:
        return None
    return [parse_rational(t) for t in text.split(",") if t.strip()]


def parse_partition(text: str | None) -> tuple | None:
    if text is None:
        return None
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"not a partition: {text!r}") from exc


def parse_point(alg, text: str, real: bool = False) -> np.ndarray:
    """r entries are frame eigen-coordinates; n entries are basis coordinates."""
    try:
        vals = [complex(t.strip().replace("i", "j")) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"not a point: {text!r}") from exc
    if real and any(v.imag for v in vals):
        raise UsageError("this argument must be real")
    if len(vals) == alg.r:
        fr = [np.asarray(c, dtype=float) for c in alg.frame]
        x = sum(v * c for v, c in zip(vals, fr))
    elif len(vals) == alg.n:
        x = np.array(vals)
    else:
        raise UsageError(f"a point needs {alg.r} eigen-coordinates or {alg.n} coordinates")
    return x.real if real else x


def _json_value(v) -> object:
    v = complex(v)
    return [v.real, v.imag] if v.imag else v.real


# --------------------------------------------------------------- commands

def cmd_algebra(args) -> int:
    alg = get_algebra(args.kind)
    print(alg.catalog_json())
    return EXIT_OK


def cmd_eval(args) -> int:
    alg = get_algebra(args.algebra)
    lam = parse_rational(args.lam) if args.lam is not None else None
    fn = args.fn
    out = {"fn": fn, "algebra": alg.name, "lambda": None if lam is None else str(lam)}
    if fn in ("J", "I"):
        if lam is None or args.z is None or args.w is None:
            raise UsageError(f"eval {fn} needs --lambda, --z and --w")
        check_wallach(alg, lam)
        z = parse_point(alg, args.z)
        w = B.factored(alg, parse_point(alg, args.w, real=True))
        res = (B.bessel_J if fn == "J" else B.bessel_I)(alg, lam, z, w)
        out.update(value=_json_value(res.value), tail_estimate=res.tail_estimate,
                   shells_used=res.shells_used)
    elif fn in ("K", "omega"):
        if lam is None:
            raise UsageError(f"eval {fn} needs --lambda")
        check_wallach(alg, lam)
        if fn == "K":
            if args.x is None:
                raise UsageError("eval K needs --x")
            x = parse_point(alg, args.x, real=True)
            k = check_wallach(alg, lam)
            val = B.bessel_K_boundary(alg, lam, x) if k is not None and k < alg.r else B.bessel_K(alg, lam, x)
        else:
            if args.z is None:
                raise UsageError("eval omega needs --z (eigen-coordinates of |z|)")
            a = parse_point(alg, args.z, real=True)
            val = B.omega(alg, lam, B.factored(alg, a))
        out.update(value=float(val), exact=False)
    elif fn == "phi":
        m = as_partition(alg, parse_partition(args.m) or (0,))
        phi = engine(alg).spherical_phi(m)
        if args.z is None:
            z = np.asarray(alg.unit, dtype=complex)
        else:
            z = parse_point(alg, args.z)
        out.update(m=list(m.parts), value=_json_value(phi.eval_many(z[None, :])[0]),
                   exact=phi.is_exact())
    elif fn == "laguerre":
        if lam is None or args.x is None:
            raise UsageError("eval laguerre needs --lambda and --x")
        check_wallach(alg, lam)
        m = as_partition(alg, parse_partition(args.m) or (0,))
        x = parse_point(alg, args.x, real=True)
        out.update(m=list(m.parts), value=engine(alg).laguerre_func_value(m, lam, x), exact=False)
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def _csv_text(records: list) -> str:
    keys = sorted({k for r in records for k in r})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def render_report(records: list, as_csv: bool = False) -> str:
    if as_csv:
        return _csv_text(records)
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def summary(suite: str, records: list) -> dict:
    failed = sum(1 for r in records if not r["ok"])
    return {"suite": suite, "summary": True, "records": len(records), "failed": failed, "ok": failed == 0}


def cmd_verify(args) -> int:
    spec = SuiteSpec(
        suite=args.suite, algebra=args.algebra, lambdas=parse_lambdas(args.lam),
        max_weight=args.max_weight, tol=args.tol, seed=args.seed, n=args.n, m=args.split,
        cap=args.cap, partition=parse_partition(args.m),
    )
    records = run(spec)
    summ = summary(spec.suite, records)
    text = render_report(records + ([] if args.csv else [summ]), args.csv)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.out:
        print(json.dumps(summ, sort_keys=True))
    return EXIT_OK if summ["ok"] else EXIT_FAIL


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jfx", description="Jordan-algebra Fock model computations and identity checks.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    a = sub.add_parser("algebra", help="print a catalog entry")
    a.add_argument("kind")
    a.set_defaults(func=cmd_algebra)

    e = sub.add_parser("eval", help="evaluate a special function")
    e.add_argument("fn", choices=["J", "I", "K", "omega", "phi", "laguerre"])
    e.add_argument("--algebra", default="real")
    e.add_argument("--lambda", dest="lam")
    e.add_argument("--z")
    e.add_argument("--w")
    e.add_argument("--x")
    e.add_argument("--m", help="partition, comma separated")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run an identity suite")
    v.add_argument("suite")
    v.add_argument("--algebra")
    v.add_argument("--lambda", dest="lam", help="comma separated rationals")
    v.add_argument("--m", help="partition, comma separated (or split index for branching)")
    v.add_argument("--tol", type=float)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--max-weight", type=int)
    v.add_argument("--out")
    v.add_argument("--csv", action="store_true")
    v.add_argument("--n", type=int)
    v.add_argument("--cap", type=int, default=4)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "verify":
            if args.suite not in SUITES:
                raise UsageError(f"unknown suite {args.suite!r}; expected one of {', '.join(SUITES)}")
            # for branching --m is the split index
            args.split = None
            if args.suite == "branching" and args.m is not None:
                try:
                    args.split = int(args.m)
                except ValueError as exc:
                    raise UsageError("branching --m takes an integer") from exc
                args.m = None
        return args.func(args)
    except UsageError as exc:
        print(f"jfx: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CONVERGENCE_ERRORS as exc:
        print(f"jfx: no convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (errors.JFXError, ValueError) as exc:
        print(f"jfx: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
