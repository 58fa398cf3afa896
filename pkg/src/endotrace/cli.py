"""Command-line entry point.

Exit status: 0 on success, 1 when a verified property fails, 2 on
malformed input (bad JSON, bad flags, objects that do not typecheck).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .endo import (EndoError, endo_from_json, frobenius, tuple_from_json, verschiebung,
                   verschiebung_tuple)
from .harness import HarnessError, SuiteConfig, parse_caps, run_suite
from .shadow import trace, trace_sequence
from .witt import (WittError, WittVector, base_from_json, ch, ghost, witt_add, witt_frobenius,
                   witt_mul, witt_verschiebung)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _dump(obj, path: Optional[str]) -> None:
    if path is None:
        return
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _print_shadow_map(label: str, g) -> None:
    print(f"{label}: <{_group(g.source.group)}> -> <{_group(g.target.group)}>")
    for row in g.matrix:
        print("  " + " ".join(str(int(x)) for x in row))


def _group(G) -> str:
    parts = ["Z" if d == 0 else f"Z/{d}" for d in G.invariant_factors]
    return " + ".join(parts) if parts else "0"


def _witt(path: str) -> WittVector:
    return WittVector.from_json(_load(path))


def _matrix(path: str):
    data = _load(path)
    if not isinstance(data, dict) or "matrix" not in data:
        raise InputError('matrix file needs {"base": ..., "matrix": [[...]]}')
    return base_from_json(data.get("base", "integers")), data["matrix"]


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args) -> int:
    config = SuiteConfig(seed=args.seed, cases=args.cases, caps=parse_caps(args.caps),
                         suite=args.suite)
    report = run_suite(config)
    print(report.human())
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.dumps() + "\n")
    return report.exit_code


def cmd_trace(args) -> int:
    f = endo_from_json(_load(args.input))
    if args.bound is None:
        g = trace(f)
        _print_shadow_map("tr", g)
        _dump(g.to_json(), args.json)
        return EXIT_OK
    seq = trace_sequence(f, args.bound)
    for k, g in enumerate(seq, start=1):
        _print_shadow_map(f"tr_{k}", g)
    _dump([g.to_json() for g in seq], args.json)
    return EXIT_OK


def cmd_frobenius(args) -> int:
    f = endo_from_json(_load(args.input))
    out = frobenius(f, args.n)
    _dump(out.to_json(), args.out)
    print(f"wrote exponent-{out.exponent} endomorphism to {args.out}")
    return EXIT_OK


def cmd_verschiebung(args) -> int:
    data = _load(args.input)
    if data.get("kind") == "tuple":
        t = tuple_from_json(data)
        if t.length != args.n:
            raise InputError(f"tuple has length {t.length}, not {args.n}")
        out = verschiebung_tuple(t)
    else:
        f = endo_from_json(data)
        if f.exponent != args.n:
            raise InputError(f"endomorphism has exponent {f.exponent}, not {args.n}")
        out = verschiebung(f)
    _dump(out.to_json(), args.out)
    print(f"wrote exponent-{out.exponent} endomorphism to {args.out}")
    return EXIT_OK


def cmd_ghost(args) -> int:
    if args.witt:
        w = _witt(args.witt)
    else:
        if args.bound is None:
            raise InputError("--matrix needs --bound")
        A, f = _matrix(args.matrix)
        w = ch(A, f, args.bound)
    g = ghost(w)
    print("ghost: " + " ".join(str(x) for x in g.scalars()))
    _dump(g.to_json(), args.json)
    return EXIT_OK


def cmd_ch(args) -> int:
    A, f = _matrix(args.matrix)
    w = ch(A, f, args.bound)
    print("ch: " + " ".join(str(x) for x in w.scalars()))
    _dump(w.to_json(), args.json)
    return EXIT_OK


def cmd_witt(args) -> int:
    a = _witt(args.a)
    if args.op in ("add", "mul"):
        if not args.b:
            raise InputError(f"witt {args.op} needs --b")
        b = _witt(args.b)
        out = witt_add(a, b) if args.op == "add" else witt_mul(a, b)
    else:
        if args.n is None:
            raise InputError(f"witt {args.op} needs -n")
        out = witt_frobenius(a, args.n) if args.op == "frob" else witt_verschiebung(a, args.n)
    print(f"{args.op}: " + " ".join(str(x) for x in out.scalars()))
    _dump(out.to_json(), args.json)
    return EXIT_OK


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="endotrace",
                                description="Twisted endomorphisms, their traces and Witt vectors.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("--suite", default="all")
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--cases", type=_positive, default=20)
    v.add_argument("--caps", nargs="*", default=[], metavar="NAME=VALUE")
    v.add_argument("--json")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("trace", help="trace (or trace sequence) of an endomorphism")
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--bound", type=_positive)
    t.add_argument("--json")
    t.set_defaults(func=cmd_trace)

    f = sub.add_parser("frobenius", help="k-Frobenius of an endomorphism")
    f.add_argument("--in", dest="input", required=True)
    f.add_argument("-n", type=_positive, required=True)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_frobenius)

    s = sub.add_parser("verschiebung", help="Verschiebung of an endomorphism or tuple")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("-n", type=_positive, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_verschiebung)

    g = sub.add_parser("ghost", help="ghost components of a Witt vector or a matrix")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--witt")
    src.add_argument("--matrix")
    g.add_argument("--bound", type=_positive)
    g.add_argument("--json")
    g.set_defaults(func=cmd_ghost)

    c = sub.add_parser("ch", help="characteristic series det(I - t f)^(-1)")
    c.add_argument("--matrix", required=True)
    c.add_argument("--bound", type=_positive, required=True)
    c.add_argument("--json")
    c.set_defaults(func=cmd_ch)

    w = sub.add_parser("witt", help="Witt vector arithmetic")
    w.add_argument("op", choices=["add", "mul", "frob", "versch"])
    w.add_argument("--a", required=True)
    w.add_argument("--b")
    w.add_argument("-n", type=_positive)
    w.add_argument("--json")
    w.set_defaults(func=cmd_witt)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags already; keep --help at 0
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InputError, HarnessError, EndoError, WittError, KeyError, TypeError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
