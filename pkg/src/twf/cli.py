"""Command line: verification suites, coefficient dumps and correlator records.

Results go out as JSON lines.  Settings come from flags, then ``TWF_*``
environment variables, then defaults.

Exit codes: 0 success, 1 a check failed or ran out of time, 2 a window was
too small to decide a check, 64 bad usage or unparsable input, 65 a point
outside the allowed region (always for poles, otherwise with ``--strict``).
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from contextlib import contextmanager
from fractions import Fraction

from .analysis import RegionError, correlate
from .fock import WordParseError, WWord, element_to_json, parse_vword, parse_wword
from .suites import SUITES, SuiteConfig, run_suite, summarize
from .vertex import actual_yw

EXIT_FAIL, EXIT_UNDERFLOW, EXIT_USAGE, EXIT_REGION = 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_window(text: str) -> tuple[Fraction, Fraction]:
    """``-8,8``, ``[-8, 8]`` or ``-7/2:7/2`` as a pair of half-integers."""
    m = re.fullmatch(r"\s*\[?\s*([-+]?\d+(?:/\d+)?)\s*[,:]\s*([-+]?\d+(?:/\d+)?)\s*\]?\s*", text)
    if not m:
        raise UsageError(f"cannot read window {text!r}")
    lo, hi = Fraction(m.group(1)), Fraction(m.group(2))
    if (2 * lo).denominator != 1 or (2 * hi).denominator != 1:
        raise UsageError("window ends must be half-integers")
    if lo > hi:
        raise UsageError("window is empty")
    return lo, hi


def parse_halfint(text: str) -> Fraction:
    try:
        x = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None
    if (2 * x).denominator != 1:
        raise UsageError(f"not a half-integer: {text!r}")
    return x


def _setting(args, name: str, env: str, conv, default):
    value = getattr(args, name, None)
    if value is not None:
        return conv(value) if isinstance(value, str) else value
    if env in os.environ:
        return conv(os.environ[env])
    return default


def config_from(args) -> SuiteConfig:
    window = _setting(args, "window", "TWF_WINDOW", parse_window, None)
    budget = _setting(args, "budget", "TWF_BUDGET", float, None)
    try:
        return SuiteConfig(
            M=_setting(args, "M", "TWF_M", int, 2),
            max_weight=_setting(args, "max_weight", "TWF_MAX_WEIGHT", parse_halfint, None),
            window=window,
            seed=_setting(args, "seed", "TWF_SEED", int, 0),
            jobs=_setting(args, "jobs", "TWF_JOBS", int, 1),
            output=_setting(args, "out", "TWF_OUT", str, None),
            symbolic=not args.concrete,
            budget=budget,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


@contextmanager
def _sink(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _emit(fh, record: dict) -> None:
    fh.write(json.dumps(record, default=str) + "\n")
    fh.flush()


# ---------------------------------------------------------------- commands

def cmd_suite(args) -> int:
    cfg = config_from(args)
    records = []
    with _sink(cfg.output) as fh:
        for rec in run_suite(args.name, cfg):
            records.append(rec)
            _emit(fh, rec)
    summary = summarize(records)
    print(json.dumps({"suite": args.name, **summary}), file=sys.stderr)
    if summary["underflow"]:
        return EXIT_UNDERFLOW
    return 0 if summary["ok"] else EXIT_FAIL


def _w_basis_word(text: str) -> WWord:
    elem = parse_wword(text)
    if len(elem) != 1 or next(iter(elem.values())) != 1:
        raise UsageError(f"{text!r} is not a single basis word")
    return next(iter(elem))


def cmd_coeff(args) -> int:
    v = parse_vword(args.v)
    w = parse_wword(args.w)
    lo, hi = parse_window(args.window) if args.window else (Fraction(-4), Fraction(4))
    window = (int(2 * lo), int(2 * hi))
    ser = actual_yw(v, w, window)
    rows = [{"exponent": str(Fraction(e, 2)), "coefficient": element_to_json(elem)}
            for (e,), elem in sorted(ser.coeffs.items()) if elem]
    with _sink(args.out) as fh:
        _emit(fh, {"v": args.v, "w": args.w, "window": [str(lo), str(hi)], "table": rows})
    return 0


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


def cmd_correlate(args) -> int:
    v1, v2 = parse_vword(args.v1), parse_vword(args.v2)
    w, wprime = _w_basis_word(args.w), _w_basis_word(args.wprime)
    z1, z2 = _complex(args.z1), _complex(args.z2)
    strict = args.strict or os.environ.get("TWF_STRICT", "") not in ("", "0")
    try:
        rec = correlate(v1, v2, w, wprime, z1, z2, args.p, args.cutoff, strict=strict)
    except RegionError as exc:
        print(f"region error: {exc}", file=sys.stderr)
        return EXIT_REGION
    with _sink(args.out) as fh:
        _emit(fh, rec)
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twf", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("suite", help="run a verification suite")
    s.add_argument("name", choices=SUITES + ("all",))
    s.add_argument("--M", type=int, help="rank for concrete labels (default 2)")
    s.add_argument("--max-weight", dest="max_weight", help="weight bound, e.g. 5/2")
    s.add_argument("--window", help="exponent window, e.g. --window=-8,8")
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int)
    s.add_argument("--budget", help="seconds per suite before the rest is marked timeout")
    s.add_argument("--out", help="write JSON lines here instead of stdout")
    s.add_argument("--concrete", action="store_true",
                   help="enumerate basis labels instead of generic ones")
    s.add_argument("--strict", action="store_true", help="accepted for uniformity")
    s.set_defaults(func=cmd_suite)

    c = sub.add_parser("coeff", help="dump Y_W(v, x) w on a window")
    c.add_argument("v", help='V word such as "e1(-1/2)eb1(-3/2)" or "1"')
    c.add_argument("w", help='W word such as "e1(-1)u0"')
    c.add_argument("--window", help="exponent window, default -4,4")
    c.add_argument("--out")
    c.set_defaults(func=cmd_coeff)

    r = sub.add_parser("correlate", help="evaluate a two-point correlator at (z1, z2)")
    for name in ("v1", "v2", "w", "wprime"):
        r.add_argument(name)
    r.add_argument("z1")
    r.add_argument("z2")
    r.add_argument("p", type=int)
    r.add_argument("--cutoff", type=int, default=60)
    r.add_argument("--strict", action="store_true")
    r.add_argument("--out")
    r.set_defaults(func=cmd_correlate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, WordParseError) as exc:
        print(f"twf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
