"""Case enumeration and execution for the verification suites.

A case is a small picklable tuple; :func:`run_case` turns it into report
dictionaries.  In symbolic mode every letter carries its own generic label,
so one case covers every label assignment for every rank at once.  Concrete
mode enumerates the labels ``e1..eM, eb1..ebM`` instead.

Weights and windows in :class:`SuiteConfig` are ordinary half-integers; the
engine's doubled convention is applied here.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import product
from multiprocessing import Pool, TimeoutError as PoolTimeout
from typing import Iterator

from .algebra import (Q, c_rt_identity_check, comb_identity_check, enumerate_shuffles2,
                      enumerate_shuffles3, inversion_sign, random_table, shuffle_parity)
from .checks import (Report, axiom_d_derivative, axiom_grading, axiom_identity,
                     c_antisymmetry, c_g_check, d_comm_failure_repro,
                     exp_delta_commutator_check, weak_assoc_check, wick_check)
from .fock import WWord, basis_labels, velem
from .normal_order import normal_order_word, zero_nord
from .symbolic import SymLabel
from .vertex import clear_caches

SUITES = ("wick", "assoc", "shuffle", "crt", "nord", "axioms", "expdelta", "dcomm")

# per-suite defaults: (max weight, window)
DEFAULTS = {
    "wick": (Fraction(4), (Fraction(-6), Fraction(6))),
    "assoc": (Fraction(4), (Fraction(-8), Fraction(8))),
    "axioms": (Fraction(5, 2), (Fraction(-6), Fraction(6))),
    "expdelta": (Fraction(2), (Fraction(-6), Fraction(6))),
}
W_WEIGHT = 2          # test vectors of W
WICK_MAX_M = 1
EXPDELTA_MAX_M = 2


@dataclass(frozen=True)
class SuiteConfig:
    """Bounds and execution settings shared by all suites.

    ``max_weight`` and ``window`` left as ``None`` take each suite's own
    default.  For ``wick`` the weight bound is read as the number of letters
    ``r + s``.  ``budget`` is a wall-clock limit in seconds for one suite;
    cases not reached in time are reported with status ``timeout``.
    """

    M: int = 2
    max_weight: Fraction | None = None
    window: tuple | None = None
    seed: int = 0
    jobs: int = 1
    output: str | None = None
    symbolic: bool = True
    budget: float | None = None

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if self.window is not None and not self.window[0] <= self.window[1]:
            raise ValueError("window is empty")
        if self.max_weight is not None and (2 * Fraction(self.max_weight)).denominator != 1:
            raise ValueError("max weight must be a half-integer")

    def bounds(self, suite: str) -> tuple[Fraction, tuple[int, int]]:
        """Weight bound and doubled window for ``suite``."""
        weight, window = DEFAULTS.get(suite, (Fraction(0), (Fraction(0), Fraction(0))))
        if self.max_weight is not None:
            weight = Fraction(self.max_weight)
        if self.window is not None:
            window = self.window
        lo, hi = (Fraction(x) for x in window)
        return weight, (int(2 * lo), int(2 * hi))


# ------------------------------------------------------------------ shapes

def _shapes(max2: int, step, start: int) -> list[tuple]:
    """Index tuples, in every order, whose doubled weight ``sum(step)`` is at most ``max2``."""
    out: list[tuple] = []

    def rec(prefix, used):
        out.append(tuple(prefix))
        m = start
        while used + step(m) <= max2:
            rec(prefix + [m], used + step(m))
            m += 1

    rec([], 0)
    return out


def v_shapes(max_weight) -> list[tuple]:
    """Mode shapes ``(m_1, ..., m_k)`` of V words ``a_1(-m_1-1/2)...``.

    Words are free, so every order of the indices is its own shape; only the
    labels are left generic.
    """
    return _shapes(int(2 * Fraction(max_weight)), lambda m: 2 * m + 1, 0)


def w_shapes(max_weight) -> list[tuple]:
    """Shapes ``(k_1, ..., k_j)`` of W words ``b_1(-k_1)...u0``, in every order."""
    return _shapes(int(2 * Fraction(max_weight)), lambda k: 2 * k, 1)


def _v2(shape) -> int:
    return sum(2 * m + 1 for m in shape)


def instances(parts: tuple, cfg: SuiteConfig) -> Iterator[tuple]:
    """Labelled words for a tuple of mode shapes.

    Symbolic mode yields one instance with distinct generic labels, which
    specializes to every assignment, repeated letters included.  Concrete
    mode yields every assignment of basis labels.
    """
    total = sum(len(p) for p in parts)
    if cfg.symbolic:
        pools = [[SymLabel(i)] for i in range(total)]
    else:
        pools = [basis_labels(cfg.M)] * total
    for labels in product(*pools):
        out, pos = [], 0
        for shape in parts:
            out.append(tuple(zip(labels[pos:pos + len(shape)], shape)))
            pos += len(shape)
        yield tuple(out)


# ------------------------------------------------------------ enumeration

def suite_cases(name: str, cfg: SuiteConfig) -> list[tuple]:
    """The cases of one suite, cheapest first."""
    weight, _ = cfg.bounds(name)
    if name == "wick":
        cases = []
        for tot in range(int(weight) + 1):
            for r in range(tot + 1):
                for ms in product(range(WICK_MAX_M + 1), repeat=tot):
                    for ws in w_shapes(W_WEIGHT):
                        cases.append(("wick", r, ms, ws))
        return cases
    if name == "assoc":
        vs = v_shapes(weight)
        cases = [("assoc", a, b, c) for a in vs for b in vs if _v2(a) + _v2(b) <= 2 * weight
                 for c in w_shapes(W_WEIGHT)]
        cases.sort(key=lambda t: (len(t[1]) + len(t[2]) + len(t[3]), _v2(t[1]) + _v2(t[2]), t))
        return cases
    if name == "axioms":
        ws = w_shapes(W_WEIGHT)
        return ([("axioms.identity", c) for c in ws]
                + [("axioms", a, c) for a in v_shapes(weight) for c in ws])
    if name == "expdelta":
        return [("expdelta", m, a) for m in range(EXPDELTA_MAX_M + 1) for a in v_shapes(weight)]
    if name == "shuffle":
        cases = [("shuffle.comb", which, r, mu, nu)
                 for r in range(1, 6) for mu in range(r + 1) for nu in range(r - mu + 1)
                 for which in (1, 2, 3, 4, 5) if which <= 3 or nu == 0]
        cases += [("shuffle.parity", r) for r in range(8)]
        return cases
    if name == "crt":
        return ([("crt.rt", r, t) for r in range(7) for t in range(7)]
                + [("crt.g", m, n) for m in range(5) for n in range(5)]
                + [("crt.antisym", 12)])
    if name == "nord":
        return [("nord.examples",)] + [("nord.right", r) for r in range(7)]
    if name == "dcomm":
        return [("dcomm",)]
    raise ValueError(f"unknown suite {name!r}")


# -------------------------------------------------------------- execution

def _ok(suite: str, case: str, ok: bool, **details) -> dict:
    mismatch = details.pop("mismatch", {})
    return Report(suite, case, ok, None if ok else mismatch, details).to_json()


def run_case(case: tuple, cfg: SuiteConfig) -> list[dict]:
    kind = case[0]
    _, (lo, hi) = cfg.bounds(kind.split(".")[0])
    window = (lo, hi)
    out: list[dict] = []
    if kind == "wick":
        _, r, ms, ws = case
        for aw_bw, w in ((x[:2], x[2]) for x in instances((ms[:r], ms[r:], ws), cfg)):
            rep = wick_check(aw_bw[0], aw_bw[1], WWord(w, ()), window, cap=W_WEIGHT)
            rep.case = f"a={aw_bw[0]} b={aw_bw[1]} w={w}"
            out.append(rep.to_json())
    elif kind == "assoc":
        _, a, b, c = case
        for v1, v2, w in instances((a, b, c), cfg):
            rep = weak_assoc_check(v1, v2, WWord(w, ()), window)
            out.append(rep.to_json() | {"P": rep.P})
            clear_caches()
    elif kind == "axioms.identity":
        for (w,) in instances((case[1],), cfg):
            out.append(axiom_identity(WWord(w, ()), window).to_json())
    elif kind == "axioms":
        _, a, c = case
        for v, w in instances((a, c), cfg):
            ww = WWord(w, ())
            out.append(axiom_grading(v, ww, window).to_json())
            out.append(axiom_d_derivative(v, ww, window).to_json())
    elif kind == "expdelta":
        _, m, a = case
        for lab_word, v in instances(((0,), a), cfg):
            for rep in exp_delta_commutator_check(lab_word[0][0], m, velem(v), window):
                out.append(rep.to_json())
    elif kind == "shuffle.comb":
        _, which, r, mu, nu = case
        bad = [k for k in range(20)
               if not comb_identity_check(which, r, mu, nu,
                                          random_table(cfg.seed * 1000 + 2 * k),
                                          random_table(cfg.seed * 1000 + 2 * k + 1))]
        out.append(_ok("shuffle.comb", f"id={which},r={r},mu={mu},nu={nu}", not bad,
                       mismatch={"tables": bad}, tables=20))
    elif kind == "shuffle.parity":
        r = case[1]
        bad = [s.sequence() for mu in range(r + 1) for s in enumerate_shuffles2(r, mu)
               if shuffle_parity(s) != inversion_sign(s.sequence())]
        bad += [s.sequence() for mu in range(r + 1) for nu in range(r - mu + 1)
                for s in enumerate_shuffles3(r, mu, nu)
                if shuffle_parity(s) != inversion_sign(s.sequence())]
        out.append(_ok("shuffle.parity", f"r={r}", not bad, mismatch={"shuffle": bad[:1]}))
    elif kind == "crt.rt":
        _, r, t = case
        bad = [k for k in range(7) if not c_rt_identity_check(r, t, k)]
        out.append(_ok("crt.rt", f"r={r},t={t}", not bad, mismatch={"k": bad}))
    elif kind == "crt.g":
        _, m, n = case
        out.append(c_g_check(m, n, (-16, 16)).to_json())
    elif kind == "crt.antisym":
        top = case[1]
        bad = [(m, n) for m in range(top + 1) for n in range(top + 1) if not c_antisymmetry(m, n)]
        out.append(_ok("crt.antisym", f"m,n<={top}", not bad, mismatch={"pairs": bad[:1]}))
    elif kind == "nord.examples":
        out.extend(nord_examples())
    elif kind == "nord.right":
        r = case[1]
        labels = [tuple(SymLabel(i) for i in range(r))] if cfg.symbolic else \
            product(basis_labels(cfg.M), repeat=r)
        bad = [lab for lab in labels if zero_nord(lab) != zero_nord(lab, right=True)]
        out.append(_ok("nord.right", f"r={r}", not bad, mismatch={"word": repr(bad[:1])}))
    elif kind == "dcomm":
        out.append(d_comm_failure_repro().to_json())
    else:
        raise ValueError(f"unknown case {case!r}")
    return out


def nord_examples() -> list[dict]:
    """The two- and three-letter zero-mode expansions and the eight-letter word."""
    a1, a2, a3 = (SymLabel(i) for i in range(3))
    half = Q(1, 2)
    p = {(i, j): x.pair_with(y) for i, x in enumerate((a1, a2, a3))
         for j, y in enumerate((a1, a2, a3))}
    two = zero_nord((a1, a2))
    three = zero_nord((a1, a2, a3))
    want2 = {(a1, a2): 1, (): -half * p[0, 1]}
    want3 = {(a1, a2, a3): 1, (a1,): -half * p[1, 2], (a2,): half * p[0, 2],
             (a3,): -half * p[0, 1]}
    h = [SymLabel(10 + i) for i in range(9)]
    word = ((h[1], -1), (h[2], 2), (h[3], 3), (h[4], 0), (h[5], -5), (h[6], -6), (h[7], 0), (h[8], 8))
    eight = normal_order_word(word)
    blocks = (((h[1], -1), (h[5], -5), (h[6], -6)), ((h[2], 2), (h[3], 3), (h[8], 8)))
    want8 = {blocks + (((h[4], 0), (h[7], 0)),): 1,
             blocks + ((),): -half * h[4].pair_with(h[7])}
    return [_ok("nord.example", name, dict(got) == want, mismatch={"got": repr(dict(got))})
            for name, got, want in (("two zero modes", two, want2),
                                    ("three zero modes", three, want3),
                                    ("eight-letter word", eight, want8))]


def run_suite(name: str, cfg: SuiteConfig) -> Iterator[dict]:
    """Run every case of ``name`` (or of all suites for ``all``), yielding reports.

    With one job and no budget the cases run in this process in order.
    Otherwise a worker pool is used; results still arrive in case order, and
    at the deadline the pool is stopped and the rest marked ``timeout``.
    """
    names = SUITES if name == "all" else (name,)
    for nm in names:
        cases = suite_cases(nm, cfg)
        if cfg.jobs == 1 and cfg.budget is None:
            for case in cases:
                yield from run_case(case, cfg)
            continue
        yield from _pooled(nm, cases, cfg)


def _pooled(name: str, cases: list, cfg: SuiteConfig) -> Iterator[dict]:
    deadline = None if cfg.budget is None else time.monotonic() + cfg.budget
    pool = Pool(cfg.jobs)
    try:
        it = pool.imap(_worker, [(c, cfg) for c in cases], chunksize=1)
        for done, case in enumerate(cases):
            try:
                remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
                yield from it.next(remaining)
            except PoolTimeout:
                for rest in cases[done:]:
                    yield {"suite": name, "case": repr(rest[1:]), "status": "timeout",
                           "first_mismatch": None, "budget_s": cfg.budget}
                return
    finally:
        pool.terminate()
        pool.join()


def _worker(args) -> list[dict]:
    case, cfg = args
    return run_case(case, replace(cfg, jobs=1, budget=None))


def summarize(records: list[dict]) -> dict:
    """Counts per status and the overall verdict."""
    counts: dict = {}
    for rec in records:
        counts[rec["status"]] = counts.get(rec["status"], 0) + 1
    return {"counts": counts, "ok": bool(records) and set(counts) == {"pass"},
            "underflow": any(isinstance(r.get("first_mismatch"), dict)
                             and "underflow" in r["first_mismatch"] for r in records)}
