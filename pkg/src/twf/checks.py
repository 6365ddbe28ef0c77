"""Exact verification of the module axioms and the supporting identities.

Every check returns a report whose ``ok`` flag is true only when each
compared coefficient agrees exactly.  Mismatches carry the first offending
exponent tuple and both sides so that a failure can be read off directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import floor
from typing import Any

from .algebra import Q, Scalar, binom, binom_d, c_coeff
from .fock import LinComb, VElement, WElement, WWord, pair, v_weight2
from .normal_order import zero_nord
from .series import KernelSpec, Series, WindowUnderflow, kernel_coefficient
from .vertex import (_as_velem, _as_welem, actual_yw, d_v, exp_delta_series,
                     iterate_series, product_series, wick_lhs, wick_rhs)


@dataclass
class Report:
    """Outcome of one check on one case."""

    suite: str
    case: str
    ok: bool
    first_mismatch: dict | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"suite": self.suite, "case": self.case,
                "status": "pass" if self.ok else "fail",
                "first_mismatch": self.first_mismatch, **self.details}


def _show(value) -> Any:
    if isinstance(value, dict):
        return {repr(k): str(v) for k, v in value.items()}
    return str(value)


def compare_series(suite: str, case: str, lhs: Series, rhs: Series) -> Report:
    diff = lhs - rhs
    if diff.is_zero():
        return Report(suite, case, True)
    exps = min(e for e, c in diff.coeffs.items() if c)
    zero = WElement() if isinstance(next(iter(diff.coeffs.values())), dict) else 0
    return Report(suite, case, False, {"exps": list(exps),
                                       "lhs": _show(lhs.coeffs.get(exps, zero)),
                                       "rhs": _show(rhs.coeffs.get(exps, zero))})


# --------------------------------------------------------------- Wick check

def wick_check(aw: tuple, bw: tuple, w, window: tuple, cap: int | None = None) -> Report:
    """Product of two normal-ordered series against the contraction expansion.

    ``a_i`` sit in distinct variables ``x_i`` and ``b_j`` in ``y_j``; both
    sides are applied to ``w`` and truncated to output weight ``cap``.
    """
    r, s = len(aw), len(bw)
    lhs = wick_lhs(aw, bw, w, (window,) * r, (window,) * s, cap)
    rhs = wick_rhs(aw, bw, w, (window,) * r, (window,) * s, cap)
    return compare_series("wick", f"{aw}|{bw}|{w}", lhs, rhs)


# --------------------------------------------------- weak associativity

@dataclass
class AssocReport(Report):
    P: int = 0
    window: tuple = ()


def pole_order(v1, w) -> int:
    """The smallest integer above ``wt v1 + wt w``."""
    v1, w = _as_velem(v1), _as_welem(w)
    wt = max(Q(v_weight2(k), 2) for k in v1) + max(k.weight for k in w)
    return int(floor(wt)) + 1


def weak_assoc_check(v1: tuple, v2: tuple, w: WWord, window: tuple = (-16, 16),
                     P: int | None = None) -> AssocReport:
    """Weak associativity for basis words on a doubled window.

    The product ``Y(v1, x1) Y(v2, x2) w`` and the iterate
    ``Y(Y_V(v1, x0) v2, x2) w`` are computed on ``window`` in each variable.
    Both are multiplied by ``(x0 + x2)^{P + |v1|/2} x2^{|v2|/2}``: on the
    product side the power combines with ``Y(v1, x0 + x2)`` and is expanded in
    nonnegative powers of ``x2``, on the iterate side in nonnegative powers of
    ``x0``.  Every resulting coefficient in the window whose inputs are all
    known is compared; an input is known when it lies in the window or is
    zero by the grading.
    """
    bound = pole_order(v1, w)
    if P is None:
        P = bound
    elif P < bound:
        raise ValueError(f"P must be at least {bound}")
    wt1 = Q(v_weight2(v1), 2)
    wt2 = Q(v_weight2(v2), 2)
    wtw = w.weight
    q2 = 2 * P + (len(v1) & 1)          # doubled exponent of (x0 + x2)
    r2 = len(v2) & 1                    # doubled exponent of x2
    lo, hi = window
    name = f"{v1}|{v2}|{w}"
    e2min = -int(2 * (wt2 + wtw))       # Y(v2, x2) w vanishes below this
    e0min = -int(2 * (wt1 + wt2))       # Y_V(v1, x0) v2 vanishes below this

    def inside(e):
        return lo <= e <= hi

    def lhs_terms(a, b):
        k = 0
        out = []
        while b - r2 - 2 * k >= e2min:
            e1, e2 = a - q2 + 2 * k, b - r2 - 2 * k
            c = binom_d(a + 2 * k, k)
            if c:
                if not (inside(e1) and inside(e2)):
                    return None
                out.append((c, (e1, e2)))
            k += 1
        return out

    def rhs_terms(a, b):
        j = 0
        out = []
        while a - 2 * j >= e0min:
            e0, e2 = a - 2 * j, b - r2 - q2 + 2 * j
            c = binom_d(q2, j)
            if c:
                if not (inside(e0) and inside(e2)):
                    return None
                out.append((c, (e0, e2)))
            j += 1
        return out

    plan = []
    start = lo + (lo % 2)
    for a in range(start, hi + 1, 2):
        for b in range(start, hi + 1, 2):
            left, right = lhs_terms(a, b), rhs_terms(a, b)
            if left is not None and right is not None:
                plan.append((a, b, left, right))
    details = {"compared": len(plan)}
    if not plan:
        return AssocReport("assoc", name, False, {"underflow": "no coefficient is determined"},
                           details, P=P, window=window)
    # the coefficient at (A, B) has weight wt v1 + wt v2 + wt w + A + B - Q - R
    cap = int(floor(max(wt1 + wt2 + wtw + Q(a + b - q2 - r2, 2) for a, b, _, _ in plan)))
    prod = product_series(v1, v2, w, window, window, cap)
    it = iterate_series(v1, v2, w, window, window, cap)
    try:
        for a, b, left_terms, right_terms in plan:
            left = WElement()
            for c, e in left_terms:
                val = prod.coefficient_at(e, None)
                if val:
                    left = left + val.scale(c)
            right = WElement()
            for c, e in right_terms:
                val = it.coefficient_at(e, None)
                if val:
                    right = right + val.scale(c)
            if left != right:
                return AssocReport("assoc", name, False,
                                   {"exps": [a, b], "lhs": _show(left), "rhs": _show(right)},
                                   details, P=P, window=window)
    except WindowUnderflow as exc:
        return AssocReport("assoc", name, False, {"underflow": str(exc)}, details, P=P, window=window)
    return AssocReport("assoc", name, True, None, details, P=P, window=window)


# ------------------------------------------------------------- axiom suite

def axiom_identity(w, window: tuple) -> Report:
    ser = actual_yw(VElement({(): Q(1)}), w, window)
    expect = Series(1, (window,))
    expect.add_term((0,), WElement(_as_welem(w)))
    return compare_series("axioms.identity", repr(w), ser, expect)


def axiom_grading(v: tuple, w: WWord, window: tuple) -> Report:
    """Lower bound and homogeneity: ``x^E`` carries weight ``wt v + wt w + E``."""
    ser = actual_yw(v, w, window)
    wt2 = v_weight2(v) + 2 * w.weight
    for (e,), elem in sorted(ser.coeffs.items()):
        for word in elem:
            if word.weight < 0 or 2 * word.weight != wt2 + e:
                return Report("axioms.grading", f"{v}|{w}", False,
                              {"exps": [e], "lhs": str(word.weight), "rhs": str(Q(wt2 + e, 2))})
    return Report("axioms.grading", f"{v}|{w}", True)


def axiom_d_derivative(v: tuple, w: WWord, window: tuple) -> Report:
    """``Y_W(D_V v, y) = d/dy Y_W(v, y)`` coefficientwise."""
    lo, hi = window
    left = actual_yw(d_v(v), w, window)
    base = actual_yw(v, w, (lo + 2, hi + 2))
    right = Series(1, (window,))
    for (e,), elem in base.coeffs.items():
        right.add_term((e - 2,), elem.scale(Q(e, 2)))
    return compare_series("axioms.d_derivative", f"{v}|{w}", left, right)


# ----------------------------------------------- coefficient identities

def c_antisymmetry(m: int, n: int) -> bool:
    return c_coeff(m, n) == -c_coeff(n, m)


def c_g_sides(m: int, n: int, window: tuple) -> tuple[Series, Series]:
    """Both sides of the identity fixing ``C``: the iterate correction against
    ``g_{mn}(y + x, y)`` expanded in nonnegative powers of ``x``."""
    lo, hi = window
    lhs = Series(2, (window, window))
    e = -2 * (n + 1) - 2 * m
    if lo <= e <= hi:
        lhs.add_term((e, 0), binom(Q(-n - 1), m))
    p = 0
    while 2 * p <= hi:
        ye = -2 * (n + m + 1) - 2 * p
        if 2 * p >= lo and lo <= ye <= hi:
            lhs.add_term((2 * p, ye), c_coeff(n, p + m) * binom(Q(p + m), m))
        p += 1
    rhs = Series(2, (window, window))
    spec = KernelSpec("g", m, n, "yx", True)
    for xe in range(lo, hi + 1):
        for ye in range(lo, hi + 1):
            c = kernel_coefficient(spec, xe, ye)
            if c:
                rhs.add_term((xe, ye), c)
    return lhs, rhs


def c_g_check(m: int, n: int, window: tuple = (-16, 16)) -> Report:
    lhs, rhs = c_g_sides(m, n, window)
    return compare_series("cmn_g", f"m={m},n={n}", lhs, rhs)


# ----------------------------- commutator of exp(Delta) with creation series

def exp_delta_commutator_sides(label, m: int, v, window: tuple) -> tuple[Series, Series, Series]:
    """``[exp(Delta(y)), a^{(m)}(x)^-] v`` and its two closed forms.

    Variables are ``(x, y)``; all three series are exact on the window.
    """
    v = _as_velem(v)
    lo, hi = window
    ed = exp_delta_series(v)
    lhs = Series(2, (window, window))
    for a2 in range(lo, hi + 1, 2):
        k = a2 // 2 + m
        if k < 0:
            continue
        c = binom(Q(k), m)
        created = VElement()
        for word, cv in v.items():
            created.add_term(((label, k),) + word, cv)
        for (ye,), elem in exp_delta_series(created).coeffs.items():
            if lo <= ye <= hi:
                lhs.add_term((a2, ye), elem.scale(c))
        for (ye,), elem in ed.coeffs.items():
            if lo <= ye <= hi:
                moved = VElement({((label, k),) + word: d for word, d in elem.items()})
                lhs.add_term((a2, ye), moved.scale(-c))
    # annihilation indices that can act: beta at most the largest mode present
    top = max((mm for word in ed.coeffs.values() for w in word for _, mm in w), default=-1)
    with_c = Series(2, (window, window))
    with_g = Series(2, (window, window))
    for (e,), elem in ed.coeffs.items():
        for beta in range(top + 1):
            acted = VElement()
            for word, cw in elem.items():
                for d, nw in _annihilate(label, beta, word):
                    acted.add_term(nw, cw * d)
            if not acted:
                continue
            for a2 in range(lo, hi + 1, 2):
                alpha = a2 // 2 + m
                if alpha >= 0:
                    ye = e - 2 * (beta + alpha + 1)
                    coef = c_coeff(beta, alpha) * binom(Q(alpha), m)
                    if coef and lo <= ye <= hi:
                        with_c.add_term((a2, ye), acted.scale(coef))
                for ye in range(lo, hi + 1, 2):
                    kc = kernel_coefficient(KernelSpec("g", m, beta, "yx", True), a2, ye - e)
                    if a2 == -2 * (beta + 1 + m) and ye == e:
                        kc -= binom(Q(-beta - 1), m)
                    if kc:
                        with_g.add_term((a2, ye), acted.scale(kc))
    return lhs, with_c, with_g


def _annihilate(label, beta: int, word: tuple):
    from .fock import vmode_on_word
    return vmode_on_word(label, 2 * beta + 1, word)


def exp_delta_commutator_check(label, m: int, v, window: tuple = (-12, 12)) -> list[Report]:
    lhs, with_c, with_g = exp_delta_commutator_sides(label, m, v, window)
    case = f"{label},m={m},{v}"
    return [compare_series("exp_delta_comm.C", case, lhs, with_c),
            compare_series("exp_delta_comm.g", case, lhs, with_g)]


# ---------------------------------------------- the D-commutator obstruction

def _mode_class(n: int) -> int:
    return 0 if n < 0 else (1 if n > 0 else 2)


def normal_order_product(letters: tuple, clifford: bool = False) -> LinComb:
    """Rewrite a plain product of W modes in the normal-ordered basis.

    Keys are letter tuples in canonical order: negative block, positive
    block, zero block, the first two sorted (they anticommute inside the
    normal ordering) and the zero block kept as written.  Nonzero modes
    anticommute up to ``(a, b) delta_{m+n,0}``; a nonzero mode anticommutes
    with a zero mode.  Zero modes obey no relation unless ``clifford`` is set,
    in which case ``a(0) b(0) + b(0) a(0) = (a, b)`` is imposed as well.
    """
    out = LinComb()
    _reduce(tuple(letters), Q(1), out, clifford)
    return out


def _reduce(letters: tuple, coeff, out: LinComb, clifford: bool) -> None:
    for i in range(len(letters) - 1):
        (a, m), (b, n) = letters[i], letters[i + 1]
        ca, cb = _mode_class(m), _mode_class(n)
        if ca > cb:
            swapped = letters[:i] + (letters[i + 1], letters[i]) + letters[i + 2:]
            _reduce(swapped, -coeff, out, clifford)
            if m + n == 0 and m != 0:
                p = pair(a, b)
                if p:
                    _reduce(letters[:i] + letters[i + 2:], coeff * p, out, clifford)
            return
    # classes are now ordered: sort the nonzero blocks with signs
    neg = [x for x in letters if x[1] < 0]
    pos = [x for x in letters if x[1] > 0]
    zer = [x for x in letters if x[1] == 0]
    sign = _sort_sign(neg) * _sort_sign(pos)
    coeff = coeff * sign
    neg.sort(key=_letter_key)
    pos.sort(key=_letter_key)
    zlabels = tuple(lab for lab, _ in zer)
    if clifford:
        zsign, zlabels, extra = _clifford_sort(zlabels)
        for c, rest in extra:
            for key, d in _plain_zero_to_nord(rest).items():
                out.add_term(tuple(neg) + tuple(pos) + tuple((lab, 0) for lab in key), coeff * c * d)
        coeff = coeff * zsign
    for key, d in _plain_zero_to_nord(zlabels).items():
        out.add_term(tuple(neg) + tuple(pos) + tuple((lab, 0) for lab in key), coeff * d)


def _letter_key(x):
    return (str(x[0]), x[1])


def _sort_sign(block: list) -> int:
    keys = [_letter_key(x) for x in block]
    inv = sum(1 for i in range(len(keys)) for j in range(i + 1, len(keys)) if keys[i] > keys[j])
    return -1 if inv & 1 else 1


def _clifford_sort(labels: tuple):
    """Sort zero-mode labels with ``ab = (a, b) - ba``; returns sign, sorted word
    and the lower-order plain words produced by the contractions."""
    extra = []
    cur = list(labels)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(cur) - 1):
            if str(cur[i]) > str(cur[i + 1]):
                p = pair(cur[i], cur[i + 1])
                if p:
                    extra.append((sign * p, tuple(cur[:i] + cur[i + 2:])))
                cur[i], cur[i + 1] = cur[i + 1], cur[i]
                sign = -sign
                changed = True
    return sign, tuple(cur), extra


def _plain_zero_to_nord(labels: tuple) -> LinComb:
    """Inverse of the zero-mode normal ordering: a plain product in the ``: :`` basis."""
    out = LinComb()
    out.add_term(labels, Q(1))
    for key, c in zero_nord(labels).items():
        if key == labels:
            continue
        for k2, d in _plain_zero_to_nord(key).items():
            out.add_term(k2, -c * d)
    return out


def d_commutator(letters: tuple) -> LinComb:
    """``[D, product of modes]`` under ``[D, a(n)] = (-n + 1/2) a(n - 1)``, as plain words."""
    out = LinComb()
    for i, (lab, n) in enumerate(letters):
        out.add_term(letters[:i] + ((lab, n - 1),) + letters[i + 1:], Q(-2 * n + 1, 2))
    return out


def canonical_nord(letters: tuple) -> tuple[int, tuple]:
    """Sign and canonical key of a normal-ordered monomial ``: letters :``."""
    neg = [x for x in letters if x[1] < 0]
    pos = [x for x in letters if x[1] > 0]
    zer = [x for x in letters if x[1] == 0]
    order = neg + pos + zer
    idx = [letters.index(x) for x in order]
    inv = sum(1 for i in range(len(idx)) for j in range(i + 1, len(idx)) if idx[i] > idx[j])
    sign = (-1 if inv & 1 else 1) * _sort_sign(neg) * _sort_sign(pos)
    return sign, tuple(sorted(neg, key=_letter_key)) + tuple(sorted(pos, key=_letter_key)) + tuple(zer)


def nord_combination(terms) -> LinComb:
    """Build a combination from ``(coeff, letters)`` of normal-ordered monomials."""
    out = LinComb()
    for c, letters in terms:
        s, key = canonical_nord(tuple(letters))
        out.add_term(key, c * s)
    return out


@dataclass
class DCommReport:
    computed: LinComb
    displayed: LinComb
    matches_display: bool
    obstruction: Scalar
    clifford: LinComb
    clifford_obstruction: Scalar

    def to_json(self) -> dict:
        def fmt(lc):
            return {" ".join(f"{a}({n})" for a, n in k): str(c) for k, c in sorted(lc.items(), key=str)}
        return {"suite": "dcomm", "case": "a1=e1,a2=eb1",
                "status": "pass" if self.matches_display else "fail",
                "computed": fmt(self.computed), "displayed": fmt(self.displayed),
                "obstruction_coefficient": str(self.obstruction),
                "clifford": fmt(self.clifford),
                "clifford_obstruction_coefficient": str(self.clifford_obstruction)}


def d_comm_failure_repro(a1: str = "e1", a2: str = "eb1") -> DCommReport:
    """The bracket of the hypothetical ``D_W`` with a piece of ``:a1(x) a2(x):``.

    ``:a1(1) a2(0) + a1(0) a2(1):`` is rewritten as the plain product
    ``-a2(0) a1(1) + a1(0) a2(1)``, bracketed with ``D`` and normal ordered.
    The result is compared with the four-term form that a derivation would need,
    ``-1/2 :a1(1)a2(-1): + 1/2 :a1(-1)a2(1): - 1/2 :a2(0)a1(0): - 1/2 :a1(0)a2(0):``.
    """
    half = Q(1, 2)
    start = [(-1, ((a2, 0), (a1, 1))), (1, ((a1, 0), (a2, 1)))]
    brackets = LinComb()
    for c, word in start:
        for w2, d in d_commutator(word).items():
            brackets.add_term(w2, c * d)

    def order(clifford):
        out = LinComb()
        for word, c in brackets.items():
            for key, d in normal_order_product(word, clifford).items():
                out.add_term(key, c * d)
        return out

    computed = order(False)
    displayed = nord_combination([(-half, ((a1, 1), (a2, -1))), (half, ((a1, -1), (a2, 1))),
                                  (-half, ((a2, 0), (a1, 0))), (-half, ((a1, 0), (a2, 0)))])
    clifford = order(True)
    key = ((a2, 0), (a1, 0))
    return DCommReport(computed, displayed, computed == displayed,
                       computed.get(key, Q(0)), clifford, clifford.get(key, Q(0)))
