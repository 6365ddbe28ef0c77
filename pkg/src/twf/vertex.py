"""Vertex operators on ``W`` and ``V``, products, iterates and their closed forms.

Windows are doubled ``(lo, hi)`` pairs.  Every function that produces a
series returns exactly the coefficients inside the window it was asked for;
``cap`` optionally drops output components of weight above a bound, which is
the same as pairing with every basis vector of weight at most ``cap``.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from math import floor

from .algebra import Q, Scalar, binom, binom_d, c_coeff, inversion_sign
from .fock import VElement, WElement, WWord, apply_vmode, pair, v_weight2
from .normal_order import nord_apply
from .series import KernelSpec, Series, kernel_coefficient


def _as_welem(w) -> WElement:
    if isinstance(w, WWord):
        return WElement({w: Q(1)})
    return w


def _as_velem(v) -> VElement:
    if isinstance(v, tuple):
        return VElement({v: Q(1)})
    return v


def w_weight_max(w: WElement) -> int:
    return max((k.weight for k in w), default=0)


def _sign(k: int) -> int:
    return -1 if k & 1 else 1


# ------------------------------------------------------------ naive operator

def naive_yw(v, w, window: tuple, cap: int | None = None) -> Series:
    """``Ybar_W(v, x) w`` on a one-variable window ``(lo, hi)`` (doubled)."""
    out = Series(1, (window,))
    v = _as_velem(v)
    w = _as_welem(w)
    for vword, cv in v.items():
        letters = tuple((lab, m, 0) for lab, m in vword)
        for wword, cw in w.items():
            for exps, elem in nord_apply(letters, wword, (window,), cap).items():
                out.add_term(exps, elem.scale(cv * cw))
    return out


# --------------------------------------------------------- exp(Delta) on V

def total_contraction(letters: tuple, idx: tuple):
    """Total contraction number of the positions ``idx`` (0-based) of a V word.

    Expands along the first position: ``T(i_1..i_2t) = sum_k (-1)^k <i_1, i_k> T(rest)``
    with ``k`` counted from 1 inside ``idx``.
    """
    if len(idx) % 2:
        raise ValueError("total contraction needs an even number of positions")
    return _tc(tuple(letters[i] for i in idx))


@lru_cache(maxsize=1 << 16)
def _tc(sub: tuple):
    if not sub:
        return Q(1)
    if len(sub) % 2:
        return Q(0)
    a, ma = sub[0]
    total = 0
    for k in range(2, len(sub) + 1):
        b, mb = sub[k - 1]
        p = pair(a, b)
        if not p:
            continue
        c = c_coeff(ma, mb)
        if not c:
            continue
        rest = sub[1:k - 1] + sub[k:]
        t = _tc(rest)
        if t:
            total = total + _sign(k) * p * c * t
    return total


def total_contraction_along(letters: tuple, idx: tuple, row: int = -1):
    """The same number expanded along an arbitrary position ``row`` of ``idx``.

    This is the Pfaffian row expansion; it gives an evaluation path independent
    of the memoized first-position recursion.
    """
    sub = tuple(letters[i] for i in idx)
    if len(sub) % 2:
        raise ValueError("total contraction needs an even number of positions")

    def rec(seq, row):
        n = len(seq)
        if not n:
            return Q(1)
        i = row % n
        a, ma = seq[i]
        total = 0
        for j in range(n):
            if j == i:
                continue
            b, mb = seq[j]
            p = pair(a, b)
            if not p:
                continue
            # entry A_ij = (a_i, a_j) C_{m_i m_j}; 1-based sign (-1)^{i+j+1+[i>j]}
            sgn = _sign(i + j + 1 + (1 if i > j else 0))
            rest = seq[:min(i, j)] + seq[min(i, j) + 1:max(i, j)] + seq[max(i, j) + 1:]
            total = total + sgn * p * c_coeff(ma, mb) * rec(rest, row)
        return total

    return rec(sub, row)


@lru_cache(maxsize=1 << 14)
def exp_delta(vword: tuple) -> tuple:
    """``exp(Delta(x))`` on a V basis word as ``((exp2, coeff, word), ...)``.

    Each even-size set of positions is erased with coefficient
    ``(-1)^(sum of positions) T(positions)`` and weight ``x^{-sum m - t}``.
    """
    r = len(vword)
    out = []
    for size in range(0, r + 1, 2):
        for idx in combinations(range(r), size):
            t = total_contraction(vword, idx) if size else Q(1)
            if not t:
                continue
            sgn = _sign(sum(i + 1 for i in idx))
            e2 = -2 * (sum(vword[i][1] for i in idx) + size // 2)
            rest = tuple(vword[i] for i in range(r) if i not in idx)
            out.append((e2, sgn * t, rest))
    return tuple(out)


def exp_delta_series(v) -> Series:
    v = _as_velem(v)
    out = Series(1, ((None, None),))
    for word, c in v.items():
        for e2, t, rest in exp_delta(word):
            out.add_term((e2,), VElement({rest: c * t}))
    return out


# ----------------------------------------------------------- actual operator

def actual_yw(v, w, window: tuple, cap: int | None = None) -> Series:
    """``Y_W(v, x) w = Ybar_W(exp(Delta(x)) v, x) w`` on a window."""
    lo, hi = window
    out = Series(1, (window,))
    v = _as_velem(v)
    w = _as_welem(w)
    for vword, cv in v.items():
        for e2, t, rest in exp_delta(vword):
            sub = (None if lo is None else lo - e2, None if hi is None else hi - e2)
            letters = tuple((lab, m, 0) for lab, m in rest)
            for wword, cw in w.items():
                for (x,), elem in nord_apply(letters, wword, (sub,), cap).items():
                    out.add_term((x + e2,), elem.scale(cv * cw * t))
    return out


# ---------------------------------------------------------------- Y_V on V

def _det(matrix: list) -> object:
    n = len(matrix)
    total = 0
    for perm in permutations(range(n)):
        term = inversion_sign(perm)
        for i in range(n):
            term = term * matrix[i][perm[i]]
            if not term:
                break
        if term:
            total = total + term
    return total


def y_v(v, target, hi: int) -> Series:
    """``Y_V(v, x) target`` for exponents up to ``hi`` (doubled, integral powers).

    A sum over matched index sets: each gives a sign, a determinant of
    ``(a_i, b_j) (x^{-n_j-1})^{(m_i)}`` and the unmatched ``a``'s acting through
    their creation series on the unmatched ``b`` word.
    """
    v = _as_velem(v)
    target = _as_velem(target)
    out = Series(1, ((None, hi),))
    for aw, ca in v.items():
        for bw, cb in target.items():
            for e2, c, word in _y_v_words(aw, bw, hi):
                out.add_term((e2,), VElement({word: ca * cb * c}))
    return out


@lru_cache(maxsize=1 << 14)
def _y_v_words(aw: tuple, bw: tuple, hi: int) -> tuple:
    r, s = len(aw), len(bw)
    acc: dict = {}
    for rho in range(0, min(r, s) + 1):
        sgn_rho = _sign(r * rho + rho * (rho + 1) // 2)
        for ii in combinations(range(r), rho):
            for jj in combinations(range(s), rho):
                sgn = sgn_rho * _sign(sum(i + 1 for i in ii) + sum(j + 1 for j in jj))
                if rho:
                    mat = [[pair(aw[i][0], bw[j][0]) * binom(Q(-bw[j][1] - 1), aw[i][1])
                            for j in jj] for i in ii]
                    det = _det(mat)
                    if not det:
                        continue
                else:
                    det = Q(1)
                base = -2 * (sum(bw[j][1] for j in jj) + rho + sum(aw[i][1] for i in ii))
                rest_a = [aw[i] for i in range(r) if i not in ii]
                rest_b = tuple(bw[j] for j in range(s) if j not in jj)
                for e2, c, prefix in _creation(tuple(rest_a), hi - base):
                    key = (base + e2, prefix + rest_b)
                    val = acc.get(key, 0) + sgn * det * c
                    if val:
                        acc[key] = val
                    else:
                        acc.pop(key, None)
    return tuple((e2, c, word) for (e2, word), c in acc.items())


def _creation(letters: tuple, budget2: int):
    """``a_1^{(m_1)}(x)^- ... a_k^{(m_k)}(x)^-`` as prefixes with x-powers up to ``budget2``."""
    if budget2 < 0:
        return
    if not letters:
        yield 0, Q(1), ()
        return
    (lab, m), rest = letters[0], letters[1:]
    kk = m
    while 2 * (kk - m) <= budget2:
        c = binom(Q(kk), m)
        for e2, d, prefix in _creation(rest, budget2 - 2 * (kk - m)):
            yield e2 + 2 * (kk - m), c * d, ((lab, kk),) + prefix
        kk += 1


def d_v(v) -> VElement:
    """The derivation ``D`` on ``V``: ``D a(-m-1/2) = (m+1) a(-m-3/2)`` and ``D 1 = 0``."""
    v = _as_velem(v)
    out = VElement()
    for word, c in v.items():
        for i, (lab, m) in enumerate(word):
            nw = word[:i] + ((lab, m + 1),) + word[i + 1:]
            out.add_term(nw, c * (m + 1))
    return out


# ----------------------------------------------- Delta as an operator on V

def delta_operator(v, M: int) -> Series:
    """``Delta(x) v`` computed mode by mode from the polarized basis of rank ``M``."""
    v = _as_velem(v)
    out = Series(1, ((None, None),))
    for word, c in v.items():
        ms = sorted({m for _, m in word})
        for i in range(1, M + 1):
            e, eb = f"e{i}", f"eb{i}"
            for n in ms:
                inner = apply_vmode(eb, 2 * n + 1, VElement({word: c}))
                if not inner:
                    continue
                for m in ms:
                    cm = c_coeff(m, n)
                    if not cm:
                        continue
                    res = apply_vmode(e, 2 * m + 1, inner)
                    if res:
                        out.add_term((-2 * (m + n + 1),), res.scale(cm))
    return out


def exp_delta_operator(v, M: int) -> Series:
    """``exp(Delta(x)) v`` as the finite sum of ``Delta^k / k!``."""
    v = _as_velem(v)
    out = Series(1, ((None, None),))
    out.add_term((0,), VElement(v))
    term = Series(1, ((None, None),), {(0,): VElement(v)})
    k = 0
    while term.coeffs:
        k += 1
        nxt = Series(1, ((None, None),))
        for (e,), el in term.coeffs.items():
            for (d,), res in delta_operator(el, M).coeffs.items():
                nxt.add_term((e + d,), res.scale(Q(1, k)))
        term = nxt
        for ex, el in term.coeffs.items():
            out.add_term(ex, el)
    return out


# ------------------------------------------------------ products and iterates

def v_weight(v) -> Scalar:
    v = _as_velem(v)
    return max((Q(v_weight2(k), 2) for k in v), default=Q(0))


def product_series(v1, v2, w, window1: tuple, window2: tuple, cap: int | None = None) -> Series:
    """``Y_W(v1, x1) Y_W(v2, x2) w`` on a two-variable window.

    The inner series is computed on ``window2``; the weight of the components
    it must produce is bounded through the grading so that every outer
    coefficient inside ``window1`` is exact.
    """
    v1, v2, w = _as_velem(v1), _as_velem(v2), _as_welem(w)
    inner_cap = None
    if cap is not None and window1[0] is not None:
        # output weight = wt(u) + wt v1 + e1 with e1 >= lo1
        lowest = min((Q(v_weight2(k), 2) for k in v1), default=Q(0))
        inner_cap = floor(cap - lowest - Q(window1[0], 2))
    inner = actual_yw(v2, w, window2, inner_cap)
    out = Series(2, (window1, window2))
    for (e2,), u in inner.coeffs.items():
        for (e1,), res in actual_yw(v1, u, window1, cap).coeffs.items():
            out.add_term((e1, e2), res)
    return out


def iterate_series(v1, v2, w, window0: tuple, window2: tuple, cap: int | None = None) -> Series:
    """``Y_W(Y_V(v1, x0) v2, x2) w`` on a window in ``(x0, x2)``."""
    w = _as_welem(w)
    inner = y_v(v1, v2, window0[1])
    out = Series(2, (window0, window2))
    for (e0,), u in inner.coeffs.items():
        if window0[0] is not None and e0 < window0[0]:
            continue
        for (e2,), res in actual_yw(u, w, window2, cap).coeffs.items():
            out.add_term((e0, e2), res)
    return out


def naive_product_series(v1, v2, w, window1: tuple, window2: tuple, cap: int | None = None) -> Series:
    v1, v2, w = _as_velem(v1), _as_velem(v2), _as_welem(w)
    inner_cap = None
    if cap is not None and window1[0] is not None:
        lowest = min((Q(v_weight2(k), 2) for k in v1), default=Q(0))
        inner_cap = floor(cap - lowest - Q(window1[0], 2))
    inner = naive_yw(v2, w, window2, inner_cap)
    out = Series(2, (window1, window2))
    for (e2,), u in inner.coeffs.items():
        for (e1,), res in naive_yw(v1, u, window1, cap).coeffs.items():
            out.add_term((e1, e2), res)
    return out


def naive_iterate_series(v1, v2, w, window0: tuple, window2: tuple, cap: int | None = None) -> Series:
    w = _as_welem(w)
    inner = y_v(v1, v2, window0[1])
    out = Series(2, (window0, window2))
    for (e0,), u in inner.coeffs.items():
        if window0[0] is not None and e0 < window0[0]:
            continue
        for (e2,), res in naive_yw(u, w, window2, cap).coeffs.items():
            out.add_term((e0, e2), res)
    return out


# --------------------------------------------------------- closed forms

def _matched_terms(aw: tuple, bw: tuple):
    """Index sets, sign and matrix positions shared by the determinant formulas."""
    r, s = len(aw), len(bw)
    for rho in range(0, min(r, s) + 1):
        sgn_rho = _sign(r * rho + rho * (rho + 1) // 2)
        for ii in combinations(range(r), rho):
            for jj in combinations(range(s), rho):
                sgn = sgn_rho * _sign(sum(i + 1 for i in ii) + sum(j + 1 for j in jj))
                yield rho, ii, jj, sgn


def wick_rhs(aw: tuple, bw: tuple, w, windows_a: tuple, windows_b: tuple,
             cap: int | None = None) -> Series:
    """Right side of the multivariable product theorem.

    ``aw``/``bw`` hold ``(label, m)``; ``a_i`` sits in variable ``i`` and
    ``b_j`` in variable ``r + j``.  The matched pairs contribute kernel
    expansions ``G_{m n}(x_i, y_j)``; the rest is one normal-ordered product.
    """
    w = _as_welem(w)
    r, s = len(aw), len(bw)
    window = tuple(windows_a) + tuple(windows_b)
    out = Series(r + s, window)
    for rho, ii, jj, sgn in _matched_terms(aw, bw):
        rest_vars = [i for i in range(r) if i not in ii] + [r + j for j in range(s) if j not in jj]
        letters = tuple((aw[i][0], aw[i][1], k) for k, i in enumerate(i for i in range(r) if i not in ii))
        letters += tuple((bw[j][0], bw[j][1], len(letters) + k)
                         for k, j in enumerate(j for j in range(s) if j not in jj))
        sub_window = tuple(window[v] for v in rest_vars)
        rest_series: dict = {}
        for wword, cw in w.items():
            for exps, elem in nord_apply(letters, wword, sub_window, cap).items():
                cur = rest_series.get(exps)
                rest_series[exps] = elem.scale(cw) if cur is None else cur + elem.scale(cw)
        if not rest_series:
            continue
        for perm in permutations(range(rho)):
            psign = inversion_sign(perm)
            factors = []
            ok = True
            for k in range(rho):
                i, j = ii[k], jj[perm[k]]
                p = pair(aw[i][0], bw[j][0])
                if not p:
                    ok = False
                    break
                spec = KernelSpec("g", aw[i][1], bw[j][1], "xy", False)
                table = _kernel_table(spec, window[i], window[r + j])
                if not table:
                    ok = False
                    break
                factors.append((i, r + j, p, table))
            if not ok:
                continue
            # combine the independent kernel factors
            partial = [((), {}, Q(sgn * psign))]
            for i, jv, p, table in factors:
                nxt = []
                for _, assign, c in partial:
                    for (xe, ye), kc in table:
                        a2 = dict(assign)
                        a2[i] = xe
                        a2[jv] = ye
                        nxt.append(((), a2, c * p * kc))
                partial = nxt
            for _, assign, c in partial:
                for exps, elem in rest_series.items():
                    full = [0] * (r + s)
                    for v, e in assign.items():
                        full[v] = e
                    for v, e in zip(rest_vars, exps):
                        full[v] = e
                    out.add_term(tuple(full), elem.scale(c))
    return out


@lru_cache(maxsize=4096)
def _kernel_table(spec: KernelSpec, xw: tuple, yw: tuple) -> tuple:
    out = []
    for xe in range(xw[0], xw[1] + 1):
        for ye in range(yw[0], yw[1] + 1):
            c = kernel_coefficient(spec, xe, ye)
            if c:
                out.append(((xe, ye), c))
    return tuple(out)


def wick_lhs(aw: tuple, bw: tuple, w, windows_a: tuple, windows_b: tuple,
             cap: int | None = None) -> Series:
    """``:a(x_1)...a(x_r): :b(y_1)...b(y_s): w`` computed by composition."""
    w = _as_welem(w)
    r, s = len(aw), len(bw)
    window = tuple(windows_a) + tuple(windows_b)
    out = Series(r + s, window)
    bl = tuple((lab, m, k) for k, (lab, m) in enumerate(bw))
    al = tuple((lab, m, k) for k, (lab, m) in enumerate(aw))
    inner_cap = None
    if cap is not None:
        # a letter at exponent e changes the weight by e + m + 1/2
        shift = sum(Q(lo, 2) + m + Q(1, 2) for (_, m), (lo, _) in zip(aw, windows_a))
        inner_cap = floor(cap - shift)
    for wword, cw in w.items():
        for ey, u in nord_apply(bl, wword, tuple(windows_b), inner_cap).items():
            for uword, cu in u.items():
                for ex, elem in nord_apply(al, uword, tuple(windows_a), cap).items():
                    out.add_term(ex + ey, elem.scale(cw * cu))
    return out


def closed_form_product(aw: tuple, bw: tuple, w, window1: tuple, window2: tuple,
                        cap: int | None = None) -> Series:
    """The determinant formula for ``Ybar(a-word, x) Ybar(b-word, y) w``."""
    w = _as_welem(w)
    r, s = len(aw), len(bw)
    out = Series(2, (window1, window2))
    for rho, ii, jj, sgn in _matched_terms(aw, bw):
        rest_a = tuple(aw[i] for i in range(r) if i not in ii)
        rest_b = tuple(bw[j] for j in range(s) if j not in jj)
        letters = tuple((lab, m, 0) for lab, m in rest_a) + tuple((lab, m, 1) for lab, m in rest_b)
        if rho:
            # the unmatched letters push y up by at least their floor, so the
            # determinant is only needed for y up to hi2 minus that floor
            yfloor = _letter_floor(rest_b, w)
            det = _kernel_det([aw[i] for i in ii], [bw[j] for j in jj], window2[1] - yfloor)
            if not det:
                continue
        else:
            det = {(0, 0): Q(1)}
        for (dx, dy), dc in det.items():
            sub = ((window1[0] - dx, window1[1] - dx), (window2[0] - dy, window2[1] - dy))
            if sub[1][1] < sub[1][0]:
                continue
            for wword, cw in w.items():
                for (ex, ey), elem in nord_apply(letters, wword, sub, cap).items():
                    out.add_term((ex + dx, ey + dy), elem.scale(sgn * dc * cw))
    return out


def _kernel_det(arow: list, bcol: list, yhi: int) -> dict:
    """Determinant of ``(a_i, b_j) G_{m_i n_j}(x, y)`` for ``y`` powers up to ``yhi``.

    ``G_{mn}`` is homogeneous of degree ``-1-m-n`` with ``y`` powers at least
    ``-1/2-n``, so each entry is a finite list once the total ``y`` power is
    bounded and the permutation expansion is exact.
    """
    rho = len(arow)
    y_bot = sum(-1 - 2 * n for _, n in bcol)
    if yhi < y_bot:
        return {}
    total: dict = {}
    for perm in permutations(range(rho)):
        acc = {(0, 0): Q(inversion_sign(perm))}
        for k in range(rho):
            a, m = arow[k]
            b, n = bcol[perm[k]]
            p = pair(a, b)
            if not p:
                acc = {}
                break
            lo = -1 - 2 * n
            hi = yhi - (y_bot - lo)
            deg = -2 - 2 * m - 2 * n
            table = _kernel_table(KernelSpec("g", m, n, "xy", False), (deg - hi, deg - lo), (lo, hi))
            nxt: dict = {}
            for (x0, y0), c0 in acc.items():
                for (x1, y1), c1 in table:
                    key = (x0 + x1, y0 + y1)
                    nxt[key] = nxt.get(key, 0) + c0 * c1 * p
            acc = nxt
        for key, c in acc.items():
            if c and key[1] <= yhi:
                total[key] = total.get(key, 0) + c
    return {k: c for k, c in total.items() if c}


def closed_form_iterate(aw: tuple, bw: tuple, w, window0: tuple, window2: tuple,
                        cap: int | None = None) -> Series:
    """The determinant formula for ``Ybar(Y_V(a-word, x) b-word, y) w``.

    The normal-ordered product with the ``a`` letters at ``y + x`` is obtained
    by computing it with the ``a`` letters in their own variable ``z`` and
    substituting ``z = y + x`` with the formal Taylor expansion.
    """
    w = _as_welem(w)
    r, s = len(aw), len(bw)
    out = Series(2, (window0, window2))
    for rho, ii, jj, sgn in _matched_terms(aw, bw):
        if rho:
            mat = [[pair(aw[i][0], bw[j][0]) * binom(Q(-bw[j][1] - 1), aw[i][1]) for j in jj]
                   for i in ii]
            det = _det(mat)
            if not det:
                continue
        else:
            det = Q(1)
        dx = -2 * (sum(bw[j][1] for j in jj) + rho + sum(aw[i][1] for i in ii))
        rest_a = tuple(aw[i] for i in range(r) if i not in ii)
        rest_b = tuple(bw[j] for j in range(s) if j not in jj)
        xwin = (window0[0] - dx, window0[1] - dx)
        for (ex, ey), elem in _shifted_nord(rest_a, rest_b, w, xwin, window2, cap).items():
            out.add_term((ex + dx, ey), elem.scale(sgn * det))
    return out


def _letter_floor(letters: tuple, w: WElement) -> int:
    """A lower bound for the doubled exponent a block of letters can produce on ``w``.

    A letter ``a^{(m)}`` contributes ``x^{-n-m-1/2}`` and acts nontrivially
    only for modes ``n`` at most the largest weight present.
    """
    top = w_weight_max(w)
    return sum(-2 * top - 2 * m - 1 for _, m in letters)


def _shifted_nord(rest_a: tuple, rest_b: tuple, w: WElement, xwin: tuple, ywin: tuple, cap) -> dict:
    """``:a(y+x)... b(y)...: w`` on a window, expanded in nonnegative powers of ``x``."""
    out: dict = {}
    xlo, xhi = xwin
    ylo, yhi = ywin
    if xhi < 0:
        return out
    letters = tuple((lab, m, 0) for lab, m in rest_a) + tuple((lab, m, 1) for lab, m in rest_b)
    if not rest_a:
        if xlo > 0:
            return out
        for wword, cw in w.items():
            for (_, ey), elem in nord_apply(letters, wword, ((0, 0), ywin), cap).items():
                _acc(out, (0, ey), elem.scale(cw))
        return out
    # z^E y^F -> sum_k binom(E, k) x^k y^{E+F-k}
    kmin = max(0, xlo)
    kmin += kmin % 2
    zfloor = _letter_floor(rest_a, w)
    yfloor = _letter_floor(rest_b, w)
    window = ((None, yhi + xhi - yfloor), (None, yhi + xhi - zfloor))
    for wword, cw in w.items():
        for (ez, ey), elem in nord_apply(letters, wword, window, cap).items():
            for k2 in range(kmin, xhi + 1, 2):
                ny = ez + ey - k2
                if ny < ylo:
                    break
                if ny > yhi:
                    continue
                c = binom_d(ez, k2 // 2)
                if c:
                    _acc(out, (k2, ny), elem.scale(c * cw))
    return out


def _acc(store: dict, key, value) -> None:
    cur = store.get(key)
    store[key] = value if cur is None else cur + value


def clear_caches() -> None:
    """Drop memoized operator tables; long sweeps call this between cases."""
    from . import fock
    for fn in (nord_apply, _tc, exp_delta, _y_v_words, _kernel_table,
               fock.mode_on_word, fock.vmode_on_word):
        fn.cache_clear()
