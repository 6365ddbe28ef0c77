"""Normal ordering of mode words and of products of generating series.

In a normal-ordered product the negative modes stand on the left, then the
positive modes, then the zero modes, each block keeping its original relative
order; the sign is that of the rearranging permutation.  The zero block is
not a plain product: it is expanded by the recursion that subtracts half the
pairing for every pair of zero letters, which is what makes zero modes behave
like a free algebra rather than a Clifford algebra.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product

from .algebra import Q, binom_d, inversion_sign
from .fock import LinComb, WElement, WWord, mode_on_word, pair

HALF = Q(1, 2)


# ------------------------------------------------------------- zero block

@lru_cache(maxsize=None)
def zero_nord_positions(labels: tuple) -> tuple:
    """``:a_1(0) ... a_r(0):`` as a tuple of ``(coeff, kept positions)``.

    Uses the left recursion
    ``:a_1 ... a_r: = a_1 :a_2 ... a_r: + sum_i (-1)^{i+1}/2 (a_1, a_i) :... a_i^ ...:``.
    """
    r = len(labels)
    if r == 0:
        return ((Q(1), ()),)
    acc: dict = {}

    def add(key, c):
        v = acc.get(key, 0) + c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)

    for c, kept in zero_nord_positions(labels[1:]):
        add((0,) + tuple(k + 1 for k in kept), c)
    for i in range(2, r + 1):
        p = pair(labels[0], labels[i - 1])
        if not p:
            continue
        coef = (HALF if (i + 1) % 2 == 0 else -HALF) * p
        rest = labels[1:i - 1] + labels[i:]
        remap = [j for j in range(1, r) if j != i - 1]
        for c, kept in zero_nord_positions(rest):
            add(tuple(remap[k] for k in kept), coef * c)
    return tuple((c, k) for k, c in sorted(acc.items()))


@lru_cache(maxsize=None)
def zero_nord_positions_right(labels: tuple) -> tuple:
    """The same expansion computed by peeling the last letter instead.

    ``:a_1 ... a_r: = :a_1 ... a_{r-1}: a_r + sum_i (-1)^{i+r}/2 (a_i, a_r) :... a_i^ ... a_{r-1}:``.
    """
    r = len(labels)
    if r == 0:
        return ((Q(1), ()),)
    acc: dict = {}

    def add(key, c):
        v = acc.get(key, 0) + c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)

    for c, kept in zero_nord_positions_right(labels[:-1]):
        add(kept + (r - 1,), c)
    for i in range(1, r):
        p = pair(labels[i - 1], labels[r - 1])
        if not p:
            continue
        coef = (HALF if (i + r) % 2 == 0 else -HALF) * p
        remap = [j for j in range(r - 1) if j != i - 1]
        rest = tuple(labels[j] for j in remap)
        for c, kept in zero_nord_positions_right(rest):
            add(tuple(remap[k] for k in kept), coef * c)
    return tuple((c, k) for k, c in sorted(acc.items()))


def zero_nord(labels: tuple, right: bool = False) -> LinComb:
    """The zero-mode normal ordering as a combination of zero-mode label words."""
    src = zero_nord_positions_right(tuple(labels)) if right else zero_nord_positions(tuple(labels))
    out = LinComb()
    for c, kept in src:
        out.add_term(tuple(labels[k] for k in kept), c)
    return out


# ---------------------------------------------------------- mode words

class OrderedProduct(LinComb):
    """Combination of ordered words keyed by ``(negs, poss, zeros)`` blocks.

    Each block is a tuple of ``(label, n)`` letters; the word is the product
    negs * poss * zeros read as operators.  Zero blocks are plain products.
    """

    __slots__ = ()


def split_classes(letters: tuple) -> tuple[tuple, tuple, tuple, int]:
    neg = [i for i, (_, n) in enumerate(letters) if n < 0]
    pos = [i for i, (_, n) in enumerate(letters) if n > 0]
    zer = [i for i, (_, n) in enumerate(letters) if n == 0]
    sign = inversion_sign(neg + pos + zer)
    return tuple(neg), tuple(pos), tuple(zer), sign


def normal_order_word(letters, right: bool = False) -> OrderedProduct:
    """``:a_1(n_1) ... a_r(n_r):`` in the ordered basis."""
    letters = tuple(letters)
    neg, pos, zer, sign = split_classes(letters)
    negs = tuple(letters[i] for i in neg)
    poss = tuple(letters[i] for i in pos)
    zlabels = tuple(letters[i][0] for i in zer)
    out = OrderedProduct()
    for zword, c in zero_nord(zlabels, right=right).items():
        out.add_term((negs, poss, tuple((lab, 0) for lab in zword)), c * sign)
    return out


def apply_ordered(op: LinComb, w: WElement) -> WElement:
    """Act with an ordered-basis combination on a W element."""
    out = WElement()
    for (negs, poss, zeros), c in op.items():
        cur = WElement(w)
        for lab, n in reversed(negs + poss + zeros):
            nxt = WElement()
            for word, d in cur.items():
                for e, nw in mode_on_word(lab, n, word):
                    nxt.add_term(nw, d * e)
            cur = nxt
            if not cur:
                break
        for word, d in cur.items():
            out.add_term(word, c * d)
    return out


def apply_mode_word(letters, w: WElement) -> WElement:
    """Plain (not normal-ordered) product of modes acting on ``w``."""
    cur = WElement(w)
    for lab, n in reversed(tuple(letters)):
        nxt = WElement()
        for word, d in cur.items():
            for e, nw in mode_on_word(lab, n, word):
                nxt.add_term(nw, d * e)
        cur = nxt
    return cur


# ------------------------------------------- normal-ordered generating series

def _class_assignments(r: int):
    for classes in product((0, 1, 2), repeat=r):
        neg = [i for i in range(r) if classes[i] == 0]
        pos = [i for i in range(r) if classes[i] == 1]
        zer = [i for i in range(r) if classes[i] == 2]
        yield tuple(neg), tuple(pos), tuple(zer), inversion_sign(neg + pos + zer)


@lru_cache(maxsize=64)
def _assignments(r: int) -> tuple:
    return tuple(_class_assignments(r))


@lru_cache(maxsize=1 << 16)
def nord_apply(letters: tuple, word: WWord, window: tuple, cap: int | None = None) -> dict:
    """``:h_1^{(m_1)}(x_{v_1}) ... h_r^{(m_r)}(x_{v_r}):`` applied to a basis word.

    ``letters`` holds ``(label, m, var)``.  ``window`` gives a doubled
    ``(lo, hi)`` per variable (``lo`` may be ``None``).  Terms whose output
    weight exceeds ``cap`` are dropped.  Returns ``{exps: WElement}`` holding
    every coefficient inside the window.
    """
    nv = len(window)
    r = len(letters)
    out: dict = {}
    if r == 0:
        exps = (0,) * nv
        if _inside(exps, window) and (cap is None or word.weight <= cap):
            out[exps] = WElement({word: Q(1)})
        return out
    his = [w[1] for w in window]
    los = [w[0] for w in window]
    room = len(word.negs)
    for neg, pos, zer, sign in _assignments(r):
        if len(pos) > room:
            continue
        # zero block: contributes x^{-m-1/2} per letter, acts by prepending
        base = [0] * nv
        coef0 = Q(sign)
        for i in zer:
            lab, m, v = letters[i]
            base[v] -= 2 * m + 1
            coef0 *= binom_d(-1, m)
        # the negative letters can only raise exponents, by at least 1 - 2m
        min_neg = [0] * nv
        for i in neg:
            _, m, v = letters[i]
            min_neg[v] += 1 - 2 * m
        states = []
        zlabels = tuple(letters[i][0] for i in zer)
        for c, kept in zero_nord_positions(zlabels):
            klabels = tuple(zlabels[k] for k in kept)
            s = -1 if (len(word.negs) * len(klabels)) & 1 else 1
            states.append((coef0 * c * s, tuple(base), word.negs, klabels + word.zeros))
        # positive block, rightmost letter acts first
        for i in reversed(pos):
            lab, m, v = letters[i]
            nstates = []
            for c, exps, negs, zeros in states:
                for j, (h, n) in enumerate(negs):
                    p = pair(lab, h)
                    if not p:
                        continue
                    e = list(exps)
                    e[v] -= 2 * n + 2 * m + 1
                    d = c * p * binom_d(-2 * n - 1, m)
                    if j & 1:
                        d = -d
                    nstates.append((d, tuple(e), negs[:j] + negs[j + 1:], zeros))
            states = nstates
            if not states:
                break
        if not states:
            continue
        neg_letters = [letters[i] for i in neg]
        for c, exps, negs, zeros in states:
            if any(his[v] is not None and exps[v] + min_neg[v] > his[v] for v in range(nv)):
                continue
            wt = sum(n for _, n in negs)
            budget = None if cap is None else cap - wt
            if budget is not None and budget < len(neg_letters):
                continue
            for coeff, e, prefix in _neg_block(neg_letters, list(exps), min_neg, his, budget, los):
                if nv == 1:
                    lo, hi = window[0]
                    if (lo is not None and e[0] < lo) or (hi is not None and e[0] > hi):
                        continue
                elif not _inside(e, window):
                    continue
                nw = WWord(prefix + negs, zeros)
                bucket = out.get(e)
                if bucket is None:
                    bucket = out[e] = WElement()
                bucket.add_term(nw, c * coeff)
    return {e: b for e, b in out.items() if b}


def _neg_block(neg_letters, exps, min_neg, his, budget, los=None):
    """Enumerate negative modes for the leftmost block within the bounds.

    A letter ``a^{(m)}`` with mode ``-n`` adds ``2n - 2m - 1`` to its doubled
    exponent.  Upper bounds prune directly; lower bounds prune once the letter
    is the last one in its variable, or earlier through the weight budget.
    """
    k = len(neg_letters)
    if k == 0:
        yield Q(1), tuple(exps), ()
        return
    nv = len(exps)
    remaining_min = list(min_neg)
    # letters still to place after position idx, per variable
    after = [[0] * nv for _ in range(k + 1)]
    after_m = [[0] * nv for _ in range(k + 1)]
    for idx in range(k - 1, -1, -1):
        after[idx] = list(after[idx + 1])
        after_m[idx] = list(after_m[idx + 1])
        _, m, v = neg_letters[idx]
        after[idx][v] += 1
        after_m[idx][v] += 2 * m + 1
    if los is None:
        los = [None] * nv

    def rec(idx, exps, budget, coeff, prefix):
        if idx == k:
            yield coeff, tuple(exps), tuple(prefix)
            return
        lab, m, v = neg_letters[idx]
        remaining_min[v] -= 1 - 2 * m
        left = k - idx - 1
        n = 1
        lo = los[v]
        if lo is not None:
            if after[idx + 1][v] == 0:
                # last letter in this variable: the exponent is final
                need = lo - exps[v] + 2 * m + 1
                n = max(1, (need + 1) // 2)
            elif budget is not None:
                # this letter and the later ones in v share what the other
                # variables leave of the budget, and each unit of n adds 2
                others = left - after[idx + 1][v]
                reach = exps[v] - 2 * m - 1 + 2 * (budget - others) - after_m[idx + 1][v]
                if reach < lo:
                    remaining_min[v] += 1 - 2 * m
                    return
        while True:
            if budget is not None and n + left > budget:
                break
            inc = 2 * n - 2 * m - 1
            if his[v] is not None and exps[v] + inc + remaining_min[v] > his[v]:
                break
            exps[v] += inc
            prefix.append((lab, n))
            yield from rec(idx + 1, exps, None if budget is None else budget - n,
                           coeff * binom_d(2 * n - 1, m), prefix)
            prefix.pop()
            exps[v] -= inc
            n += 1
        remaining_min[v] += 1 - 2 * m

    yield from rec(0, exps, budget, Q(1), [])


def _inside(exps, window) -> bool:
    for e, (lo, hi) in zip(exps, window):
        if lo is not None and e < lo:
            return False
        if hi is not None and e > hi:
            return False
    return True


def nord_series_coefficient(letters, target2: int, w: WElement) -> WElement:
    """Coefficient of ``x^{target/2}`` in ``:a_1^{(m_1)}(x) ... a_r^{(m_r)}(x): w``.

    ``letters`` holds ``(label, m)`` pairs; the result is computed by summing
    over mode tuples directly, the slow reference for :func:`nord_apply`.
    """
    letters = tuple(letters)
    r = len(letters)
    out = WElement()
    if r == 0:
        return WElement(w) if target2 == 0 else out
    maxw = max((k.weight for k in w), default=0)
    # each mode n satisfies -n <= (target + bounds); positives <= max weight
    span = maxw + abs(target2) // 2 + 2 * sum(m for _, m in letters) + r + 2
    rng = range(-span, maxw + 1)

    def rec(i, acc2, chosen):
        if i == r:
            if acc2 == target2:
                yield tuple(chosen)
            return
        lab, m = letters[i]
        for n in rng:
            chosen.append(n)
            yield from rec(i + 1, acc2 - 2 * n - 2 * m - 1, chosen)
            chosen.pop()

    for modes in rec(0, 0, []):
        coeff = Q(1)
        for (lab, m), n in zip(letters, modes):
            coeff *= binom_d(-2 * n - 1, m)
        op = normal_order_word(tuple((lab, n) for (lab, _), n in zip(letters, modes)))
        out = out + apply_ordered(op, w).scale(coeff)
    return out
