"""Fock spaces: the algebra ``V`` and the twisted module ``W``.

Labels of the standard polarized basis of ``h = C^{2M}`` are the strings
``e1 .. eM`` and ``eb1 .. ebM`` with ``(e_i, eb_j) = delta_ij`` and all other
pairings zero.  Symbolic labels (see :mod:`twf.symbolic`) pair to polynomial
variables instead, so every routine here is written against :func:`pair`.

A ``V`` basis word ``a_1(-m_1-1/2) ... a_r(-m_r-1/2) 1`` is the tuple
``((a_1, m_1), ..., (a_r, m_r))``.  A ``W`` basis word
``h_1(-m_1) ... h_r(-m_r) z_1(0) ... z_k(0) u_0`` is a :class:`WWord` with the
negative letters in ``negs`` and the zero-mode labels in ``zeros``.
"""
from __future__ import annotations

import json
import re
from functools import lru_cache
from typing import Iterable, NamedTuple

from .algebra import Q, Scalar

Label = object  # str for the polarized basis, symbolic labels otherwise


class WWord(NamedTuple):
    negs: tuple = ()
    zeros: tuple = ()

    @property
    def weight(self) -> int:
        return sum(m for _, m in self.negs)


VWord = tuple  # tuple of (label, m)
U0 = WWord((), ())
VAC = ()


def v_weight2(word: VWord) -> int:
    """Doubled weight of a V word: ``sum(2 m_i + 1)``."""
    return sum(2 * m + 1 for _, m in word)


def v_parity(word: VWord) -> int:
    return len(word) & 1


def w_parity(word: WWord) -> int:
    return (len(word.negs) + len(word.zeros)) & 1


# ------------------------------------------------------------------ pairing

_LABEL_RE = re.compile(r"^(eb|e)([1-9][0-9]*)$")


@lru_cache(maxsize=None)
def _split_label(label: str) -> tuple[bool, int]:
    m = _LABEL_RE.match(label)
    if not m:
        raise ValueError(f"not a basis label: {label!r}")
    return m.group(1) == "eb", int(m.group(2))


def pair(a, b):
    """The symmetric form on labels."""
    if isinstance(a, str) and isinstance(b, str):
        return _pair_str(a, b)
    if hasattr(a, "pair_with"):
        return a.pair_with(b)
    if hasattr(b, "pair_with"):
        return b.pair_with(a)
    raise TypeError(f"cannot pair {a!r} with {b!r}")


@lru_cache(maxsize=None)
def _pair_str(a: str, b: str) -> Scalar:
    bar_a, i = _split_label(a)
    bar_b, j = _split_label(b)
    return Q(1) if (bar_a != bar_b and i == j) else Q(0)


def basis_labels(M: int) -> list[str]:
    return [f"e{i}" for i in range(1, M + 1)] + [f"eb{i}" for i in range(1, M + 1)]


def dual_label(label: str) -> str:
    bar, i = _split_label(label)
    return f"e{i}" if bar else f"eb{i}"


# ----------------------------------------------------------- linear spans

class LinComb(dict):
    """A finite linear combination: basis key -> nonzero scalar."""

    __slots__ = ()

    def add_term(self, key, coeff) -> None:
        if not coeff:
            return
        c = self.get(key)
        c = coeff if c is None else c + coeff
        if c:
            self[key] = c
        else:
            self.pop(key, None)

    def __add__(self, other: "LinComb") -> "LinComb":
        out = type(self)(self)
        for k, c in other.items():
            out.add_term(k, c)
        return out

    def __sub__(self, other: "LinComb") -> "LinComb":
        out = type(self)(self)
        for k, c in other.items():
            out.add_term(k, -c)
        return out

    def __neg__(self) -> "LinComb":
        return type(self)({k: -c for k, c in self.items()})

    def scale(self, s) -> "LinComb":
        if not s:
            return type(self)()
        # scalars form an integral domain, so no product vanishes
        return type(self)({k: c * s for k, c in self.items()})

    def __mul__(self, s):
        return self.scale(s)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, dict):
            a = {k: c for k, c in self.items() if c}
            b = {k: c for k, c in other.items() if c}
            return a == b
        if other == 0:
            return not any(self.values())
        return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = None

    def iszero(self) -> bool:
        return not any(self.values())

    def map_scalars(self, fn) -> "LinComb":
        out = type(self)()
        for k, c in self.items():
            out.add_term(k, fn(c))
        return out


class VElement(LinComb):
    __slots__ = ()


class WElement(LinComb):
    __slots__ = ()

    def restrict_weight(self, max_weight: int | None) -> "WElement":
        if max_weight is None:
            return self
        return WElement({k: c for k, c in self.items() if k.weight <= max_weight})


def welem(word: WWord = U0, coeff=Q(1)) -> WElement:
    return WElement({word: coeff})


def velem(word: VWord = VAC, coeff=Q(1)) -> VElement:
    return VElement({word: coeff})


def pair_elements(wprime: WElement, w: WElement):
    """Coefficient pairing: the basis of ``W`` is declared orthonormal."""
    total = 0
    for k, c in w.items():
        d = wprime.get(k)
        if d:
            total = total + c * d
    return total


# --------------------------------------------------------- mode actions

@lru_cache(maxsize=1 << 18)
def mode_on_word(label, n: int, word: WWord) -> tuple:
    """``label(n)`` applied to a W basis word, as a tuple of ``(coeff, word)``.

    Negative modes prepend.  A zero mode passes the negative letters with a
    sign and joins the front of the zero block.  A positive mode contracts
    with a matching negative letter, picking up a sign for each letter it
    passes, and is killed once it reaches the zero block.
    """
    if n < 0:
        return ((Q(1), WWord(((label, -n),) + word.negs, word.zeros)),)
    if n == 0:
        sign = -1 if len(word.negs) & 1 else 1
        return ((Q(sign), WWord(word.negs, (label,) + word.zeros)),)
    out = []
    for i, (h, m) in enumerate(word.negs):
        if m != n:
            continue
        p = pair(label, h)
        if not p:
            continue
        c = p if i % 2 == 0 else -p
        out.append((c, WWord(word.negs[:i] + word.negs[i + 1:], word.zeros)))
    return tuple(out)


def apply_mode(label_or_vector, n: int, w: WElement) -> WElement:
    """Apply ``h(n)`` to a W element; ``h`` is a label or a dict label -> scalar."""
    if isinstance(label_or_vector, dict):
        out = WElement()
        for lab, s in label_or_vector.items():
            out = out + apply_mode(lab, n, w).scale(s)
        return out
    out = WElement()
    for word, c in w.items():
        for d, nw in mode_on_word(label_or_vector, n, word):
            out.add_term(nw, c * d)
    return out


@lru_cache(maxsize=1 << 18)
def vmode_on_word(label, n2: int, word: VWord) -> tuple:
    """``label(n2/2)`` on a V basis word; ``n2`` is an odd doubled mode index.

    Negative modes prepend.  ``a(k+1/2)`` contracts with a letter ``b(-k-1/2)``
    with coefficient ``(a, b)`` and the sign of the letters it passes, then
    annihilates the vacuum.
    """
    if n2 % 2 == 0:
        raise ValueError("V modes are half-integers")
    if n2 < 0:
        m = (-n2 - 1) // 2
        return ((Q(1), ((label, m),) + word),)
    k = (n2 - 1) // 2
    out = []
    for i, (h, m) in enumerate(word):
        if m != k:
            continue
        p = pair(label, h)
        if not p:
            continue
        out.append((p if i % 2 == 0 else -p, word[:i] + word[i + 1:]))
    return tuple(out)


def apply_vmode(label, n2: int, v: VElement) -> VElement:
    out = VElement()
    for word, c in v.items():
        for d, nw in vmode_on_word(label, n2, word):
            out.add_term(nw, c * d)
    return out


K = "k"  # the central element, acting as 1


def canonicalize_tensor(letters: Iterable) -> WElement:
    """Reduce a product of modes applied to ``u_0``.

    ``letters`` is a sequence of ``(label, n)`` pairs or the central symbol
    ``"k"``, read left to right as an operator word.
    """
    w = welem()
    for item in reversed(list(letters)):
        if item == K:
            continue
        label, n = item
        w = apply_mode(label, n, w)
    return w


# ----------------------------------------------------------- basis lists

def v_basis(labels: list, max_weight2: int) -> list[VWord]:
    """All V words over ``labels`` with doubled weight at most ``max_weight2``."""
    out: list[VWord] = [()]
    frontier: list[VWord] = [()]
    while frontier:
        nxt = []
        for word in frontier:
            w2 = v_weight2(word)
            for m in range((max_weight2 - w2 - 1) // 2 + 1):
                if w2 + 2 * m + 1 > max_weight2:
                    break
                for lab in labels:
                    nxt.append(word + ((lab, m),))
        out.extend(nxt)
        frontier = nxt
    return out


def w_basis(labels: list, max_weight: int, max_zeros: int = 0) -> list[WWord]:
    """W words of weight at most ``max_weight`` with at most ``max_zeros`` zero letters."""
    negs_list: list[tuple] = [()]
    frontier: list[tuple] = [()]
    while frontier:
        nxt = []
        for negs in frontier:
            wt = sum(m for _, m in negs)
            for m in range(1, max_weight - wt + 1):
                for lab in labels:
                    nxt.append(negs + ((lab, m),))
        negs_list.extend(nxt)
        frontier = nxt
    zeros_list: list[tuple] = [()]
    frontier = [()]
    for _ in range(max_zeros):
        frontier = [z + (lab,) for z in frontier for lab in labels]
        zeros_list.extend(frontier)
    return [WWord(n, z) for n in negs_list for z in zeros_list]


# ------------------------------------------------------------- text forms

def _fmt_scalar(c) -> str:
    return str(c)


def format_vword(word: VWord) -> str:
    if not word:
        return "1"
    return "".join(f"{lab}({Q(-2 * m - 1, 2)})" for lab, m in word)


def format_wword(word: WWord) -> str:
    body = "".join(f"{lab}({-m})" for lab, m in word.negs)
    body += "".join(f"{lab}(0)" for lab in word.zeros)
    return body + "u0"


def format_element(elem: LinComb) -> str:
    if not elem:
        return "0"
    parts = []
    for key, c in sorted(elem.items(), key=lambda kv: repr(kv[0])):
        word = format_wword(key) if isinstance(key, WWord) else format_vword(key)
        parts.append(f"({_fmt_scalar(c)}) {word}")
    return " + ".join(parts)


def element_to_json(elem: LinComb) -> list[dict]:
    rows = []
    for key, c in sorted(elem.items(), key=lambda kv: repr(kv[0])):
        if isinstance(key, WWord):
            rows.append({"word": [[str(l), -m] for l, m in key.negs],
                         "zeros": [str(l) for l in key.zeros], "coeff": _fmt_scalar(c)})
        else:
            rows.append({"word": [[str(l), str(Q(-2 * m - 1, 2))] for l, m in key],
                         "zeros": [], "coeff": _fmt_scalar(c)})
    return rows


def element_from_json(rows: list[dict], space: str) -> LinComb:
    if space == "W":
        out = WElement()
        for row in rows:
            negs = tuple((l, -int(n)) for l, n in row["word"])
            out.add_term(WWord(negs, tuple(row.get("zeros", ()))), Q(row["coeff"]))
        return out
    out = VElement()
    for row in rows:
        word = tuple((l, int((-2 * Q(n) - 1) / 2)) for l, n in row["word"])
        out.add_term(word, Q(row["coeff"]))
    return out


def dumps_element(elem: LinComb) -> str:
    return json.dumps(element_to_json(elem))


# ------------------------------------------------------------------ parsing

class WordParseError(ValueError):
    """Raised on malformed word text; ``pos`` is the offending offset."""

    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(?P<lab>eb[1-9][0-9]*|e[1-9][0-9]*)\((?P<idx>[-+]?[0-9]+(?:/[0-9]+)?)\)|(?P<vac>u0|1))")


def _tokens(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise WordParseError("unexpected text", pos)
        yield m, pos
        pos = m.end()


def parse_vword(text: str) -> VWord:
    """Parse ``e1(-1/2)eb2(-3/2)`` (a trailing ``1`` is optional)."""
    word = []
    seen_vac = False
    for m, pos in _tokens(text):
        if seen_vac:
            raise WordParseError("text after the vacuum", pos)
        if m.group("vac"):
            if m.group("vac") != "1":
                raise WordParseError("V words end in 1", pos)
            seen_vac = True
            continue
        idx = Q(m.group("idx"))
        if idx.denominator != 2 or idx > 0:
            raise WordParseError("V modes are negative half-integers", pos)
        word.append((m.group("lab"), int(-idx - Q(1, 2))))
    return tuple(word)


def parse_wword(text: str) -> WElement:
    """Parse a W word such as ``e1(-2)eb1(0)u0``.

    Letters may come in any order and may include positive modes; the result
    is the reduced element obtained by acting on ``u0``.
    """
    letters = []
    seen_vac = False
    for m, pos in _tokens(text):
        if seen_vac:
            raise WordParseError("text after the vacuum", pos)
        if m.group("vac"):
            if m.group("vac") != "u0":
                raise WordParseError("W words end in u0", pos)
            seen_vac = True
            continue
        idx = Q(m.group("idx"))
        if idx.denominator != 1:
            raise WordParseError("W modes are integers", pos)
        letters.append((m.group("lab"), int(idx)))
    return canonicalize_tensor(letters)


def vword_to_elem(word: VWord) -> VElement:
    return velem(word)
