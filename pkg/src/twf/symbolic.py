"""Generic labels whose pairings are independent polynomial variables.

An identity between expressions that depend on labels only through the form
``(a, b)`` holds for every choice of labels as soon as it holds with
:class:`SymLabel` letters, since the concrete case is a specialization of
the polynomial one.  This lets a check run once per shape of mode indices
instead of once per label assignment.
"""
from __future__ import annotations

from itertools import count

from .algebra import Q, RATIONALS, Scalar


class SymLabel(int):
    """An opaque label; ``(s_i, s_j)`` is the variable ``p_{ij}`` (``i <= j``).

    Subclassing ``int`` keeps hashing and comparison in C, which matters
    because words full of these labels are dictionary keys everywhere.
    """

    __slots__ = ()

    @property
    def index(self) -> int:
        return int(self)

    def pair_with(self, other) -> "PairPoly":
        if not isinstance(other, SymLabel):
            raise TypeError("symbolic labels pair only with symbolic labels")
        i, j = (int(self), int(other)) if self <= other else (int(other), int(self))
        return PairPoly({((i, j),): Q(1)})

    def __repr__(self):
        return f"s{int(self)}"

    __str__ = __repr__


class PairPoly:
    """A polynomial in pairing variables with rational coefficients.

    Monomials are sorted tuples of variables ``(i, j)``, repeated for powers.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def _raw(cls, terms: dict) -> "PairPoly":
        out = object.__new__(cls)
        out.terms = terms
        return out

    @staticmethod
    def const(c) -> "PairPoly":
        return PairPoly({(): Q(c)})

    def _coerce(self, other) -> "PairPoly":
        if isinstance(other, PairPoly):
            return other
        if isinstance(other, RATIONALS):
            return PairPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, v in other.terms.items():
            nv = out.get(k, 0) + v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        return PairPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return PairPoly._raw({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if type(other) is Scalar or (not isinstance(other, PairPoly) and isinstance(other, RATIONALS)):
            if not other:
                return PairPoly()
            return PairPoly._raw({k: v * other for k, v in self.terms.items()})
        if not isinstance(other, PairPoly):
            return NotImplemented
        if len(other.terms) == 1 and () in other.terms:
            return self * other.terms[()]
        if len(self.terms) == 1 and () in self.terms:
            return other * self.terms[()]
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                key = tuple(sorted(k1 + k2))
                nv = out.get(key, 0) + v1 * v2
                if nv:
                    out[key] = nv
                else:
                    out.pop(key, None)
        return PairPoly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (Q(1) / Q(other))

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def specialize(self, values: dict) -> Scalar:
        """Substitute ``values[(i, j)]`` for every variable."""
        total = Q(0)
        for mono, c in self.terms.items():
            for var in mono:
                c = c * values[var]
                if not c:
                    break
            total += c
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in sorted(self.terms.items()):
            name = "*".join(f"p{i}{j}" for i, j in mono)
            parts.append(f"{c}*{name}" if name else str(c))
        return " + ".join(parts)


def fresh_labels(start: int = 0):
    """An endless supply of distinct symbolic labels."""
    return (SymLabel(i) for i in count(start))


def generic_word(ms, labels) -> tuple:
    """A ``(label, m)`` word with a fresh symbolic label per letter."""
    return tuple((next(labels), m) for m in ms)
