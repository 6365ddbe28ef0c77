"""Exact scalars, half-integer binomials, the C coefficient table and shuffles.

Half-integers are stored doubled: the exponent ``x^{-3/2}`` is the int ``-3``.
Every other module works with these doubled ints directly; :class:`HalfInt`
is the thin public wrapper used at API boundaries.
"""
from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterator, NamedTuple, Sequence

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    Q = Fraction

Scalar = type(Q(0))
RATIONALS = (int, Fraction, Scalar)
HALF = Q(1, 2)


class HalfInt:
    """An element of ``Z/2`` kept as a doubled integer."""

    __slots__ = ("doubled",)

    def __init__(self, doubled: int):
        self.doubled = int(doubled)

    @classmethod
    def of(cls, value) -> "HalfInt":
        q = Fraction(value) * 2
        if q.denominator != 1:
            raise ValueError(f"{value} is not a half-integer")
        return cls(q.numerator)

    def to_fraction(self) -> Fraction:
        return Fraction(self.doubled, 2)

    def is_integral(self) -> bool:
        return self.doubled % 2 == 0

    def __add__(self, other):
        other = other if isinstance(other, HalfInt) else HalfInt.of(other)
        return HalfInt(self.doubled + other.doubled)

    def __sub__(self, other):
        other = other if isinstance(other, HalfInt) else HalfInt.of(other)
        return HalfInt(self.doubled - other.doubled)

    def __neg__(self):
        return HalfInt(-self.doubled)

    def __eq__(self, other):
        if isinstance(other, HalfInt):
            return self.doubled == other.doubled
        try:
            return self.to_fraction() == Fraction(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self.to_fraction() < Fraction(other.to_fraction() if isinstance(other, HalfInt) else other)

    def __hash__(self):
        return hash(self.to_fraction())

    def __float__(self):
        return self.doubled / 2

    def __repr__(self):
        return f"HalfInt({self.to_fraction()})"

    def __str__(self):
        return str(self.to_fraction())


def fmt_half(doubled: int) -> str:
    """Render a doubled integer as ``3/2`` or ``-1``."""
    return str(Fraction(doubled, 2))


def parse_scalar(text: str) -> Scalar:
    return Q(text.strip())


@lru_cache(maxsize=None)
def binom(top: Scalar, k: int) -> Scalar:
    """Generalized binomial ``top choose k`` for rational ``top`` and natural ``k``."""
    if k < 0:
        return Q(0)
    out = Q(1)
    for i in range(k):
        out = out * (top - i) / (i + 1)
    return out


@lru_cache(maxsize=None)
def binom_d(doubled_top: int, k: int) -> Scalar:
    """``binom`` with a doubled half-integer top."""
    return binom(Q(doubled_top, 2), k)


def binom_half(n: int) -> Scalar:
    """``binom(-1/2, n)``."""
    return binom(-HALF, n)


@lru_cache(maxsize=None)
def c_coeff(m: int, n: int) -> Scalar:
    """The antisymmetric table ``C_mn = (m-n)/(2(m+n+1)) binom(-1/2,m) binom(-1/2,n)``."""
    if m < 0 or n < 0:
        raise ValueError("C is indexed by naturals")
    return Q(m - n, 2 * (m + n + 1)) * binom_half(m) * binom_half(n)


def c_rt_sides(r: int, t: int, k: int) -> tuple[Scalar, Scalar]:
    """Both sides of the binomial convolution identity satisfied by ``C``."""
    lhs = sum(
        (binom(Q(m + r), r) * binom(Q(k - m + t), t) * c_coeff(m + r, k - m + t)
         for m in range(k + 1)),
        Q(0),
    )
    rhs = binom(Q(-r - t - 1), k) * c_coeff(r, t)
    return lhs, rhs


def c_rt_identity_check(r: int, t: int, k: int) -> bool:
    lhs, rhs = c_rt_sides(r, t, k)
    return lhs == rhs


# ---------------------------------------------------------------- shuffles

class Shuffle2(NamedTuple):
    """A 2-shuffle of ``1..r``: ``first`` increasing, ``rest`` its complement."""

    r: int
    first: tuple[int, ...]

    @property
    def rest(self) -> tuple[int, ...]:
        chosen = set(self.first)
        return tuple(i for i in range(1, self.r + 1) if i not in chosen)

    def sequence(self) -> tuple[int, ...]:
        return self.first + self.rest


class Shuffle3(NamedTuple):
    """A 3-shuffle of ``1..r`` with blocks of sizes ``mu``, ``nu`` and the rest."""

    r: int
    first: tuple[int, ...]
    second: tuple[int, ...]

    @property
    def third(self) -> tuple[int, ...]:
        used = set(self.first) | set(self.second)
        return tuple(i for i in range(1, self.r + 1) if i not in used)

    def sequence(self) -> tuple[int, ...]:
        return self.first + self.second + self.third

    def factors(self) -> tuple[Shuffle2, Shuffle2]:
        """The two 2-shuffles whose iterate is this shuffle.

        The outer one splits off ``first`` from ``1..r``; the inner one splits
        ``second`` off the remaining ``r - mu`` positions, renumbered.
        """
        outer = Shuffle2(self.r, self.first)
        remaining = outer.rest
        pos = {v: i + 1 for i, v in enumerate(remaining)}
        inner = Shuffle2(len(remaining), tuple(pos[v] for v in self.second))
        return outer, inner


def enumerate_shuffles2(r: int, mu: int) -> list[Shuffle2]:
    if not 0 <= mu <= r:
        return []
    return [Shuffle2(r, c) for c in combinations(range(1, r + 1), mu)]


def enumerate_shuffles3(r: int, mu: int, nu: int) -> list[Shuffle3]:
    if mu < 0 or nu < 0 or mu + nu > r:
        return []
    out = []
    for outer in enumerate_shuffles2(r, mu):
        remaining = outer.rest
        for inner in enumerate_shuffles2(len(remaining), nu):
            out.append(Shuffle3(r, outer.first, tuple(remaining[i - 1] for i in inner.first)))
    return out


def inversion_sign(seq: Sequence[int]) -> int:
    """Sign of a sequence of distinct integers read as a permutation."""
    inv = 0
    n = len(seq)
    for i in range(n):
        si = seq[i]
        for j in range(i + 1, n):
            if si > seq[j]:
                inv += 1
    return -1 if inv & 1 else 1


def shuffle_parity(s: Shuffle2 | Shuffle3) -> int:
    """Closed-form sign of a shuffle.

    A 2-shuffle with first block ``p_1 < ... < p_mu`` has sign
    ``(-1)^(p_1+...+p_mu) (-1)^(mu(mu+1)/2)``; a 3-shuffle multiplies the signs
    of its two factors.
    """
    if isinstance(s, Shuffle3):
        a, b = s.factors()
        return shuffle_parity(a) * shuffle_parity(b)
    mu = len(s.first)
    e = sum(s.first) + mu * (mu + 1) // 2
    return -1 if e & 1 else 1


def permutation_sign(perm: Sequence[int]) -> int:
    return inversion_sign(perm)


# ------------------------------------------------- brute-force sum identities

def random_table(seed: int, denom: int = 97) -> Callable[[tuple], Scalar]:
    """A lazily filled random rational function of a tuple key."""
    rng = random.Random(seed)
    store: dict = {}

    def table(key):
        if key not in store:
            store[key] = Q(rng.randint(-denom, denom), rng.randint(1, denom))
        return store[key]

    return table


def _sub_shuffles3(elems: tuple[int, ...], mu: int, nu: int) -> Iterator[tuple[tuple[int, ...], int]]:
    """3-shuffles of an increasing tuple, as (arranged sequence, sign)."""
    n = len(elems)
    for s in enumerate_shuffles3(n, mu, nu):
        yield tuple(elems[i - 1] for i in s.sequence()), shuffle_parity(s)


def _sub_shuffles2(elems: tuple[int, ...], mu: int) -> Iterator[tuple[tuple[int, ...], int]]:
    n = len(elems)
    for s in enumerate_shuffles2(n, mu):
        yield tuple(elems[i - 1] for i in s.sequence()), shuffle_parity(s)


def comb_identity_sides(which: int, r: int, mu: int, nu: int,
                        phi: Callable, psi: Callable) -> tuple[Scalar, Scalar]:
    """Both sides of one of the five removal identities for shuffle sums.

    ``which`` 1-3 remove an entry from the first, second or third block of a
    3-shuffle; 4 and 5 are the 2-shuffle versions removing from the first and
    the second block.  ``phi`` takes a tuple of ``r - 1`` indices and ``psi``
    a single index.
    """
    full = tuple(range(1, r + 1))
    lhs = Q(0)
    if which in (1, 2, 3):
        for seq, sign in _sub_shuffles3(full, mu, nu):
            if which == 1:
                offset, size = 0, mu
            elif which == 2:
                offset, size = mu, nu
            else:
                offset, size = mu + nu, r - mu - nu
            for i in range(1, size + 1):
                pos = offset + i - 1
                s = sign * (-1 if (offset + i - 1) & 1 else 1)
                lhs += s * phi(seq[:pos] + seq[pos + 1:]) * psi(seq[pos])
        dmu, dnu = {1: (1, 0), 2: (0, 1), 3: (0, 0)}[which]
        rhs = Q(0)
        for j in full:
            rest = full[:j - 1] + full[j:]
            inner = sum((sign * phi(seq) for seq, sign in _sub_shuffles3(rest, mu - dmu, nu - dnu)),
                        Q(0))
            rhs += (-1 if (j - 1) & 1 else 1) * psi(j) * inner
        return lhs, rhs
    if which in (4, 5):
        for seq, sign in _sub_shuffles2(full, mu):
            if which == 4:
                offset, size = 0, mu
            else:
                offset, size = mu, r - mu
            for i in range(1, size + 1):
                pos = offset + i - 1
                s = sign * (-1 if (offset + i - 1) & 1 else 1)
                lhs += s * phi(seq[:pos] + seq[pos + 1:]) * psi(seq[pos])
        dmu = 1 if which == 4 else 0
        rhs = Q(0)
        for j in full:
            rest = full[:j - 1] + full[j:]
            inner = sum((sign * phi(seq) for seq, sign in _sub_shuffles2(rest, mu - dmu)), Q(0))
            rhs += (-1 if (j - 1) & 1 else 1) * psi(j) * inner
        return lhs, rhs
    raise ValueError(f"unknown identity {which}")


def comb_identity_check(which: int, r: int, mu: int, nu: int, phi: Callable, psi: Callable) -> bool:
    lhs, rhs = comb_identity_sides(which, r, mu, nu, phi, psi)
    return lhs == rhs


