"""Windowed multivariable formal series with half-integer exponents.

A :class:`Series` stores coefficients on a finite window.  Inside the window
every coefficient is exact (missing keys mean zero); outside it nothing is
known and asking raises :class:`WindowUnderflow`.  Exponents are doubled ints.

Kernels such as ``f_mn(x, y)`` are handled as short sums of monomials
``X^a Y^b (X - Y)^g``: derivatives act on that list and coefficients are
extracted one at a time from the chosen expansion, so nothing infinite is
ever materialized.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Iterator

from .algebra import Q, Scalar, binom, binom_d

Window = tuple  # tuple of (lo, hi) per variable; doubled ints or None


class WindowUnderflow(LookupError):
    """A coefficient outside the window where the series is known."""


def full_window(nvars: int, lo: int | None, hi: int | None) -> Window:
    return tuple((lo, hi) for _ in range(nvars))


def in_window(exps: tuple, window: Window) -> bool:
    for e, (lo, hi) in zip(exps, window):
        if lo is not None and e < lo:
            return False
        if hi is not None and e > hi:
            return False
    return True


@dataclass
class Series:
    """Coefficients on a window; values are scalars or linear combinations."""

    nvars: int
    window: Window
    coeffs: dict = field(default_factory=dict)

    def coefficient_at(self, exps: tuple, zero=0):
        exps = tuple(exps)
        if not in_window(exps, self.window):
            raise WindowUnderflow(f"exponents {exps} outside window {self.window}")
        return self.coeffs.get(exps, zero)

    def items(self):
        return self.coeffs.items()

    def add_term(self, exps: tuple, value) -> None:
        if not value:
            return
        cur = self.coeffs.get(exps)
        cur = value if cur is None else cur + value
        if cur:
            self.coeffs[exps] = cur
        else:
            self.coeffs.pop(exps, None)

    def restricted(self, window: Window) -> "Series":
        win = tuple(_meet(a, b) for a, b in zip(self.window, window))
        return Series(self.nvars, win, {e: c for e, c in self.coeffs.items() if in_window(e, win)})

    def __sub__(self, other: "Series") -> "Series":
        win = tuple(_meet(a, b) for a, b in zip(self.window, other.window))
        out = Series(self.nvars, win)
        for e, c in self.coeffs.items():
            if in_window(e, win):
                out.add_term(e, c)
        for e, c in other.coeffs.items():
            if in_window(e, win):
                out.add_term(e, -c)
        return out

    def is_zero(self) -> bool:
        return not any(self.coeffs.values())

    def to_json(self, value_to_json=str) -> dict:
        return {
            "var_count": self.nvars,
            "window": [list(w) for w in self.window],
            "entries": [{"exps": list(e), "coeff": value_to_json(c)}
                        for e, c in sorted(self.coeffs.items())],
        }


def _meet(a, b):
    lo = a[0] if b[0] is None else (b[0] if a[0] is None else max(a[0], b[0]))
    hi = a[1] if b[1] is None else (b[1] if a[1] is None else min(a[1], b[1]))
    return (lo, hi)


def grid(lo: int, hi: int, parity: int) -> range:
    """Doubled exponents in ``[lo, hi]`` with the given parity (0 integral, 1 half)."""
    start = lo if (lo - parity) % 2 == 0 else lo + 1
    return range(start, hi + 1, 2)


# ---------------------------------------------------------------- binomials

def binom_expand(alpha2: int, sign: int, direction: str, window: Window) -> Series:
    """Expansion of ``(x + sign*y)^alpha`` in the variables ``(x, y)``.

    ``direction='xy'`` expands in nonnegative powers of ``y``; ``'yx'`` in
    nonnegative powers of ``x`` and then needs ``sign = 1`` or an integral
    exponent.
    """
    out = Series(2, window)
    (xlo, xhi), (ylo, yhi) = window
    if direction == "xy":
        for k in range(0, (yhi // 2) + 1 if yhi is not None else 0):
            if 2 * k < ylo:
                continue
            xe = alpha2 - 2 * k
            if xlo <= xe <= xhi:
                out.add_term((xe, 2 * k), binom_d(alpha2, k) * (sign ** k))
    elif direction == "yx":
        if sign != 1 and alpha2 % 2:
            raise ValueError("branch of (x - y)^alpha for y dominant is not fixed")
        pre = 1 if sign == 1 else (-1) ** ((alpha2 // 2) % 2)
        for k in range(0, (xhi // 2) + 1):
            if 2 * k < xlo:
                continue
            ye = alpha2 - 2 * k
            if ylo <= ye <= yhi:
                # (sign*y + x)^alpha = sign^alpha (y + sign*x)^alpha
                out.add_term((2 * k, ye), pre * binom_d(alpha2, k) * (sign ** k))
    else:
        raise ValueError(direction)
    return out


# ------------------------------------------------------------------ kernels

KERNEL_F = {(-1, 1, -1): Q(1)}
KERNEL_G = {(-1, 1, -1): Q(1), (-1, -1, 0): Q(1, 2)}


def _diff(terms: dict, wrt: str) -> dict:
    out: dict = {}
    for (a2, b2, g), c in terms.items():
        if wrt == "x":
            pieces = [((a2 - 2, b2, g), c * Q(a2, 2)), ((a2, b2, g - 1), c * g)]
        else:
            pieces = [((a2, b2 - 2, g), c * Q(b2, 2)), ((a2, b2, g - 1), -c * g)]
        for key, v in pieces:
            if v:
                nv = out.get(key, 0) + v
                if nv:
                    out[key] = nv
                else:
                    out.pop(key, None)
    return out


@lru_cache(maxsize=None)
def kernel_terms(kind: str, m: int, n: int) -> tuple:
    """``(1/m!n!) d_x^m d_y^n`` of ``f`` or ``g`` as monomials ``X^a Y^b (X-Y)^g``."""
    terms = dict(KERNEL_F if kind == "f" else KERNEL_G)
    for _ in range(m):
        terms = _diff(terms, "x")
    for _ in range(n):
        terms = _diff(terms, "y")
    scale = Q(1, factorial(m) * factorial(n))
    return tuple(sorted((k, v * scale) for k, v in terms.items()))


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to expand.

    ``kind`` is ``'f'`` or ``'g'``.  Without ``shift`` the kernel is evaluated
    at ``(X, Y) = (x, y)``; with it at ``(X, Y) = (x + y, y)`` for direction
    ``'xy'`` and ``(y + x, y)`` for ``'yx'``, which is where products and
    iterates need it.  The output variables are always ``(x, y)``.
    """

    kind: str
    m: int = 0
    n: int = 0
    direction: str = "xy"
    shift: bool = False


def kernel_coefficient(spec: KernelSpec, xe: int, ye: int) -> Scalar:
    """One coefficient of the expanded kernel at ``x^{xe/2} y^{ye/2}``."""
    total = Q(0)
    for (a2, b2, g), c in kernel_terms(spec.kind, spec.m, spec.n):
        if not spec.shift:
            if spec.direction == "xy":
                # x^a y^b (x - y)^g, powers of y/x
                d = ye - b2
                if d < 0 or d % 2:
                    continue
                i = d // 2
                if a2 + 2 * g - 2 * i != xe:
                    continue
                total += c * binom(Q(g), i) * (-1) ** i
            else:
                # (x - y)^g = (-1)^g (y - x)^g, powers of x/y
                d = xe - a2
                if d < 0 or d % 2:
                    continue
                i = d // 2
                if b2 + 2 * g - 2 * i != ye:
                    continue
                total += c * binom(Q(g), i) * (-1) ** (g + i)
        else:
            if spec.direction == "xy":
                # (x + y)^a y^b x^g with y small
                d = ye - b2
                if d < 0 or d % 2:
                    continue
                k = d // 2
                if a2 - 2 * k + 2 * g != xe:
                    continue
                total += c * binom_d(a2, k)
            else:
                # (y + x)^a y^b x^g with x small
                d = xe - 2 * g
                if d < 0 or d % 2:
                    continue
                k = d // 2
                if a2 + b2 - 2 * k != ye:
                    continue
                total += c * binom_d(a2, k)
    return total


def expand_kernel(spec: KernelSpec, window: Window) -> Series:
    """All coefficients of the kernel expansion inside a finite window."""
    (xlo, xhi), (ylo, yhi) = window
    out = Series(2, window)
    for xe in range(xlo, xhi + 1):
        for ye in range(ylo, yhi + 1):
            c = kernel_coefficient(spec, xe, ye)
            if c:
                out.add_term((xe, ye), c)
    return out


def taylor_shift(s: Series, window: Window) -> Series:
    """Substitute ``y + x`` into a one-variable series, expanding in powers of ``x``.

    The output variables are ``(x, y)``.  The coefficient of ``x^A y^B`` is
    ``binom(A + B, A)`` times the input coefficient at ``A + B``, so it is
    exact whenever ``A + B`` lies in the input window.
    """
    (xlo, xhi), (ylo, yhi) = window
    out = Series(2, window)
    start = max(0, xlo)
    start += start % 2
    for xe in range(start, xhi + 1, 2):
        for ye in range(ylo, yhi + 1):
            src = xe + ye
            c = s.coefficient_at((src,))
            if c:
                out.add_term((xe, ye), c * binom_d(src, xe // 2))
    return out


def series_product(a: Series, b: Series) -> Series:
    """Product of series in disjoint variables (outer product of coefficients)."""
    out = Series(a.nvars + b.nvars, a.window + b.window)
    for ea, ca in a.coeffs.items():
        for eb, cb in b.coeffs.items():
            out.add_term(ea + eb, ca * cb)
    return out


def iter_window(window: Window, parities: tuple) -> Iterator[tuple]:
    return product(*(grid(lo, hi, p) for (lo, hi), p in zip(window, parities)))


def series_mul(a: Series, b: Series) -> Series:
    """Cauchy product of two series in the same variables.

    Both factors are taken to vanish below their windows in every variable
    (lower truncated).  The result window is where every contributing pair
    is known: ``[lo_a + lo_b, min(hi_a + lo_b, lo_a + hi_b)]`` per variable.
    """
    if a.nvars != b.nvars:
        raise ValueError("series_mul needs the same variables on both sides")
    win = []
    for (la, ha), (lb, hb) in zip(a.window, b.window):
        if la is None or lb is None:
            raise ValueError("series_mul needs lower-truncated factors")
        his = [h + l for h, l in ((ha, lb), (hb, la)) if h is not None]
        win.append((la + lb, min(his) if his else None))
    win = tuple(win)
    out = Series(a.nvars, win)
    for ea, ca in a.coeffs.items():
        for eb, cb in b.coeffs.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if in_window(e, win):
                out.add_term(e, ca * cb)
    return out


def series_add(a: Series, b: Series) -> Series:
    """Sum on the common window."""
    win = tuple(_meet(x, y) for x, y in zip(a.window, b.window))
    out = Series(a.nvars, win)
    for s in (a, b):
        for e, c in s.coeffs.items():
            if in_window(e, win):
                out.add_term(e, c)
    return out


def mul_binomial(s: Series, alpha2: int, window: Window) -> Series:
    """``s(x, y) * (x + y)^alpha`` expanded in nonnegative powers of ``y``.

    ``s`` must vanish below its window in ``y``; then each output
    coefficient is a finite sum ``sum_k binom(alpha, k) s(X - alpha + k, Y - k)``.
    Asking for a coefficient that needs an unknown input raises
    :class:`WindowUnderflow`.
    """
    (sxlo, sxhi), (sylo, syhi) = s.window
    if sylo is None:
        raise ValueError("mul_binomial needs a lower bound in y")
    out = Series(2, window)
    (xlo, xhi), (ylo, yhi) = window
    for X in range(xlo, xhi + 1):
        for Y in range(ylo, yhi + 1):
            total = 0
            k = 0
            while Y - 2 * k >= sylo:
                src = (X - alpha2 + 2 * k, Y - 2 * k)
                c = s.coefficient_at(src)
                if c:
                    total = total + binom_d(alpha2, k) * c
                k += 1
            out.add_term((X, Y), total)
    return out
