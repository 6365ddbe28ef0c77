"""Numerical evaluation of two- and three-point correlation series on branches.

Exact coefficient tables come from the symbolic engine once; this module
only sums them at complex points.  The branch of ``log z`` is
``l_p(z) = log|z| + i(arg z + 2 pi p)`` with ``arg z`` in ``[0, 2 pi)``, so the
positive real axis is where the cut sits.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy

from .algebra import Q, binom_d
from .fock import VElement, WElement, WWord, pair_elements, v_weight2
from .vertex import _as_velem, actual_yw, y_v

TWO_PI = 2 * math.pi


class RegionError(ValueError):
    """A point outside the region where the requested series converges."""


@dataclass(frozen=True)
class BranchPoint:
    z: complex
    p: int = 0

    def __post_init__(self):
        if self.z == 0:
            raise ValueError("the branch point needs z != 0")


def arg0(z: complex) -> float:
    """``arg z`` normalized to ``[0, 2 pi)``."""
    a = cmath.phase(z)
    return a + TWO_PI if a < 0 else a


def log_branch(z: complex, p: int) -> complex:
    if z == 0:
        raise ValueError("log of zero")
    return complex(math.log(abs(z)), arg0(z) + TWO_PI * p)


def branch_pow(z: complex, exponent, p: int) -> complex:
    """``e^{exponent * l_p(z)}`` for a rational exponent."""
    return cmath.exp(float(exponent) * log_branch(z, p))


def branch_pow_half(bp: BranchPoint | complex, p: int | None = None) -> complex:
    """``(z^{1/2})_p = (-1)^p |z|^{1/2} e^{i arg(z) / 2}``."""
    if not isinstance(bp, BranchPoint):
        bp = BranchPoint(complex(bp), 0 if p is None else p)
    return branch_pow(bp.z, 0.5, bp.p)


# ---------------------------------------------------------------- regions

def in_product_region(z1: complex, z2: complex) -> bool:
    return abs(z1) > abs(z2) > 0


def in_iterate_region(z1: complex, z2: complex) -> bool:
    return (abs(z2) > abs(z1 - z2) > 0
            and abs(arg0(z1) - arg0(z2)) < math.pi / 2)


def region_flags(z1: complex, z2: complex) -> dict:
    return {"product_region": in_product_region(z1, z2),
            "iterate_region": in_iterate_region(z1, z2),
            "iterate_modulus_only": abs(z2) > abs(z1 - z2) > 0}


# ------------------------------------------------- exact coefficient tables

def _weight(v: VElement) -> Q:
    return max(Q(v_weight2(k), 2) for k in v)


def _pair_word(wprime: WWord, elem: WElement):
    return pair_elements(WElement({wprime: Q(1)}), elem)


@lru_cache(maxsize=256)
def product_table(vs: tuple, w: WWord, wprime: WWord, cutoff: int) -> tuple:
    """``<w', Y(v_1, z_1) ... Y(v_n, z_n) w>`` as ``((exps, coeff), ...)``.

    Each operator is expanded from the lowest exponent the grading allows
    for ``cutoff`` steps, innermost first.  The outermost one keeps only
    components of weight ``wt w'``.
    """
    layers = [((), WElement({w: Q(1)}))]
    for depth, v in enumerate(reversed(vs)):
        cap = wprime.weight if depth == len(vs) - 1 else None
        v = _as_velem(v)
        wt = _weight(v)
        nxt = []
        for exps, u in layers:
            wt_u = max(k.weight for k in u)
            lo = -int(2 * (wt + wt_u))
            for (e,), res in actual_yw(v, u, (lo, lo + 2 * cutoff - 1), cap).coeffs.items():
                nxt.append(((e,) + exps, res))
        layers = nxt
    out = []
    for exps, u in layers:
        c = _pair_word(wprime, u)
        if c:
            out.append((exps, c))
    return tuple(sorted(out))


@lru_cache(maxsize=256)
def iterate_table(v1, v2, w: WWord, wprime: WWord, cutoff: int) -> tuple:
    """``<w', Y(Y_V(v1, z0) v2, z2) w>`` as ``(((e0, e2), coeff), ...)``."""
    v1, v2 = _as_velem(v1), _as_velem(v2)
    e0min = -int(2 * (_weight(v1) + _weight(v2)))
    inner = y_v(v1, v2, e0min + 2 * cutoff - 1)
    cap = wprime.weight
    out = []
    for (e0,), u in inner.coeffs.items():
        wt_u = max(Q(v_weight2(k), 2) for k in u)
        lo = -int(2 * (wt_u + w.weight))
        for (e2,), res in actual_yw(u, w, (lo, lo + 2 * cutoff - 1), cap).coeffs.items():
            c = _pair_word(wprime, res)
            if c:
                out.append(((e0, e2), c))
    return tuple(sorted(out))


def _as_vtuple(v):
    return v if isinstance(v, tuple) else tuple(sorted(v.items()))


# ------------------------------------------------------------ evaluation

@dataclass
class NumericValue:
    value: complex
    error: float
    converged: bool
    terms: int


def _sum_terms(terms: list[tuple[float, complex]], ratio: float) -> NumericValue:
    """Sum terms ordered by a step index; estimate the tail geometrically."""
    if not terms:
        return NumericValue(0j, 0.0, True, 0)
    steps = np.array([s for s, _ in terms], dtype=float)
    vals = np.array([v for _, v in terms], dtype=complex)
    total = complex(vals.sum())
    last = steps.max()
    tail_mag = float(np.abs(vals[steps >= last - 1]).sum())
    if ratio < 1:
        err = tail_mag * ratio / (1 - ratio)
    else:
        err = math.inf
    return NumericValue(total, err, ratio < 1 and math.isfinite(err), len(terms))


def eval_product_numeric(v1, v2, w: WWord, wprime: WWord, z1: complex, z2: complex,
                         p: int = 0, cutoff: int = 40) -> NumericValue:
    """Partial sum of the product series on branch ``p`` (both variables)."""
    return n_point_product_numeric([v1, v2], w, wprime, [z1, z2], p, cutoff)


def n_point_product_numeric(vs: list, w: WWord, wprime: WWord, zs: list, p: int = 0,
                            cutoff: int = 40) -> NumericValue:
    """Nested partial sum of ``<w', Y(v_1, z_1) ... Y(v_n, z_n) w>`` on branch ``p``."""
    if not 1 <= len(vs) <= 3:
        raise ValueError("only n <= 3 is supported")
    zs = [complex(z) for z in zs]
    if any(z == 0 for z in zs):
        raise RegionError("points must be nonzero")
    table = product_table(tuple(_as_vtuple(v) for v in vs), w, wprime, cutoff)
    logs = [log_branch(z, p) for z in zs]
    ratio = max((abs(zs[i + 1] / zs[i]) for i in range(len(zs) - 1)), default=0.0)
    terms = []
    for exps, c in table:
        val = complex(float(c)) * cmath.exp(sum(e / 2 * lg for e, lg in zip(exps, logs)))
        # the later variables' exponents count the expansion steps
        step = sum(e for e in exps[1:]) / 2
        terms.append((step, val))
    return _sum_terms(terms, ratio)


def eval_iterate_numeric(v1, v2, w: WWord, wprime: WWord, z1: complex, z2: complex,
                         p: int = 0, cutoff: int = 40) -> NumericValue:
    """Partial sum of the iterate series in ``z1 - z2`` and ``z2`` on branch ``p``."""
    z1, z2 = complex(z1), complex(z2)
    z0 = z1 - z2
    if z0 == 0:
        raise RegionError("z1 = z2 is a pole")
    if z2 == 0:
        raise RegionError("z2 must be nonzero")
    table = iterate_table(_as_vtuple(v1), _as_vtuple(v2), w, wprime, cutoff)
    l2 = log_branch(z2, p)
    ratio = abs(z0 / z2)
    terms = []
    for (e0, e2), c in table:
        val = complex(float(c)) * z0 ** (e0 // 2) * cmath.exp(e2 / 2 * l2)
        terms.append((e0 / 2, val))
    return _sum_terms(terms, ratio)


def escalate(evaluate, start: int = 20, tol: float = 1e-12, limit: int = 320) -> tuple[NumericValue, list]:
    """Double the cutoff until two successive partial sums agree within ``tol``."""
    history = []
    cutoff = start
    prev = None
    while cutoff <= limit:
        cur = evaluate(cutoff)
        history.append((cutoff, cur.value))
        if prev is not None and abs(cur.value - prev.value) < tol:
            return cur, history
        prev = cur
        cutoff *= 2
    return NumericValue(prev.value, math.inf, False, prev.terms), history


# ---------------------------------------------------- closed-form correlator

@dataclass
class AlgebraicCorrelator:
    """``z1^{|v1|/2} z2^{|v2|/2} g / (z1^q1 z2^q2 (z1 - z2)^q12)``."""

    g: sympy.Poly
    q1: int
    q2: int
    q12: int
    par1: int
    par2: int

    def evaluate(self, z1: complex, z2: complex, p: int = 0) -> complex:
        z1, z2 = complex(z1), complex(z2)
        num = complex(self.g.eval({Z1: z1, Z2: z2})) if self.g.free_symbols else complex(self.g.as_expr())
        pref = branch_pow(z1, Q(self.par1, 2), p) * branch_pow(z2, Q(self.par2, 2), p)
        return pref * num / (z1 ** self.q1 * z2 ** self.q2 * (z1 - z2) ** self.q12)

    def to_json(self) -> dict:
        return {"g": str(self.g.as_expr()), "q1": self.q1, "q2": self.q2, "q12": self.q12,
                "parities": [self.par1, self.par2]}


Z1, Z2 = sympy.symbols("z1 z2")


class ReconstructionError(RuntimeError):
    """The computed window could not certify a polynomial numerator."""


def reconstruct_correlator(v1, v2, w: WWord, wprime: WWord, margin: int = 4,
                           max_q2: int = 8) -> AlgebraicCorrelator:
    """Exact algebraic form of the two-point correlator from the iterate series.

    ``h(x0, x2) = x0^q12 (x0 + x2)^{q1 - |v1|/2} x2^{q2 - |v2|/2} <w', iterate>``
    is homogeneous; it is a polynomial exactly when its coefficients vanish
    past its degree, which is checked on ``margin`` extra steps.  Then
    ``g(z1, z2) = h(z1 - z2, z2)`` and common factors are cancelled.
    """
    from .checks import pole_order

    v1e, v2e = _as_velem(v1), _as_velem(v2)
    par1 = len(next(iter(v1e))) & 1
    par2 = len(next(iter(v2e))) & 1
    q1 = pole_order(next(iter(v1e)), WElement({w: Q(1)}))
    e0min = -int(2 * (_weight(v1e) + _weight(v2e)))
    q12 = max(0, -e0min // 2)
    for q2 in range(0, max_q2 + 1):
        # total doubled degree of the paired iterate
        c2 = 2 * (wprime.weight - _weight(v1e) - _weight(v2e) - w.weight)
        deg2 = c2 + 2 * q12 + 2 * q1 - par1 + 2 * q2 - par2
        if deg2 < 0 or deg2 % 2:
            continue
        deg = deg2 // 2
        reach = deg + margin - q12
        table = iterate_table(_as_vtuple(v1), _as_vtuple(v2), w, wprime,
                              max(reach - e0min // 2 + 1, wprime.weight + 1))
        # x0^q12 (x0 + x2)^s x2^t: the entry at x0^{e0} lands on x0^{q12 + j + e0}
        s2 = 2 * q1 - par1
        h: dict = {}
        for (f0, _), c in table:
            for a in range(max(0, q12 + f0 // 2), deg + margin + 1):
                j = a - q12 - f0 // 2
                coef = binom_d(s2, j)
                if coef:
                    h[a] = h.get(a, 0) + coef * c
        h = {a: c for a, c in h.items() if c}
        if any(a > deg for a in h):
            continue
        x0, x2 = sympy.symbols("x0 x2")
        hexpr = sum(sympy.Rational(int(c.numerator), int(c.denominator)) * x0 ** a * x2 ** (deg - a)
                    for a, c in h.items()) if h else sympy.Integer(0)
        g = sympy.Poly(sympy.expand(hexpr.subs({x0: Z1 - Z2, x2: Z2})), Z1, Z2)
        return _reduce(AlgebraicCorrelator(g, q1, q2, q12, par1, par2))
    raise ReconstructionError("no polynomial numerator certified up to the pole-order limit")


def _reduce(f: AlgebraicCorrelator) -> AlgebraicCorrelator:
    g, q1, q2, q12 = f.g, f.q1, f.q2, f.q12
    if g.is_zero:
        return AlgebraicCorrelator(g, 0, 0, 0, f.par1, f.par2)
    d1 = sympy.Poly(Z1, Z1, Z2)
    d2 = sympy.Poly(Z2, Z1, Z2)
    d12 = sympy.Poly(Z1 - Z2, Z1, Z2)
    for div, attr in ((d1, "q1"), (d2, "q2"), (d12, "q12")):
        while True:
            count = {"q1": q1, "q2": q2, "q12": q12}[attr]
            if count == 0:
                break
            quo, rem = g.div(div)
            if not rem.is_zero:
                break
            g = quo
            if attr == "q1":
                q1 -= 1
            elif attr == "q2":
                q2 -= 1
            else:
                q12 -= 1
    return AlgebraicCorrelator(g, q1, q2, q12, f.par1, f.par2)


# ------------------------------------------------------------ one record

def _num(z: complex | None):
    return None if z is None else [z.real, z.imag]


def correlate(v1, v2, w: WWord, wprime: WWord, z1: complex, z2: complex, p: int = 0,
              cutoff: int = 60, strict: bool = False) -> dict:
    """Product, iterate and closed-form values at one point, with region flags.

    A series is summed only inside its region; outside it the value is
    ``None``.  ``strict`` turns a point outside both regions into a
    :class:`RegionError`.  ``branch_mismatch`` is set when the iterate series
    converges in modulus but differs from the closed form, which is what
    happens once ``|arg z1 - arg z2|`` leaves the allowed range.
    """
    z1, z2 = complex(z1), complex(z2)
    if z1 == 0 or z2 == 0:
        raise RegionError("points must be nonzero")
    if z1 == z2:
        raise RegionError("z1 = z2 is a pole")
    flags = region_flags(z1, z2)
    if strict and not (flags["product_region"] or flags["iterate_region"]):
        raise RegionError(f"({z1}, {z2}) lies in neither convergence region")
    closed = reconstruct_correlator(v1, v2, w, wprime).evaluate(z1, z2, p)
    prod = eval_product_numeric(v1, v2, w, wprime, z1, z2, p, cutoff) \
        if flags["product_region"] else None
    it = eval_iterate_numeric(v1, v2, w, wprime, z1, z2, p, cutoff) \
        if flags["iterate_modulus_only"] else None
    tol = 1e-8
    rec = {"z1": _num(z1), "z2": _num(z2), "p": p, "cutoff": cutoff,
           "product_value": _num(prod and prod.value),
           "iterate_value": _num(it and it.value),
           "closed_form_value": _num(closed),
           "abs_errors": {"product": None if prod is None else abs(prod.value - closed),
                          "iterate": None if it is None else abs(it.value - closed)},
           "region_flags": flags}
    rec["branch_mismatch"] = bool(it is not None and it.converged
                                  and abs(it.value - closed) > tol)
    if it is not None and not flags["iterate_region"]:
        rec["iterate_value_outside_arg_range"] = rec.pop("iterate_value")
        rec["iterate_value"] = None
    return rec
