"""Branches, closed-form correlators and numerical summation of the series."""
import cmath
import math
import random

import pytest
import sympy

from twf.analysis import (BranchPoint, RegionError, Z1, Z2, branch_pow_half, correlate,
                          escalate, eval_iterate_numeric, eval_product_numeric,
                          n_point_product_numeric, reconstruct_correlator, region_flags)
from twf.fock import U0, WWord, parse_vword
from twf.vertex import actual_yw

E1, EB1 = parse_vword("e1(-1/2)"), parse_vword("eb1(-1/2)")
SQRT_HALF = 2 ** -0.5


# ------------------------------------------------------------------ branches

def test_half_power_branches():
    assert branch_pow_half(BranchPoint(4, 0)) == pytest.approx(2)
    assert branch_pow_half(BranchPoint(4, 1)) == pytest.approx(-2)
    assert branch_pow_half(1j, 0) == pytest.approx(cmath.exp(1j * math.pi / 4))


def test_cut_sits_on_the_positive_axis():
    below = branch_pow_half(complex(1, -1e-12), 0)
    assert below == pytest.approx(-1, abs=1e-9)


def test_branch_point_rejects_zero():
    with pytest.raises(ValueError):
        BranchPoint(0)


def test_branch_flip():
    rng = random.Random(7)
    for _ in range(100):
        z = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        p = rng.randint(-3, 3)
        assert branch_pow_half(z, p + 1) == pytest.approx(-branch_pow_half(z, p), rel=1e-12)


# --------------------------------------------------------------- closed form

def test_dual_pair_correlator():
    f = reconstruct_correlator(E1, EB1, U0, U0)
    assert f.g.as_expr() == 1
    assert (f.q1, f.q2, f.q12) == (1, 0, 1)


def test_single_operator_has_no_second_pole():
    f = reconstruct_correlator(E1, (), WWord((("eb1", 1),)), U0)
    assert f.q2 == f.q12 == 0 and not f.g.is_zero


def test_vanishing_correlator():
    f = reconstruct_correlator(E1, (), WWord((("eb1", 1),)), WWord((), ("e1",)))
    assert f.g.is_zero and f.evaluate(2, 1) == 0


def test_closed_form_is_a_rational_function():
    f = reconstruct_correlator(parse_vword("e1(-1/2)e2(-1/2)"), parse_vword("eb1(-1/2)"),
                               WWord((("eb2", 1),)), U0)
    assert isinstance(f.g, sympy.Poly) and f.g.free_symbols <= {Z1, Z2}


# ------------------------------------------------------------ numerical sums

@pytest.mark.parametrize("p", [0, 1])
def test_product_at_two_one(p):
    val = eval_product_numeric(E1, EB1, U0, U0, 2, 1, p, cutoff=60)
    assert val.converged and val.value == pytest.approx(SQRT_HALF, abs=1e-12)


def test_product_outside_its_region_is_flagged():
    val = eval_product_numeric(E1, EB1, U0, U0, 1, 2, 0, cutoff=40)
    assert not val.converged


def test_iterate_inside_its_region():
    f = reconstruct_correlator(E1, EB1, U0, U0)
    z1, z2 = complex(2.2, 0.4), complex(2.0, 0.3)
    val = eval_iterate_numeric(E1, EB1, U0, U0, z1, z2, 0, cutoff=60)
    assert abs(val.value - f.evaluate(z1, z2, 0)) < 1e-8


def test_iterate_rejects_coincident_points():
    with pytest.raises(RegionError):
        eval_iterate_numeric(E1, EB1, U0, U0, 1.5, 1.5)


def test_single_operator_sum_matches_coefficients():
    w = WWord((("eb1", 1),))
    ser = actual_yw(E1, w, (-6, 6))
    exact = sum(complex(float(c.get(U0, 0))) * 3 ** (e / 2) for (e,), c in ser.coeffs.items())
    val = n_point_product_numeric([E1], w, U0, [3], 0, cutoff=10)
    assert exact != 0 and val.value == pytest.approx(exact)


def test_two_point_sum_is_the_product():
    a = n_point_product_numeric([E1, EB1], U0, U0, [3, 1], 0, cutoff=40)
    b = eval_product_numeric(E1, EB1, U0, U0, 3, 1, 0, cutoff=40)
    assert a.value == b.value


def test_three_point_partial_sums_stabilize():
    vs = [E1, EB1, E1]
    zs = [4.0, 2.0 + 0.5j, 1.0]
    w, wp = WWord((("eb1", 1),)), U0
    vals = [n_point_product_numeric(vs, w, wp, zs, 0, c).value for c in (20, 40, 60)]
    d1, d2 = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
    assert d2 < d1 or d1 < 1e-12


def test_escalate_stops_when_stable():
    value, history = escalate(lambda c: eval_product_numeric(E1, EB1, U0, U0, 3, 1, 0, c),
                              start=10, tol=1e-10)
    assert value.value == pytest.approx(1 / (3 ** 0.5 * 2), abs=1e-9)
    assert len(history) >= 2


# ------------------------------------------------------------ one record

def test_correlate_record_on_real_points():
    rec = correlate(E1, EB1, U0, U0, 2, 1, 0)
    assert rec["closed_form_value"][0] == pytest.approx(SQRT_HALF)
    assert rec["abs_errors"]["product"] < 1e-8
    assert rec["region_flags"]["product_region"] and not rec["branch_mismatch"]


def test_correlate_agrees_with_iterate_across_the_cut():
    rec = correlate(E1, EB1, U0, U0, complex(-1, 0.2), complex(-1, -0.2), 0)
    assert rec["abs_errors"]["iterate"] < 1e-8


def test_correlate_reports_branch_mismatch():
    rec = correlate(E1, EB1, U0, U0, complex(1, 0.01), complex(1, -0.3), 0)
    assert rec["branch_mismatch"]
    assert rec["iterate_value"] is None and rec["iterate_value_outside_arg_range"] is not None


@pytest.mark.parametrize("z1, z2", [(0, 1), (1, 0), (1.5, 1.5)])
def test_correlate_rejects_poles(z1, z2):
    with pytest.raises(RegionError):
        correlate(E1, EB1, U0, U0, z1, z2)


def test_strict_mode_rejects_points_outside_both_regions():
    assert not any(region_flags(1, 3j).values())
    with pytest.raises(RegionError):
        correlate(E1, EB1, U0, U0, 1, 3j, strict=True)
    rec = correlate(E1, EB1, U0, U0, 1, 3j)
    assert rec["product_value"] is None and rec["iterate_value"] is None


@pytest.mark.parametrize("v1, v2, w, wp", [
    ("e1(-1/2)", "eb1(-1/2)", WWord((("e1", 1),)), WWord((("e1", 1),))),
    ("e1(-3/2)", "eb1(-1/2)", U0, U0),
    ("e1(-1/2)", "e2(-1/2)", WWord((("eb2", 1),)), WWord((), ("e1",))),
])
def test_product_matches_closed_form_on_more_cases(v1, v2, w, wp):
    v1, v2 = parse_vword(v1), parse_vword(v2)
    f = reconstruct_correlator(v1, v2, w, wp)
    rng = random.Random(3)
    for p in (0, 1):
        for _ in range(4):
            z1 = cmath.rect(rng.uniform(1, 3), rng.uniform(0, 2 * math.pi))
            z2 = z1 * cmath.rect(rng.uniform(0.05, 0.5), rng.uniform(0, 2 * math.pi))
            val = eval_product_numeric(v1, v2, w, wp, z1, z2, p, cutoff=80)
            assert abs(val.value - f.evaluate(z1, z2, p)) < 1e-8
