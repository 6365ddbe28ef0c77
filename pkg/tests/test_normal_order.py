"""Normal ordering of mode words and of generating-series products."""
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from twf.algebra import Q
from twf.fock import WElement, WWord, basis_labels, pair, parse_wword, welem
from twf.normal_order import (apply_mode_word, apply_ordered, nord_apply, nord_series_coefficient,
                              normal_order_word, zero_nord)
from twf.suites import nord_examples
from twf.symbolic import SymLabel

LABELS = basis_labels(2)
HALF = Q(1, 2)


def test_displayed_expansions():
    assert all(rec["status"] == "pass" for rec in nord_examples())


def test_two_zero_modes_concrete():
    assert dict(zero_nord(("e1", "eb1"))) == {("e1", "eb1"): 1, (): -HALF}
    assert dict(zero_nord(("e1", "e2"))) == {("e1", "e2"): 1}


def test_block_order_and_sign():
    word = (("e1", 1), ("eb1", -1))
    assert dict(normal_order_word(word)) == {((("eb1", -1),), (("e1", 1),), ()): -1}


@pytest.mark.parametrize("r", range(7))
def test_left_and_right_recursions_agree(r):
    for labels in product(LABELS, repeat=r):
        assert zero_nord(labels) == zero_nord(labels, right=True)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 7))
def test_zero_expansion_is_multilinear(r):
    """Each label shows up exactly once per term: kept, or inside one pairing."""
    labels = tuple(SymLabel(i) for i in range(r))
    for kept, coeff in zero_nord(labels).items():
        terms = coeff.terms if hasattr(coeff, "terms") else {(): coeff}
        for mono, c in terms.items():
            used = [i for var in mono for i in var] + [int(s) for s in kept]
            assert sorted(used) == list(range(r))


def test_words_without_zero_or_positive_modes_are_unchanged():
    word = (("e1", -1), ("eb2", -3), ("e1", -1))
    op = normal_order_word(word)
    assert dict(op) == {(word, (), ()): 1}
    assert apply_ordered(op, welem()) == apply_mode_word(word, welem())


mode_letter = st.tuples(st.sampled_from(LABELS), st.integers(-2, 2))


@settings(max_examples=100, deadline=None)
@given(st.lists(mode_letter, max_size=3), mode_letter, mode_letter,
       st.lists(mode_letter, max_size=3))
def test_swapping_letters_flips_sign(left, a, b, right):
    """Normal ordering is antisymmetric across classes and among positive modes.

    Two negative or two zero letters are free, so swapping them gives a new word.
    """
    def cls(n):
        return (n > 0) - (n < 0)
    if cls(a[1]) == cls(b[1]) != 1:
        return
    w = parse_wword("e1(-1)eb1(-1)eb2(-2)u0")
    one = apply_ordered(normal_order_word(tuple(left + [a, b] + right)), w)
    two = apply_ordered(normal_order_word(tuple(left + [b, a] + right)), w)
    assert one + two == 0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(LABELS), st.integers(-2, 0)), max_size=3),
       st.lists(st.tuples(st.sampled_from(LABELS), st.integers(1, 2)), max_size=2))
def test_ordered_words_act_as_written(negs, poss):
    word = tuple(negs + poss)
    w = parse_wword("eb1(-1)e2(-2)e1(-1)u0")
    if any(n == 0 for _, n in negs):
        return
    assert apply_ordered(normal_order_word(word), w) == apply_mode_word(word, w)


# ---------------------------------------------------------------- series

def test_empty_product_is_identity():
    w = parse_wword("e1(-1)u0")
    assert nord_series_coefficient((), 0, w) == w
    assert nord_series_coefficient((), 2, w) == 0


def test_single_zero_mode():
    assert nord_series_coefficient((("e1", 0),), -1, welem()) == {WWord((), ("e1",)): 1}


def test_two_zero_modes_on_u0():
    got = nord_series_coefficient((("e1", 0), ("eb1", 0)), -2, welem())
    assert got == {WWord((), ("e1", "eb1")): 1, WWord(): -HALF}


def test_derivative_picks_up_binomial():
    """``a^{(1)}(x) u0`` at ``x^{-3/2}`` is ``binom(-1/2, 1) a(0) u0``."""
    got = nord_series_coefficient((("e1", 1),), -3, welem())
    assert got == {WWord((), ("e1",)): Q(-1, 2)}


def _nord_apply_at(letters, target2, w):
    out = WElement()
    for word, c in w.items():
        table = nord_apply(tuple((lab, m, 0) for lab, m in letters), word, ((None, target2 + 2),))
        out = out + table.get((target2,), WElement()).scale(c)
    return out


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(LABELS), st.integers(0, 1)), min_size=1, max_size=3),
       st.integers(-8, 2))
def test_fast_path_matches_reference(letters, target2):
    w = parse_wword("eb1(-1)e1(-1)u0") + parse_wword("e2(-2)u0").scale(Q(3))
    assert _nord_apply_at(letters, target2, w) == nord_series_coefficient(letters, target2, w)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(LABELS), st.integers(0, 2)), min_size=1, max_size=3),
       st.integers(-8, 1))
def test_differentiation_commutes_with_normal_ordering(letters, target2):
    """``d/dx`` of the product equals the sum of products with one slot raised."""
    w = parse_wword("eb1(-1)e1(-1)u0") + parse_wword("e2(-1)eb2(-1)u0")
    lhs = nord_series_coefficient(letters, target2 + 2, w).scale(Q(target2 + 2, 2))
    rhs = WElement()
    for i, (lab, m) in enumerate(letters):
        raised = letters[:i] + [(lab, m + 1)] + letters[i + 1:]
        rhs = rhs + nord_series_coefficient(raised, target2, w).scale(Q(m + 1))
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(LABELS), st.integers(0, 1)), min_size=1, max_size=3),
       st.integers(-6, 0), st.integers(-3, 3), st.integers(-3, 3))
def test_linear_in_the_module_vector(letters, target2, s, t):
    u = parse_wword("eb1(-1)e1(-1)u0")
    v = parse_wword("e1(-2)u0")
    combo = nord_series_coefficient(letters, target2, u.scale(Q(s)) + v.scale(Q(t)))
    split = (nord_series_coefficient(letters, target2, u).scale(Q(s))
             + nord_series_coefficient(letters, target2, v).scale(Q(t)))
    assert combo == split


def test_zero_block_pairs_only_zero_modes():
    assert pair("e1", "eb1") == 1
    word = (("e1", 0), ("eb1", -1), ("eb1", 0))
    op = normal_order_word(word)
    assert dict(op) == {((("eb1", -1),), (), (("e1", 0), ("eb1", 0))): -1,
                        ((("eb1", -1),), (), ()): HALF}
