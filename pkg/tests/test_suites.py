"""Suite configuration, case enumeration and the worker pool."""
from fractions import Fraction
from itertools import permutations

import pytest

from twf.suites import (SuiteConfig, instances, run_suite, suite_cases, summarize, v_shapes,
                        w_shapes)


@pytest.mark.parametrize("kwargs", [
    {"M": 0}, {"jobs": 0}, {"window": (3, 1)}, {"max_weight": Fraction(1, 3)},
])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        SuiteConfig(**kwargs)


def test_bounds_are_doubled():
    cfg = SuiteConfig(max_weight=Fraction(3, 2), window=(Fraction(-5, 2), 4))
    assert cfg.bounds("wick") == (Fraction(3, 2), (-5, 8))
    assert SuiteConfig().bounds("assoc") == (Fraction(4), (-16, 16))


def test_shapes_come_in_every_order():
    for shapes in (v_shapes(4), w_shapes(3)):
        assert len(set(shapes)) == len(shapes)
        for s in shapes:
            assert all(p in shapes for p in permutations(s))


def test_shape_weights():
    assert v_shapes(Fraction(1, 2)) == [(), (0,)]
    assert sorted(w_shapes(2)) == [(), (1,), (1, 1), (2,)]


def test_concrete_instances_cover_repeats():
    cfg = SuiteConfig(M=1, symbolic=False)
    words = list(instances(((0, 1),), cfg))
    assert len(words) == 4
    assert ((("e1", 0), ("e1", 1)),) in words


def test_unknown_suite():
    with pytest.raises(ValueError):
        suite_cases("nosuch", SuiteConfig())


def test_pool_matches_serial_run():
    cfg = SuiteConfig(max_weight=1)
    serial = list(run_suite("expdelta", cfg))
    pooled = list(run_suite("expdelta", SuiteConfig(max_weight=1, jobs=2)))
    assert serial == pooled and summarize(serial)["ok"]


def test_budget_marks_unreached_cases():
    recs = list(run_suite("assoc", SuiteConfig(budget=0.0)))
    summary = summarize(recs)
    assert not summary["ok"] and summary["counts"].get("timeout", 0) > 0
    assert len(recs) >= len(suite_cases("assoc", SuiteConfig()))
