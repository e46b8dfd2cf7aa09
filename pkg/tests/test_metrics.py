"""Metric definitions, undefined handling, capability gating."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from salbench import METRIC_NAMES, ConfusionTally, MetricVector, compute_metrics


def fraction_metrics(tp, fp, fn, tn) -> dict[str, Fraction | None]:
    """Exact rational evaluation of all seven definitions."""
    tp, fp, fn, tn = (Fraction(x) for x in (tp, fp, fn, tn))

    def ratio(num, den):
        return None if den == 0 else num / den

    p = ratio(tp, tp + fp)
    s = ratio(tp, tp + fn)
    f1 = None
    if p is not None and s is not None and p + s != 0:
        f1 = 2 * p * s / (p + s)
    return {
        "precision": p,
        "sensitivity": s,
        "specificity": ratio(tn, tn + fp),
        "fnr": ratio(fn, tp + fn),
        "fpr": ratio(fp, tn + fp),
        "accuracy": ratio(tp + tn, tp + fp + fn + tn),
        "f1": f1,
    }


nonneg = st.integers(min_value=0, max_value=10**6)
positive = st.integers(min_value=1, max_value=10**6)


class TestHandValues:
    def test_worked_example(self):
        # tally (3,1,3,1): an exactly half-right, precision-leaning split
        mv = compute_metrics(ConfusionTally(3, 1, 3, 1))
        assert mv.precision == 0.75
        assert mv.sensitivity == 0.5
        assert mv.specificity == 0.5
        assert mv.fnr == 0.5
        assert mv.fpr == 0.5
        assert mv.accuracy == 0.5
        assert mv.f1 == 0.6

    def test_saturated(self):
        mv = compute_metrics(ConfusionTally(10, 0, 0, 10))
        assert mv.as_dict() == {
            "precision": 1.0, "sensitivity": 1.0, "specificity": 1.0,
            "fnr": 0.0, "fpr": 0.0, "accuracy": 1.0, "f1": 1.0,
        }

    def test_fully_wrong(self):
        mv = compute_metrics(ConfusionTally(0, 10, 10, 0))
        assert mv.precision == 0.0
        assert mv.sensitivity == 0.0
        assert mv.specificity == 0.0
        assert mv.accuracy == 0.0
        assert mv.fnr == 1.0
        assert mv.fpr == 1.0
        assert mv.f1 is None  # harmonic mean of two zeros

    def test_empty_tally_all_undefined(self):
        mv = compute_metrics(ConfusionTally(0, 0, 0, 0))
        assert mv.as_dict() == {name: None for name in METRIC_NAMES}

    def test_no_negative_mass(self):
        # positive mass only: ratios against negative mass lose meaning
        mv = compute_metrics(ConfusionTally(5, 5, 0, 0))
        assert mv.precision == 0.5
        assert mv.sensitivity == 1.0
        assert mv.specificity == 0.0
        assert mv.accuracy == 0.5


class TestCapabilityGating:
    def test_positive_only_forces_six_undefined(self):
        mv = compute_metrics(ConfusionTally(5, 5, 0, 0), positive_only=True)
        assert mv.precision == 0.5
        for name in METRIC_NAMES:
            if name != "precision":
                assert getattr(mv, name) is None, name

    def test_gating_overrides_arithmetically_defined_values(self):
        # sensitivity would be 1.0 arithmetically; the capability wins
        mv = compute_metrics(ConfusionTally(5, 1, 0, 0), positive_only=True)
        assert mv.sensitivity is None
        assert mv.defined_names() == ("precision",)

    def test_positive_only_zero_positive_mass(self):
        mv = compute_metrics(ConfusionTally(0, 0, 0, 0), positive_only=True)
        assert mv.as_dict() == {name: None for name in METRIC_NAMES}


class TestAgainstFractions:
    @given(nonneg, nonneg, nonneg, nonneg)
    @settings(max_examples=200)
    def test_all_metrics_match_exact_rationals(self, tp, fp, fn, tn):
        mv = compute_metrics(ConfusionTally(tp, fp, fn, tn))
        exact = fraction_metrics(tp, fp, fn, tn)
        for name in METRIC_NAMES:
            got = getattr(mv, name)
            want = exact[name]
            if want is None:
                assert got is None, name
            else:
                assert got == pytest.approx(float(want), rel=1e-12, abs=1e-15), name

    @given(positive, nonneg, nonneg)
    @settings(max_examples=300)
    def test_f1_identity(self, tp, fp, fn):
        # harmonic mean of precision and sensitivity collapses to
        # 2tp / (2tp + fp + fn)
        mv = compute_metrics(ConfusionTally(tp, fp, fn, 0))
        direct = 2 * tp / (2 * tp + fp + fn)
        assert mv.f1 == pytest.approx(direct, rel=1e-12, abs=0)

    @given(nonneg, nonneg, nonneg, nonneg)
    @settings(max_examples=120)
    def test_complement_pairs(self, tp, fp, fn, tn):
        mv = compute_metrics(ConfusionTally(tp, fp, fn, tn))
        if mv.sensitivity is not None:
            assert mv.sensitivity + mv.fnr == pytest.approx(1.0, abs=1e-12)
        if mv.specificity is not None:
            assert mv.specificity + mv.fpr == pytest.approx(1.0, abs=1e-12)

    @given(nonneg, nonneg, nonneg, nonneg)
    @settings(max_examples=120)
    def test_ranges(self, tp, fp, fn, tn):
        mv = compute_metrics(ConfusionTally(tp, fp, fn, tn))
        for name in METRIC_NAMES:
            v = getattr(mv, name)
            if v is not None:
                assert 0.0 <= v <= 1.0, name


class TestVector:
    def test_defined_names(self):
        mv = MetricVector(1.0, None, None, None, None, 0.5, None)
        assert mv.defined_names() == ("precision", "accuracy")

    def test_as_dict_order(self):
        mv = compute_metrics(ConfusionTally(1, 2, 3, 4))
        assert tuple(mv.as_dict()) == METRIC_NAMES
