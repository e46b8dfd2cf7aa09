"""The seven focus metrics derived from a signed-mass confusion tally.

Every metric is a ratio of tally entries; a zero denominator makes the
metric undefined (None), never an exception and never NaN. Methods that
cannot produce negative attribution are scored on precision alone: the
other six ratios would compare against negative mass the method cannot
express, so they are reported undefined.
"""

from __future__ import annotations

from dataclasses import dataclass

from .confusion import ConfusionTally

METRIC_NAMES = (
    "precision",
    "sensitivity",
    "specificity",
    "fnr",
    "fpr",
    "accuracy",
    "f1",
)


def _ratio(num: float, den: float) -> float | None:
    return None if den == 0 else num / den


@dataclass(frozen=True)
class MetricVector:
    """Seven scores for one (mosaic, method) pair; None means undefined."""

    precision: float | None
    sensitivity: float | None
    specificity: float | None
    fnr: float | None
    fpr: float | None
    accuracy: float | None
    f1: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def defined_names(self) -> tuple[str, ...]:
        return tuple(n for n in METRIC_NAMES if getattr(self, n) is not None)


def compute_metrics(tally: ConfusionTally, positive_only: bool = False) -> MetricVector:
    """Score one tally.

    With ``positive_only`` set, precision is computed as usual and the
    remaining six metrics are forced undefined regardless of the tally.
    """
    tp, fp, fn, tn = tally.tp, tally.fp, tally.fn, tally.tn
    precision = _ratio(tp, tp + fp)
    if positive_only:
        return MetricVector(precision, None, None, None, None, None, None)

    sensitivity = _ratio(tp, tp + fn)
    if precision is None or sensitivity is None:
        f1 = None
    else:
        f1 = _ratio(2.0 * precision * sensitivity, precision + sensitivity)
    return MetricVector(
        precision=precision,
        sensitivity=sensitivity,
        specificity=_ratio(tn, tn + fp),
        fnr=_ratio(fn, tp + fn),
        fpr=_ratio(fp, tn + fp),
        accuracy=_ratio(tp + tn, tally.total),
        f1=f1,
    )
