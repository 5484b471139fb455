"""Confusion-matrix accounting and the two tuning goals (precision, F-measure).

Defective is the positive class.  Any ratio with a zero denominator is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GOALS = ("precision", "f_measure")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class GoalScore:
    goal: str
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"{self.goal} score {self.value} outside [0, 1]")

    def __float__(self):
        return float(self.value)


def confusion(predicted, actual) -> ConfusionMatrix:
    p = np.asarray(predicted).astype(bool)
    a = np.asarray(actual).astype(bool)
    if p.shape != a.shape or p.ndim != 1:
        raise ValueError(f"predicted {p.shape} and actual {a.shape} must be equal-length vectors")
    if p.size == 0:
        raise ValueError("cannot score an empty prediction vector")
    return ConfusionMatrix(
        tp=int(np.sum(p & a)), fp=int(np.sum(p & ~a)),
        tn=int(np.sum(~p & ~a)), fn=int(np.sum(~p & a)),
    )


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def recall_value(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fn)


def precision(cm: ConfusionMatrix) -> GoalScore:
    return GoalScore("precision", _ratio(cm.tp, cm.tp + cm.fp))


def f_measure(cm: ConfusionMatrix) -> GoalScore:
    """Harmonic mean of precision and recall."""
    p = _ratio(cm.tp, cm.tp + cm.fp)
    r = recall_value(cm)
    return GoalScore("f_measure", _ratio(2 * r * p, r + p))


_GOAL_FUNCS = {"precision": precision, "f_measure": f_measure}


def score(goal: str, predicted, actual) -> float:
    """Evaluate `goal` on a prediction vector; returns a plain float."""
    try:
        fn = _GOAL_FUNCS[goal]
    except KeyError:
        raise ValueError(f"unknown goal {goal!r}; expected one of {GOALS}") from None
    return fn(confusion(predicted, actual)).value
