"""Positive-class precision, recall and F1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    undefined: tuple[str, ...] = ()  # metrics whose denominator was zero (reported as 0)

    def row(self) -> str:
        return f"{self.precision!r}\t{self.recall!r}\t{self.f1!r}\t{self.tp}\t{self.fp}\t{self.fn}\t{self.tn}"

    def summary(self) -> str:
        return (f"P={100 * self.precision:.1f} R={100 * self.recall:.1f} F1={100 * self.f1:.1f} "
                f"(tp={self.tp} fp={self.fp} fn={self.fn} tn={self.tn})")


HEADER = "precision\trecall\tf1\ttp\tfp\tfn\ttn"


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> tuple[int, int, int, int]:
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        if p > 0:
            if t > 0:
                tp += 1
            else:
                fp += 1
        elif t > 0:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def from_counts(tp: int, fp: int, fn: int, tn: int = 0) -> Metrics:
    undefined = []
    if tp + fp:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        undefined.append("precision")
    if tp + fn:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        undefined.append("recall")
    if precision + recall:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        undefined.append("f1")
    return Metrics(precision, recall, f1, tp, fp, fn, tn, tuple(undefined))


def prf(y_true: Sequence[int], y_pred: Sequence[int]) -> Metrics:
    return from_counts(*confusion(y_true, y_pred))
