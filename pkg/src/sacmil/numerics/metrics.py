"""Bag-level classification metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from ..errors import ContractError, UndefinedMetricError


def auc(scores, labels) -> float:
    """ROC AUC as the Mann-Whitney statistic with midrank ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ContractError(f"{scores.size} scores for {labels.size} labels")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both classes present")
    ranks = rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def f1_acc(predictions, labels, num_classes: int | None = None) -> tuple[float, float]:
    """Accuracy and F1 (positive class for binary, macro-average otherwise)."""
    pred = np.asarray(predictions, dtype=np.int64)
    lab = np.asarray(labels, dtype=np.int64)
    if pred.shape != lab.shape:
        raise ContractError(f"{pred.size} predictions for {lab.size} labels")
    if pred.size == 0:
        raise ContractError("metrics over an empty prediction set")
    acc = float((pred == lab).mean())
    if num_classes is None:
        num_classes = max(2, int(max(pred.max(), lab.max())) + 1)
    classes = [1] if num_classes == 2 else range(num_classes)
    f1s = []
    for c in classes:
        tp = int(((pred == c) & (lab == c)).sum())
        fp = int(((pred == c) & (lab != c)).sum())
        fn = int(((pred != c) & (lab == c)).sum())
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom else 0.0)
    return acc, float(np.mean(f1s))


@dataclass
class MetricsReport:
    accuracy: float
    auc: float | None
    f1: float
    folds: list["MetricsReport"] = field(default_factory=list)
    std: dict[str, float] = field(default_factory=dict)

    @classmethod
    def aggregate(cls, folds: list["MetricsReport"]) -> "MetricsReport":
        def col(attr):
            return np.array([getattr(f, attr) for f in folds], dtype=np.float64)

        acc, f1 = col("accuracy"), col("f1")
        aucs = [f.auc for f in folds if f.auc is not None]
        auc_arr = np.array(aucs, dtype=np.float64)
        return cls(
            accuracy=float(acc.mean()),
            auc=float(auc_arr.mean()) if aucs else None,
            f1=float(f1.mean()),
            folds=list(folds),
            std={
                "accuracy": float(acc.std()),
                "auc": float(auc_arr.std()) if aucs else float("nan"),
                "f1": float(f1.std()),
            },
        )
