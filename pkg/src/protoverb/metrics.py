#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.metrics
~~~~~~~~~~~~~~~~~

Similarity-softmax prediction per level and accuracy / macro-F1
evaluation under the multi-gold rule: a prediction that matches any gold
sense of a test instance counts as correct.

Inference applies no temperature.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .corpus import Instance
from .hierarchy import SenseHierarchy, render_path
from .prototypes import PrototypeSet, cosine_matrix
from .utils import CorpusError, ShapeError, fmt4, write_text_atomic

logger = logging.getLogger(__name__)


# =============================================================================
# Prediction
# =============================================================================
@dataclass
class Prediction:
    level: int
    probs: np.ndarray
    argmax: int  # node handle


def _softmax(S: np.ndarray) -> np.ndarray:
    S = np.atleast_2d(S)
    e = np.exp(S - S.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def predict_batch(V: np.ndarray, ps: PrototypeSet, level: int, h: SenseHierarchy) -> Tuple[np.ndarray, List[int]]:
    """Probabilities (N x M_level) and argmax handles for every row of V."""

    if level not in h.level_index:
        raise ShapeError(f"level {level} is not declared in the hierarchy")
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if V.shape[1] != ps.d_p:
        raise ShapeError(f"instance width {V.shape[1]} != prototype width {ps.d_p}")

    probs = _softmax(cosine_matrix(V, ps.level(level)))
    handles = h.nodes_at_level(level)
    # np.argmax returns the first maximum: ties go to the lowest row
    return probs, [handles[j] for j in np.argmax(probs, axis=1)]


def predict(v: np.ndarray, ps: PrototypeSet, level: int, h: SenseHierarchy) -> Prediction:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (ps.d_p,):
        raise ShapeError(f"instance vector has shape {v.shape}, expected ({ps.d_p},)")
    probs, handles = predict_batch(v[None, :], ps, level, h)
    return Prediction(level=level, probs=probs[0], argmax=handles[0])


# =============================================================================
# Metrics
# =============================================================================
def _check_confusion(confusion) -> np.ndarray:
    C = np.asarray(confusion, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ShapeError(f"confusion matrix must be square, got shape {C.shape}")
    if np.any(C < 0):
        raise ShapeError("confusion matrix has negative counts")
    return C


def per_class_scores(confusion) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Precision, recall and F1 per class (rows gold, columns predicted)."""

    C = _check_confusion(confusion)
    tp = np.diag(C)
    predicted = C.sum(axis=0)
    actual = C.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2 * precision * recall / pr, 0.0)
    return precision, recall, f1


def macro_f1(confusion) -> float:
    """Unweighted mean of per-class F1; classes with P + R = 0 score 0."""

    _, _, f1 = per_class_scores(confusion)
    return float(f1.mean()) if f1.size else 0.0


@dataclass
class MetricsReport:
    level: int
    accuracy: float
    macro_f1: float
    per_class_f1: Dict[str, float]
    confusion: List[List[int]]
    labels: List[str] = field(default_factory=list)
    precision: Dict[str, float] = field(default_factory=dict)
    recall: Dict[str, float] = field(default_factory=dict)
    n_instances: int = 0

    def to_dict(self) -> Dict:
        return {
            "level": self.level,
            "n_instances": self.n_instances,
            "accuracy": fmt4(self.accuracy),
            "macro_f1": fmt4(self.macro_f1),
            "labels": list(self.labels),
            "per_class_f1": {k: fmt4(v) for k, v in self.per_class_f1.items()},
            "precision": {k: fmt4(v) for k, v in self.precision.items()},
            "recall": {k: fmt4(v) for k, v in self.recall.items()},
            "confusion": [list(map(int, row)) for row in self.confusion],
        }

    def summary(self) -> str:
        return (
            f"level {self.level}: acc {self.accuracy:.4f}, macro-F1 {self.macro_f1:.4f} "
            f"({self.n_instances} instances)"
        )


def missing_at_level(instances: Sequence[Instance], level: int) -> List[str]:
    return [inst.id for inst in instances if not inst.labels_at(level)]


def score(
    golds: Sequence[Sequence[int]],
    predicted: Sequence[int],
    h: SenseHierarchy,
    level: int,
) -> MetricsReport:
    """Multi-gold scoring of handle predictions.

    A hit is credited to the matched gold class; a miss is charged to the
    first-listed gold.
    """

    if len(golds) != len(predicted):
        raise ShapeError(f"{len(golds)} gold sets for {len(predicted)} predictions")

    M = h.size(level)
    confusion = np.zeros((M, M), dtype=np.int64)
    correct = 0
    for gold, pred in zip(golds, predicted):
        if not gold:
            raise CorpusError(f"an instance has no gold label at level {level}")
        if pred in gold:
            correct += 1
            row = h.row_of(pred)
        else:
            row = h.row_of(gold[0])
        confusion[row, h.row_of(pred)] += 1

    labels = h.label_paths(level)
    precision, recall, f1 = per_class_scores(confusion)
    n = len(predicted)
    return MetricsReport(
        level=level,
        accuracy=correct / n if n else 0.0,
        macro_f1=float(f1.mean()),
        per_class_f1=dict(zip(labels, f1.tolist())),
        confusion=confusion.tolist(),
        labels=labels,
        precision=dict(zip(labels, precision.tolist())),
        recall=dict(zip(labels, recall.tolist())),
        n_instances=n,
    )


def evaluate_vectors(
    V: np.ndarray,
    instances: Sequence[Instance],
    ps: PrototypeSet,
    h: SenseHierarchy,
    level: int,
) -> MetricsReport:
    """Score pre-computed instance vectors; each instance counts once."""

    if not instances:
        raise CorpusError("cannot evaluate an empty instance set")
    missing = missing_at_level(instances, level)
    if missing:
        shown = ", ".join(missing[:20]) + (" ..." if len(missing) > 20 else "")
        raise CorpusError(
            f"{len(missing)} instance(s) have no label at level {level}: {shown}"
        )

    _, predicted = predict_batch(V, ps, level, h)
    return score([inst.labels_at(level) for inst in instances], predicted, h, level)


def evaluate(model, instances: Sequence[Instance], level: int) -> MetricsReport:
    """Evaluate a model exposing ``embed(instances)``, ``protos`` and ``hierarchy``."""

    if not instances:
        raise CorpusError("cannot evaluate an empty instance set")
    if level not in model.hierarchy.level_index:
        raise ShapeError(f"level {level} is not declared in the hierarchy")
    missing = missing_at_level(instances, level)
    if missing:
        shown = ", ".join(missing[:20]) + (" ..." if len(missing) > 20 else "")
        raise CorpusError(
            f"{len(missing)} instance(s) have no label at level {level}: {shown}"
        )
    return evaluate_vectors(model.embed(instances), instances, model.protos, model.hierarchy, level)


# =============================================================================
# Report files
# =============================================================================
def write_report(report: MetricsReport, path: str):
    write_text_atomic(path, json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n")


def prediction_records(
    instances: Sequence[Instance],
    V: np.ndarray,
    ps: PrototypeSet,
    h: SenseHierarchy,
) -> List[Dict]:
    """One record per instance with the predicted path and probabilities per level."""

    per_level = {lvl: predict_batch(V, ps, lvl, h) for lvl in h.levels}
    records = []
    for i, inst in enumerate(instances):
        rec: Dict = {"id": inst.id, "lang": inst.language, "gold": list(inst.sense_paths)}
        for lvl, (probs, handles) in per_level.items():
            rec[f"level{lvl}"] = {
                "label": render_path(h, handles[i]),
                "probs": [fmt4(p) for p in probs[i]],
            }
        records.append(rec)
    return records


def write_predictions(records: Sequence[Dict], path: str):
    write_text_atomic(
        path, "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    )
