#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.diagnostics
~~~~~~~~~~~~~~~~~~~~~

Prototype-quality analyses written as plot-ready CSV:

  avg_distance.csv   class,distance
  neighbors.csv      prototype,label,count

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import io
import csv
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from .corpus import Instance
from .hierarchy import SenseHierarchy, render_path
from .prototypes import PrototypeSet, normalize_rows
from .utils import ConfigError, CorpusError, ShapeError, fmt4, write_text_atomic

logger = logging.getLogger(__name__)

AVG_DISTANCE_FILE = "avg_distance.csv"
NEIGHBORS_FILE = "neighbors.csv"


@dataclass
class DiagnosticsReport:
    level: int
    k: int
    avg_cos_distance: Dict[int, float] = field(default_factory=dict)
    neighbor_dist: Dict[int, Dict[int, float]] = field(default_factory=dict)


def _check_inputs(ps: PrototypeSet, V: np.ndarray, instances: Sequence[Instance], level: int) -> np.ndarray:
    if not instances:
        raise CorpusError("diagnostics need a non-empty test set")
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if V.shape[0] != len(instances):
        raise ShapeError(f"{V.shape[0]} vectors for {len(instances)} instances")
    if V.shape[1] != ps.d_p:
        raise ShapeError(f"instance width {V.shape[1]} != prototype width {ps.d_p}")
    ps.level(level)
    return V


def avg_cos_distance(
    ps: PrototypeSet,
    h: SenseHierarchy,
    V: np.ndarray,
    instances: Sequence[Instance],
    level: int,
) -> Dict[int, float]:
    """Mean 1 - cos(v, prototype) over each class's test examples.

    Classes without test examples are left out.
    """

    V = _check_inputs(ps, V, instances, level)
    V_hat, _ = normalize_rows(V, what="instance")
    C_hat, _ = normalize_rows(ps.level(level), what=f"level-{level} prototype")
    sims = np.clip(V_hat @ C_hat.T, -1.0, 1.0)

    out: Dict[int, float] = {}
    for n in h.nodes_at_level(level):
        members = [i for i, inst in enumerate(instances) if n in inst.labels_at(level)]
        if members:
            out[n] = float(np.mean(1.0 - sims[members, h.row_of(n)]))
    return out


def topk_neighbors(
    ps: PrototypeSet,
    h: SenseHierarchy,
    V: np.ndarray,
    instances: Sequence[Instance],
    level: int,
    k: int = 10,
) -> Dict[int, Dict[int, float]]:
    """Gold-label histogram of each prototype's k most similar test examples.

    Only examples labelled at `level` are candidates, so each histogram
    sums to min(k, labelled examples). Similarity ties keep instance
    order. A neighbour with several golds gives each a 1/|golds| share.
    """

    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    V = _check_inputs(ps, V, instances, level)
    V_hat, _ = normalize_rows(V, what="instance")
    C_hat, _ = normalize_rows(ps.level(level), what=f"level-{level} prototype")
    sims = C_hat @ V_hat.T

    golds = [inst.labels_at(level) for inst in instances]
    pool = np.array([i for i, g in enumerate(golds) if g], dtype=np.intp)
    if pool.size == 0:
        raise CorpusError(f"no test instance carries a level-{level} label")
    out: Dict[int, Dict[int, float]] = {}
    for row, n in enumerate(h.nodes_at_level(level)):
        order = pool[np.argsort(-sims[row, pool], kind="stable")[:k]]
        hist: Dict[int, float] = {}
        for i in order:
            share = 1.0 / len(golds[i])
            for g in golds[i]:
                hist[g] = hist.get(g, 0.0) + share
        out[n] = hist
    return out


def analyze(
    ps: PrototypeSet,
    h: SenseHierarchy,
    V: np.ndarray,
    instances: Sequence[Instance],
    level: int,
    k: int = 10,
) -> DiagnosticsReport:
    return DiagnosticsReport(
        level=level,
        k=k,
        avg_cos_distance=avg_cos_distance(ps, h, V, instances, level),
        neighbor_dist=topk_neighbors(ps, h, V, instances, level, k),
    )


def confusion_share(hist: Dict[int, float], own: int) -> float:
    """Share of a histogram's mass that falls outside the prototype's own class."""

    total = sum(hist.values())
    return (total - hist.get(own, 0.0)) / total if total else 0.0


# =============================================================================
# CSV
# =============================================================================
def _csv_text(header: List[str], rows: List[List]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def avg_distance_csv(report: DiagnosticsReport, h: SenseHierarchy) -> str:
    rows = [
        [render_path(h, n), f"{fmt4(d):.4f}"]
        for n, d in report.avg_cos_distance.items()
    ]
    return _csv_text(["class", "distance"], rows)


def neighbors_csv(report: DiagnosticsReport, h: SenseHierarchy) -> str:
    rows = []
    for proto, hist in report.neighbor_dist.items():
        for label in h.nodes_at_level(report.level):
            if label in hist:
                rows.append([render_path(h, proto), render_path(h, label), f"{fmt4(hist[label]):.4f}"])
    return _csv_text(["prototype", "label", "count"], rows)


def write_csvs(report: DiagnosticsReport, h: SenseHierarchy, out_dir: str) -> List[str]:
    write_text_atomic(os.path.join(out_dir, AVG_DISTANCE_FILE), avg_distance_csv(report, h))
    write_text_atomic(os.path.join(out_dir, NEIGHBORS_FILE), neighbors_csv(report, h))
    return [AVG_DISTANCE_FILE, NEIGHBORS_FILE]
