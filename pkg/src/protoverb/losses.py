#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.losses
~~~~~~~~~~~~~~~~

The three contrastive objectives and their analytic gradients.

  * instance-instance: same-class instances of a batch pull together
  * instance-prototype: every instance sits closest to its gold prototype
    at each level of its sense path
  * prototype-prototype: every child prototype sits closest to its father

All similarities are cosine; the temperature divides every logit.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .hierarchy import SenseHierarchy, parent_of
from .prototypes import PrototypeSet, normalize_rows, normalize_rows_backward
from .utils import HierarchyError, ShapeError

logger = logging.getLogger(__name__)

INS_INS_LEVELS = (2, 3)
MISSING = -1

ProtoGrads = Dict[int, np.ndarray]


# =============================================================================
# Domain Types
# =============================================================================
@dataclass
class Batch:
    """N instance vectors with their per-level label rows (MISSING when absent)."""

    vecs: np.ndarray
    labels: Dict[int, np.ndarray]
    tau: float = 0.1

    def __post_init__(self):
        self.vecs = np.atleast_2d(np.asarray(self.vecs, dtype=np.float64))
        if not self.tau > 0:
            raise ShapeError(f"temperature must be > 0, got {self.tau}")
        for lvl, y in self.labels.items():
            if len(y) != len(self):
                raise ShapeError(f"level {lvl} has {len(y)} labels for {len(self)} vectors")

    def __len__(self):
        return self.vecs.shape[0]

    @classmethod
    def from_paths(cls, vecs: np.ndarray, paths: Sequence[Sequence[int]], h: SenseHierarchy, tau: float = 0.1) -> "Batch":
        """Build label rows from resolved sense paths (handles, level 1 first)."""

        labels = {lvl: np.full(len(paths), MISSING, dtype=np.intp) for lvl in h.levels}
        for i, path in enumerate(paths):
            if len(path) == 0:
                raise ShapeError(f"batch item {i} has an empty sense path")
            for depth, n in enumerate(path, start=1):
                labels[depth][i] = h.row_of(n)
        return cls(vecs=vecs, labels=labels, tau=tau)


@dataclass
class LossToggles:
    ins_ins: bool = True
    pro_pro: bool = True


@dataclass
class LossBreakdown:
    l_ins_ins: float = 0.0
    l_ins_pro: float = 0.0
    l_pro_pro: float = 0.0
    l_total: float = 0.0
    # "vecs" -> N x d_p, "prototypes" -> {level: M_l x d_p}
    grads: Dict[str, object] = field(default_factory=dict)

    def terms(self) -> Dict[str, float]:
        return {
            "ins_ins": self.l_ins_ins,
            "ins_pro": self.l_ins_pro,
            "pro_pro": self.l_pro_pro,
            "total": self.l_total,
        }


# =============================================================================
# Helpers
# =============================================================================
def _log_softmax(Z: np.ndarray) -> np.ndarray:
    m = np.max(Z, axis=1, keepdims=True)
    shifted = Z - m
    return shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))


def _zero_proto_grads(ps: PrototypeSet) -> ProtoGrads:
    return {lvl: np.zeros_like(m) for lvl, m in ps.matrices.items()}


# =============================================================================
# Instance - Instance
# =============================================================================
def ins_ins_at_level(V: np.ndarray, y: np.ndarray, tau: float) -> Tuple[float, np.ndarray]:
    """Supervised contrastive loss among the rows of V with labels y.

    Anchors without a positive are skipped; the 1/N prefactor counts the
    remaining anchors only.
    """

    V = np.atleast_2d(V)
    y = np.asarray(y)
    N = V.shape[0]
    if N < 2:
        raise ShapeError(f"instance-instance loss needs N >= 2, got {N}")
    if np.any(y == MISSING):
        raise ShapeError("instance-instance loss: some instances lack a label at this level")

    V_hat, norms = normalize_rows(V, what="instance")
    S = V_hat @ V_hat.T
    eye = np.eye(N, dtype=bool)

    Z = np.where(eye, -np.inf, S / tau)
    log_prob = _log_softmax(Z)
    prob = np.exp(log_prob)

    pos = (y[:, None] == y[None, :]) & ~eye
    n_pos = pos.sum(axis=1)
    anchors = n_pos > 0
    n_anchor = int(anchors.sum())
    if n_anchor == 0:
        return 0.0, np.zeros_like(V)

    safe_pos = np.where(anchors, n_pos, 1)
    per_anchor = -np.where(pos, log_prob, 0.0).sum(axis=1) / safe_pos
    loss = float(per_anchor[anchors].sum() / n_anchor)

    G_Z = (prob - pos / safe_pos[:, None]) * anchors[:, None] / n_anchor
    G_Z[eye] = 0.0
    G_S = G_Z / tau
    grad_hat = (G_S + G_S.T) @ V_hat
    return loss, normalize_rows_backward(V_hat, norms, grad_hat)


def loss_ins_ins(b: Batch, level: Optional[int] = None) -> Tuple[float, np.ndarray]:
    """Instance-instance loss at `level`, or averaged over levels 2 and 3.

    Without an explicit level, each of levels 2/3 is evaluated on the
    instances labelled at that level (when at least two are); a taxonomy
    without level 2 falls back to level 1.
    """

    if level is not None:
        if level not in b.labels:
            raise ShapeError(f"batch carries no labels for level {level}")
        return ins_ins_at_level(b.vecs, b.labels[level], b.tau)

    if len(b) < 2:
        raise ShapeError(f"instance-instance loss needs N >= 2, got {len(b)}")

    candidates = [lvl for lvl in INS_INS_LEVELS if lvl in b.labels]
    if not candidates:
        candidates = [1]

    total = 0.0
    grad = np.zeros_like(b.vecs)
    used = 0
    for lvl in candidates:
        idx = np.flatnonzero(b.labels[lvl] != MISSING)
        if idx.size < 2:
            continue
        loss, g = ins_ins_at_level(b.vecs[idx], b.labels[lvl][idx], b.tau)
        total += loss
        grad[idx] += g
        used += 1

    if used == 0:
        return 0.0, grad
    return total / used, grad / used


# =============================================================================
# Instance - Prototype
# =============================================================================
def loss_ins_pro(b: Batch, ps: PrototypeSet) -> Tuple[float, np.ndarray, ProtoGrads]:
    """Each instance against its gold prototype at every level of its path.

    Per-instance values are averaged over the levels the instance covers,
    then over the batch.
    """

    N = len(b)
    if N == 0:
        raise ShapeError("empty batch")
    if b.vecs.shape[1] != ps.d_p:
        raise ShapeError(f"instance width {b.vecs.shape[1]} != prototype width {ps.d_p}")

    covered = np.zeros(N)
    for lvl, y in b.labels.items():
        covered += y != MISSING
    if np.any(covered == 0):
        raise ShapeError("instance-prototype loss: an instance has no labels")

    V_hat, norms = normalize_rows(b.vecs, what="instance")
    grad_hat = np.zeros_like(V_hat)
    proto_grads = _zero_proto_grads(ps)
    weight = 1.0 / (covered * N)

    loss = 0.0
    for lvl, y in b.labels.items():
        rows = np.flatnonzero(y != MISSING)
        if rows.size == 0:
            continue
        if lvl not in ps.matrices:
            raise ShapeError(f"labels at level {lvl} but no prototypes for it")
        C = ps.matrices[lvl]
        if np.any(y[rows] >= C.shape[0]):
            raise ShapeError(f"label row outside the {C.shape[0]} prototypes of level {lvl}")

        C_hat, c_norms = normalize_rows(C, what=f"level-{lvl} prototype")
        S = V_hat[rows] @ C_hat.T
        log_prob = _log_softmax(S / b.tau)
        gold = y[rows]
        w = weight[rows]
        loss += float(np.sum(-log_prob[np.arange(rows.size), gold] * w))

        G_Z = np.exp(log_prob)
        G_Z[np.arange(rows.size), gold] -= 1.0
        G_S = G_Z * w[:, None] / b.tau
        grad_hat[rows] += G_S @ C_hat
        proto_grads[lvl] += normalize_rows_backward(C_hat, c_norms, G_S.T @ V_hat[rows])

    return loss, normalize_rows_backward(V_hat, norms, grad_hat), proto_grads


# =============================================================================
# Prototype - Prototype
# =============================================================================
def parent_rows(h: SenseHierarchy, level: int) -> np.ndarray:
    """Row of each level-`level` node's parent inside level - 1."""

    return np.array(
        [h.row_of(parent_of(h, n)) for n in h.nodes_at_level(level)], dtype=np.intp
    )


def loss_pro_pro(ps: PrototypeSet, h: SenseHierarchy, tau: float) -> Tuple[float, ProtoGrads]:
    """Every child prototype against its father among all father-level prototypes."""

    if not tau > 0:
        raise ShapeError(f"temperature must be > 0, got {tau}")
    child_levels = [lvl for lvl in h.levels if lvl >= 2 and lvl in ps.matrices and lvl - 1 in ps.matrices]
    if len(h.levels) < 2 or not child_levels:
        raise HierarchyError("prototype-prototype loss needs at least two levels")

    M = sum(ps.matrices[lvl].shape[0] for lvl in child_levels)
    grads = _zero_proto_grads(ps)
    loss = 0.0
    for lvl in child_levels:
        C_hat, c_norms = normalize_rows(ps.matrices[lvl], what=f"level-{lvl} prototype")
        F_hat, f_norms = normalize_rows(ps.matrices[lvl - 1], what=f"level-{lvl - 1} prototype")
        gold = parent_rows(h, lvl)

        log_prob = _log_softmax((C_hat @ F_hat.T) / tau)
        loss += float(-log_prob[np.arange(gold.size), gold].sum() / M)

        G_Z = np.exp(log_prob)
        G_Z[np.arange(gold.size), gold] -= 1.0
        G_S = G_Z / (M * tau)
        grads[lvl] += normalize_rows_backward(C_hat, c_norms, G_S @ F_hat)
        grads[lvl - 1] += normalize_rows_backward(F_hat, f_norms, G_S.T @ C_hat)

    return loss, grads


# =============================================================================
# Combined objective
# =============================================================================
def total_loss(
    b: Batch,
    ps: PrototypeSet,
    h: SenseHierarchy,
    toggles: Optional[LossToggles] = None,
) -> LossBreakdown:
    """Sum of the enabled terms; disabled terms are exactly zero."""

    toggles = toggles or LossToggles()

    l_ins_pro, g_vecs, g_protos = loss_ins_pro(b, ps)
    g_vecs = g_vecs.copy()

    l_ins_ins = 0.0
    if toggles.ins_ins:
        l_ins_ins, g = loss_ins_ins(b)
        g_vecs += g

    l_pro_pro = 0.0
    if toggles.pro_pro:
        l_pro_pro, gp = loss_pro_pro(ps, h, b.tau)
        for lvl, g in gp.items():
            g_protos[lvl] += g

    return LossBreakdown(
        l_ins_ins=l_ins_ins,
        l_ins_pro=l_ins_pro,
        l_pro_pro=l_pro_pro,
        l_total=l_ins_ins + l_ins_pro + l_pro_pro,
        grads={"vecs": g_vecs, "prototypes": g_protos},
    )
