#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.xlingual
~~~~~~~~~~~~~~~~~~

Zero-shot cross-lingual support: per-language template selection and
class-wise contrastive alignment of a target-language prototype set to
a source-language one.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Tuple, Union

import numpy as np
from tqdm import tqdm

from . import config as cfg_mod
from .corpus import Template
from .hierarchy import SenseHierarchy, render_path
from .optim import Adam
from .prototypes import PrototypeSet, normalize_rows, normalize_rows_backward
from .utils import ConfigError, CorpusError, HierarchyError, NonFiniteLossError, ShapeError, progress_disabled

logger = logging.getLogger(__name__)

UPDATE_MODES = ("target_only", "both")


# =============================================================================
# Templates
# =============================================================================
def select_template(templates: Union[Mapping[str, Template], Any], language: str) -> Template:
    """The template registered for `language`; no fallback to another language."""

    if hasattr(templates, "get") and not isinstance(templates, Mapping):
        return templates.get(language)
    if language not in templates:
        raise CorpusError(
            f"no template registered for language {language!r} "
            f"(available: {', '.join(sorted(templates)) or 'none'})"
        )
    return templates[language]


# =============================================================================
# Configuration and correspondence
# =============================================================================
@dataclass
class AlignmentConfig:
    tau_align: float = 0.1
    steps: int = 300
    learning_rate: float = 1e-2
    update_mode: str = "target_only"
    seed: int = 42
    level: int = 1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self):
        if not self.tau_align > 0:
            raise ConfigError(f"tau_align must be > 0, got {self.tau_align}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.update_mode not in UPDATE_MODES:
            raise ConfigError(
                f"update_mode must be one of {', '.join(UPDATE_MODES)}, got {self.update_mode!r}"
            )
        return self

    @classmethod
    def from_dict(cls, *layers: Mapping[str, Any]) -> "AlignmentConfig":
        return cfg_mod.build(cls, *layers)


@dataclass(frozen=True)
class ClassCorrespondence:
    """Bijection between source and target classes at one level.

    ``tgt_rows[i]`` is the target prototype row paired with source row i.
    """

    level: int
    tgt_rows: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.tgt_rows) != list(range(len(self.tgt_rows))):
            raise HierarchyError(
                f"level-{self.level} correspondence is not a bijection: {self.tgt_rows}"
            )

    def __len__(self):
        return len(self.tgt_rows)


def correspondence_by_name(src_h: SenseHierarchy, tgt_h: SenseHierarchy, level: int) -> ClassCorrespondence:
    """Pair classes whose sense paths are equal."""

    for h, side in ((src_h, "source"), (tgt_h, "target")):
        if level not in h.level_index:
            raise HierarchyError(f"{side} hierarchy does not declare level {level}")

    src_paths = src_h.label_paths(level)
    tgt_paths = tgt_h.label_paths(level)
    only_src = sorted(set(src_paths) - set(tgt_paths))
    only_tgt = sorted(set(tgt_paths) - set(src_paths))
    if only_src or only_tgt:
        raise HierarchyError(
            f"level-{level} class sets differ: source-only {only_src}, target-only {only_tgt}"
        )

    tgt_row = {p: i for i, p in enumerate(tgt_paths)}
    return ClassCorrespondence(level=level, tgt_rows=tuple(tgt_row[p] for p in src_paths))


# =============================================================================
# Loss
# =============================================================================
def _check_pair(src: PrototypeSet, tgt: PrototypeSet, corr: ClassCorrespondence, level: int):
    S, T = src.level(level), tgt.level(level)
    if S.shape != T.shape:
        raise ShapeError(f"level-{level} prototype shapes differ: {S.shape} vs {T.shape}")
    if len(corr) != S.shape[0] or corr.level != level:
        raise HierarchyError(
            f"correspondence covers {len(corr)} level-{corr.level} classes, "
            f"prototypes have {S.shape[0]} at level {level}"
        )


def alignment_loss(
    src: PrototypeSet,
    tgt: PrototypeSet,
    corr: ClassCorrespondence,
    level: int,
    tau_align: float,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Symmetric class-wise contrastive loss.

    Returns the loss and its gradients w.r.t. the level's source and target
    prototype matrices (in their own row order).
    """

    if not tau_align > 0:
        raise ConfigError(f"tau_align must be > 0, got {tau_align}")
    _check_pair(src, tgt, corr, level)

    rows = np.asarray(corr.tgt_rows, dtype=np.intp)
    S_hat, s_norms = normalize_rows(src.level(level), what=f"level-{level} source prototype")
    T_hat, t_norms = normalize_rows(tgt.level(level)[rows], what=f"level-{level} target prototype")
    M = S_hat.shape[0]

    Z = (S_hat @ T_hat.T) / tau_align
    row_log = Z - Z.max(axis=1, keepdims=True)
    row_log -= np.log(np.exp(row_log).sum(axis=1, keepdims=True))
    col_log = Z - Z.max(axis=0, keepdims=True)
    col_log -= np.log(np.exp(col_log).sum(axis=0, keepdims=True))

    diag = np.arange(M)
    loss = float(-(row_log[diag, diag].sum() + col_log[diag, diag].sum()) / (2 * M))

    eye = np.eye(M)
    G = ((np.exp(row_log) - eye) + (np.exp(col_log) - eye)) / (2 * M * tau_align)
    grad_src = normalize_rows_backward(S_hat, s_norms, G @ T_hat)
    grad_tgt_paired = normalize_rows_backward(T_hat, t_norms, G.T @ S_hat)

    grad_tgt = np.zeros_like(grad_tgt_paired)
    grad_tgt[rows] = grad_tgt_paired
    return loss, grad_src, grad_tgt


# =============================================================================
# Alignment
# =============================================================================
def align(
    src: PrototypeSet,
    tgt: PrototypeSet,
    corr: ClassCorrespondence,
    cfg: AlignmentConfig,
) -> Tuple[PrototypeSet, PrototypeSet, List[Dict]]:
    """Run `cfg.steps` Adam updates on the target (and source) prototypes.

    Inputs are not modified; returns (source, target, history).
    """

    cfg.validate()
    level = cfg.level
    _check_pair(src, tgt, corr, level)

    src_out, tgt_out = src.copy(), tgt.copy()
    params = {"target": tgt_out.matrices[level]}
    if cfg.update_mode == "both":
        params["source"] = src_out.matrices[level]
    opt = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps).init_moments(params)

    history: List[Dict] = []
    for step in tqdm(
        range(1, cfg.steps + 1), desc="aligning", leave=False, disable=progress_disabled(logger)
    ):
        loss, g_src, g_tgt = alignment_loss(src_out, tgt_out, corr, level, cfg.tau_align)
        if not np.isfinite(loss):
            raise NonFiniteLossError("alignment", loss)
        history.append({"step": step, "loss": loss})
        grads = {"target": g_tgt, "source": g_src}
        opt.step(params, {k: grads[k] for k in params})

    final, _, _ = alignment_loss(src_out, tgt_out, corr, level, cfg.tau_align)
    history.append({"step": cfg.steps + 1, "loss": final, "final": True})
    logger.info(
        f"Aligned level {level} over {cfg.steps} steps: loss {history[0]['loss']:.4f} -> {final:.4f}"
    )
    return src_out, tgt_out, history


def alignment_margins(src: PrototypeSet, tgt: PrototypeSet, corr: ClassCorrespondence, level: int) -> np.ndarray:
    """sim(s_c, t_c) minus the best sim(s_c, t_c') over c' != c, per source class."""

    _check_pair(src, tgt, corr, level)
    S_hat, _ = normalize_rows(src.level(level))
    T_hat, _ = normalize_rows(tgt.level(level)[np.asarray(corr.tgt_rows, dtype=np.intp)])
    sims = S_hat @ T_hat.T
    M = sims.shape[0]
    if M == 1:
        return np.array([np.inf])
    off = np.where(np.eye(M, dtype=bool), -np.inf, sims)
    return np.diag(sims) - off.max(axis=1)


def describe_correspondence(src_h: SenseHierarchy, tgt_h: SenseHierarchy, corr: ClassCorrespondence) -> List[Tuple[str, str]]:
    src_nodes = src_h.nodes_at_level(corr.level)
    tgt_nodes = tgt_h.nodes_at_level(corr.level)
    return [
        (render_path(src_h, src_nodes[i]), render_path(tgt_h, tgt_nodes[j]))
        for i, j in enumerate(corr.tgt_rows)
    ]
