#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.trainer
~~~~~~~~~~~~~~~~~

Mini-batch training of the encoder and the prototypes under the
combined contrastive objective, with early stopping on the dev split.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import logging
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from . import config as cfg_mod
from .checkpoint import Checkpoint, load_checkpoint
from .corpus import Instance, Template, TrainingExample, expand_multilabel, render, select_split
from .encoder import (
    EncoderParams,
    HiddenState,
    encode_batch,
    encode_batch_backward,
    ingest_external,
    init_encoder,
    project,
    project_backward,
    tokenize,
)
from .hierarchy import SenseHierarchy
from .losses import Batch, LossBreakdown, LossToggles, total_loss
from .metrics import MetricsReport, evaluate
from .optim import Adam
from .prototypes import PrototypeSet, init_prototypes
from .utils import (
    ConfigError,
    CorpusError,
    NonFiniteLossError,
    ShapeError,
    fmt4,
    parallel_map,
    progress_disabled,
)

logger = logging.getLogger(__name__)

LOSS_TERMS = ("ins_ins", "ins_pro", "pro_pro", "total")
DEFAULT_PATIENCE = 5


# =============================================================================
# Configuration
# =============================================================================
@dataclass
class TrainConfig:
    """Training hyperparameters.

    The defaults are the published setting (lr 5e-5, batch 196); the
    ``desk`` preset scales them for synthetic corpora. A patience of 0
    turns early stopping off; left unset it resolves to
    min(DEFAULT_PATIENCE, max_epochs).
    """

    tau: float = 0.1
    learning_rate: float = 5e-5
    batch_size: int = 196
    max_epochs: int = 10
    patience: Optional[int] = None
    d_p: int = 128
    d_h: int = 64
    seed: int = 42
    ins_ins: bool = True
    pro_pro: bool = True
    label_info: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    vocab_size: int = 2**15
    external_embeddings: Optional[str] = None
    init_from: Optional[str] = None

    def validate(self):
        if not self.tau > 0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 2:
            raise ConfigError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.max_epochs < 0:
            raise ConfigError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.patience is None:
            self.patience = min(DEFAULT_PATIENCE, self.max_epochs)
        if not 0 <= self.patience <= self.max_epochs:
            raise ConfigError(
                f"patience must lie in [0, max_epochs={self.max_epochs}], got {self.patience}"
            )
        if self.d_p < 2 or self.d_h < 1 or self.vocab_size < 1:
            raise ConfigError("d_p must be >= 2; d_h and vocab_size must be >= 1")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps > 0):
            raise ConfigError("beta1/beta2 must lie in [0, 1) and eps must be > 0")
        return self

    @classmethod
    def from_dict(cls, *layers: Mapping[str, Any]) -> "TrainConfig":
        return cfg_mod.build(cls, *layers)

    def toggles(self) -> LossToggles:
        return LossToggles(ins_ins=self.ins_ins, pro_pro=self.pro_pro)


# =============================================================================
# State
# =============================================================================
@dataclass
class TrainState:
    params: EncoderParams
    protos: PrototypeSet
    hierarchy: SenseHierarchy
    templates: Dict[str, Template]
    cfg: TrainConfig
    optimizer: Adam
    epoch: int = 0
    best: Optional[Dict[str, Any]] = None
    external: Optional[Dict[str, HiddenState]] = None
    threads: int = 1
    _tokens: Dict[str, List[int]] = field(default_factory=dict, repr=False)

    # -------------------------------------------------------------------------
    # Parameters
    # -------------------------------------------------------------------------
    def param_arrays(self) -> Dict[str, np.ndarray]:
        arrays = dict(self.params.arrays())
        arrays.update(self.protos.arrays())
        return arrays

    def snapshot(self) -> "TrainState":
        """Copy of the parameters; optimizer moments are not carried."""

        return dataclasses.replace(
            self,
            params=self.params.copy(),
            protos=self.protos.copy(),
            optimizer=Adam(self.cfg.learning_rate, self.cfg.beta1, self.cfg.beta2, self.cfg.eps),
        )

    def to_checkpoint(self, history: Optional[List[Dict]] = None) -> Checkpoint:
        return Checkpoint(
            params=self.params,
            protos=self.protos,
            hierarchy=self.hierarchy,
            templates=dict(self.templates),
            config=cfg_mod.as_dict(self.cfg),
            history=list(history or []),
        )

    # -------------------------------------------------------------------------
    # Forward
    # -------------------------------------------------------------------------
    def tokens_for(self, inst: Instance) -> List[int]:
        tokens = self._tokens.get(inst.id)
        if tokens is None:
            from .xlingual import select_template

            prompt = render(
                select_template(self.templates, inst.language),
                inst,
                self.hierarchy,
                include_label_info=self.cfg.label_info,
            )
            tokens = tokenize(prompt, self.params.vocab_size)
            self._tokens[inst.id] = tokens
        return tokens

    def hidden_for(self, instances: Sequence[Instance]) -> np.ndarray:
        missing = [inst.id for inst in instances if inst.id not in self.external]
        if missing:
            raise ShapeError(
                f"{len(missing)} instance(s) have no external hidden state: "
                + ", ".join(missing[:20])
            )
        return np.stack([self.external[inst.id] for inst in instances])

    def forward(self, instances: Sequence[Instance]) -> Tuple[Any, np.ndarray, np.ndarray]:
        """(tokens or None, H, V) for `instances`."""

        if self.external is not None:
            H = self.hidden_for(instances)
            return None, H, project(self.params, H)

        token_lists = parallel_map(self.tokens_for, instances, self.threads)
        H, V = encode_batch(self.params, token_lists)
        return token_lists, H, V

    def embed(self, instances: Sequence[Instance]) -> np.ndarray:
        return self.forward(instances)[2]


def _adam(cfg: TrainConfig) -> Adam:
    return Adam(lr=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)


def init_state(
    cfg: TrainConfig,
    h: SenseHierarchy,
    templates: Dict[str, Template],
    threads: int = 1,
) -> TrainState:
    """Fresh (or warm-started) parameters for `h`."""

    external = None
    if cfg.external_embeddings:
        external = ingest_external(cfg.external_embeddings, cfg.d_h)

    if cfg.init_from:
        ckpt = load_checkpoint(cfg.init_from)
        if ckpt.hierarchy.dump() != h.dump():
            raise ShapeError(f"{cfg.init_from}: checkpoint hierarchy differs from the training hierarchy")
        if ckpt.params.d_p != cfg.d_p or ckpt.params.d_h != cfg.d_h:
            raise ShapeError(
                f"{cfg.init_from}: checkpoint dims (d_h={ckpt.params.d_h}, d_p={ckpt.params.d_p}) "
                f"differ from config (d_h={cfg.d_h}, d_p={cfg.d_p})"
            )
        ckpt.protos.check(h)
        params, protos = ckpt.params, ckpt.protos
        logger.info(f"Warm start from {cfg.init_from}")
    else:
        # external mode never indexes the token table
        vocab = 1 if external is not None else cfg.vocab_size
        params = init_encoder(d_h=cfg.d_h, d_p=cfg.d_p, seed=cfg.seed, vocab_size=vocab)
        protos = init_prototypes(h, d_p=cfg.d_p, seed=cfg.seed + 1)

    state = TrainState(
        params=params,
        protos=protos,
        hierarchy=h,
        templates=dict(templates),
        cfg=cfg,
        optimizer=_adam(cfg),
        external=external,
        threads=max(1, threads),
    )
    state.optimizer.init_moments(state.param_arrays())
    return state


def state_from_checkpoint(
    ckpt: Checkpoint,
    external_embeddings: Optional[str] = None,
    threads: int = 1,
) -> TrainState:
    """A model ready for inference; external hidden states replace the encoder when given."""

    known = {f.name for f in dataclasses.fields(TrainConfig)}
    stored = {k: v for k, v in (ckpt.config or {}).items() if k in known}
    stored["init_from"] = None
    if external_embeddings:
        stored["external_embeddings"] = external_embeddings
    stored["d_h"] = ckpt.params.d_h
    stored["d_p"] = ckpt.params.d_p
    cfg = TrainConfig.from_dict(stored)

    external = None
    if cfg.external_embeddings:
        external = ingest_external(cfg.external_embeddings, cfg.d_h)

    return TrainState(
        params=ckpt.params,
        protos=ckpt.protos,
        hierarchy=ckpt.hierarchy,
        templates=dict(ckpt.templates),
        cfg=cfg,
        optimizer=_adam(cfg),
        external=external,
        threads=max(1, threads),
    )


# =============================================================================
# Batching
# =============================================================================
def make_batches(
    examples: Sequence[TrainingExample], n: int, seed: int, epoch: int
) -> List[List[TrainingExample]]:
    """Shuffle deterministically per (seed, epoch) and cut into groups of `n`.

    A final group shorter than 2 is merged into the previous one.
    """

    if n < 2:
        raise ConfigError(f"batch size must be >= 2, got {n}")
    if len(examples) < 2:
        raise ShapeError(f"need at least 2 training examples, got {len(examples)}")

    order = np.random.default_rng([seed, epoch]).permutation(len(examples))
    shuffled = [examples[i] for i in order]
    batches = [shuffled[i:i + n] for i in range(0, len(shuffled), n)]
    if len(batches) > 1 and len(batches[-1]) < 2:
        batches[-2].extend(batches.pop())
    return batches


# =============================================================================
# Step
# =============================================================================
def _check_finite(lb: LossBreakdown):
    for term, value in lb.terms().items():
        if not np.isfinite(value):
            raise NonFiniteLossError(term, value)


def train_step(
    s: TrainState, examples: Sequence[TrainingExample], cfg: Optional[TrainConfig] = None
) -> Tuple[TrainState, LossBreakdown]:
    """Forward, combined loss, backward and one Adam update (in place)."""

    cfg = cfg or s.cfg
    instances = [ex.instance for ex in examples]
    token_lists, H, V = s.forward(instances)

    b = Batch.from_paths(V, [ex.path for ex in examples], s.hierarchy, cfg.tau)
    lb = total_loss(b, s.protos, s.hierarchy, cfg.toggles())
    _check_finite(lb)

    grad_V = lb.grads["vecs"]
    if token_lists is None:
        grads = project_backward(s.params, H, grad_V)
    else:
        grads = encode_batch_backward(s.params, token_lists, H, grad_V)
    for lvl, g in lb.grads["prototypes"].items():
        grads[f"level{lvl}"] = g

    s.optimizer.lr = cfg.learning_rate
    s.optimizer.step(s.param_arrays(), grads)
    return s, lb


# =============================================================================
# Fit
# =============================================================================
def eval_levels(h: SenseHierarchy) -> List[int]:
    return [lvl for lvl in (1, 2) if lvl in h.level_index]


def monitored_level(h: SenseHierarchy) -> int:
    return min(2, h.depth)


def dev_reports(s: TrainState, dev: Sequence[Instance]) -> Dict[int, MetricsReport]:
    reports = {}
    for lvl in eval_levels(s.hierarchy):
        labelled = [inst for inst in dev if inst.labels_at(lvl)]
        if labelled:
            reports[lvl] = evaluate(s, labelled, lvl)
    return reports


def _improves(candidate: Tuple[float, float], best: Optional[Tuple[float, float]]) -> bool:
    return best is None or candidate > best


def _run_epoch_hooks(hooks, record: Dict, state: TrainState):
    for hook in hooks or []:
        if getattr(hook, "stage", None) != "epoch":
            continue
        try:
            hook.run(record, state)
        except Exception as e:
            logger.error(f"Hook '{hook.name}' failed at epoch {record.get('epoch')}: {e}")


def fit(
    cfg: TrainConfig,
    instances: Sequence[Instance],
    h: SenseHierarchy,
    templates: Dict[str, Template],
    hooks: Optional[Sequence[Any]] = None,
    threads: int = 1,
) -> Tuple[TrainState, List[Dict]]:
    """Train on the train split, select on the dev split.

    Returns the best state and one history record per epoch.
    """

    cfg.validate()
    train = select_split(instances, "train")
    dev = select_split(instances, "dev")
    if not train:
        raise CorpusError("the train split is empty")
    if not dev:
        raise CorpusError("the dev split is empty")

    examples = expand_multilabel(train)
    state = init_state(cfg, h, templates, threads=threads)
    history: List[Dict] = []
    if cfg.max_epochs == 0:
        return state, history

    level = monitored_level(h)
    best_state = state.snapshot()
    best_key: Optional[Tuple[float, float]] = None
    wait = 0

    logger.info(
        f"Training on {len(train)} instances ({len(examples)} examples), "
        f"{len(dev)} dev instances, monitoring level-{level} macro-F1"
    )
    with tqdm(
        total=cfg.max_epochs, desc="training", unit="epoch", leave=False,
        disable=progress_disabled(logger),
    ) as pbar:
        for epoch in range(1, cfg.max_epochs + 1):
            sums = {term: 0.0 for term in LOSS_TERMS}
            batches = make_batches(examples, cfg.batch_size, cfg.seed, epoch)
            for group in batches:
                _, lb = train_step(state, group, cfg)
                for term, value in lb.terms().items():
                    sums[term] += value
            state.epoch = epoch
            state.protos.check(h)

            reports = dev_reports(state, dev)
            watched = reports[level] if level in reports else reports[min(reports)]
            key = (watched.macro_f1, watched.accuracy)
            improved = _improves(key, best_key)
            if improved:
                best_key = key
                best_state = state.snapshot()
                best_state.best = {"epoch": epoch, "macro_f1": key[0], "accuracy": key[1]}
                state.best = best_state.best
                wait = 0
            else:
                wait += 1

            record = {
                "epoch": epoch,
                "loss": {term: sums[term] / len(batches) for term in LOSS_TERMS},
                "dev": {
                    f"level{lvl}": {"accuracy": r.accuracy, "macro_f1": r.macro_f1}
                    for lvl, r in reports.items()
                },
                "best": improved,
            }
            history.append(record)
            _run_epoch_hooks(hooks, record, state)
            pbar.update(1)

            if cfg.patience and wait >= cfg.patience:
                logger.info(f"Early stop after epoch {epoch} (no improvement for {wait} epochs)")
                break

    logger.info(
        f"Best epoch {best_state.best['epoch']}: level-{level} macro-F1 "
        f"{best_state.best['macro_f1']:.4f}, accuracy {best_state.best['accuracy']:.4f}"
    )
    return best_state, history


def rounded_history(history: Sequence[Dict]) -> List[Dict]:
    """History with every float at 4 decimals, for files."""

    def _round(obj):
        if isinstance(obj, dict):
            return {k: _round(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [_round(v) for v in obj]
        if isinstance(obj, float):
            return fmt4(obj)
        return obj

    return [_round(rec) for rec in history]
