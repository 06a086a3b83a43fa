#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.encoder
~~~~~~~~~~~~~~~~~

Instance representation ``v = W h``.

The reference encoder stands in for a pre-trained language model's
mask-token state: ``h`` is the mean of hashed-token embedding rows and
``W`` a purely linear projection into prototype space. Hidden states
exported by an external model can be ingested instead, in which case
only ``W`` is applied (and trained).

Embedding record files hold one instance per line:

    instance_id<TAB>v1 v2 ... v_dh

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import re
import hashlib
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .corpus import RenderedPrompt
from .utils import ShapeError, write_text_atomic

logger = logging.getLogger(__name__)

DEFAULT_VOCAB_SIZE = 2**15
TOKEN_RE = re.compile(r"\w+", re.UNICODE)

# h: (d_h,) hidden state, v: (d_p,) instance vector
HiddenState = np.ndarray
InstanceVec = np.ndarray


@dataclass
class EncoderParams:
    token_table: np.ndarray  # |V| x d_h
    projection: np.ndarray  # d_p x d_h

    def __post_init__(self):
        if self.token_table.ndim != 2 or self.projection.ndim != 2:
            raise ShapeError("encoder parameters must be matrices")
        if self.token_table.shape[1] != self.projection.shape[1]:
            raise ShapeError(
                f"token table width {self.token_table.shape[1]} != "
                f"projection width {self.projection.shape[1]}"
            )

    @property
    def vocab_size(self) -> int:
        return self.token_table.shape[0]

    @property
    def d_h(self) -> int:
        return self.token_table.shape[1]

    @property
    def d_p(self) -> int:
        return self.projection.shape[0]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {"token_table": self.token_table, "projection": self.projection}

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.token_table.copy(), self.projection.copy())


def init_encoder(d_h: int = 64, d_p: int = 128, seed: int = 42, vocab_size: int = DEFAULT_VOCAB_SIZE) -> EncoderParams:
    """i.i.d. normal(0, 1/sqrt(d_h)) parameters."""

    if d_h < 1 or d_p < 1 or vocab_size < 1:
        raise ShapeError("encoder dimensions must be positive")
    rng = np.random.default_rng(seed)
    std = 1.0 / np.sqrt(d_h)
    table = rng.normal(0.0, std, size=(vocab_size, d_h))
    projection = rng.normal(0.0, std, size=(d_p, d_h))
    return EncoderParams(token_table=table, projection=projection)


# =============================================================================
# Tokenization
# =============================================================================
def _bucket(token: str, vocab_size: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % vocab_size


def tokenize(prompt: Union[RenderedPrompt, str], vocab_size: int = DEFAULT_VOCAB_SIZE) -> List[int]:
    """Lowercase, split on whitespace/punctuation, hash into `vocab_size` buckets."""

    text = prompt.text if isinstance(prompt, RenderedPrompt) else str(prompt)
    return [_bucket(tok, vocab_size) for tok in TOKEN_RE.findall(text.lower())]


# =============================================================================
# Forward / Backward
# =============================================================================
def encode(p: EncoderParams, tokens: Sequence[int]) -> Tuple[HiddenState, InstanceVec]:
    """h = mean of the token rows, v = W h."""

    if len(tokens) == 0:
        raise ShapeError("cannot encode an empty token list")
    h = p.token_table[np.asarray(tokens, dtype=np.intp)].mean(axis=0)
    return h, p.projection @ h


def encode_batch(p: EncoderParams, token_lists: Sequence[Sequence[int]]) -> Tuple[np.ndarray, np.ndarray]:
    """Stacked (H, V) for a list of token lists."""

    H = np.empty((len(token_lists), p.d_h))
    for i, tokens in enumerate(token_lists):
        if len(tokens) == 0:
            raise ShapeError(f"cannot encode an empty token list (item {i})")
        H[i] = p.token_table[np.asarray(tokens, dtype=np.intp)].mean(axis=0)
    return H, H @ p.projection.T


def project(p: EncoderParams, H: np.ndarray) -> np.ndarray:
    """Apply W to pre-computed hidden states (external-embedding mode)."""

    H = np.atleast_2d(H)
    if H.shape[1] != p.d_h:
        raise ShapeError(f"hidden states have width {H.shape[1]}, encoder expects {p.d_h}")
    return H @ p.projection.T


def encode_batch_backward(
    p: EncoderParams,
    token_lists: Sequence[Sequence[int]],
    H: np.ndarray,
    grad_V: np.ndarray,
) -> Dict[str, np.ndarray]:
    """Parameter gradients for a batch given dL/dV.

    dL/dW = sum_i grad_v_i (x) h_i ; dL/drow(t) = (W^T grad_v_i) / n_i per occurrence.
    """

    grad_V = np.atleast_2d(grad_V)
    if grad_V.shape != (len(token_lists), p.d_p):
        raise ShapeError(
            f"upstream gradient shape {grad_V.shape} != ({len(token_lists)}, {p.d_p})"
        )

    d_proj = grad_V.T @ H
    d_table = np.zeros_like(p.token_table)
    grad_H = grad_V @ p.projection
    for i, tokens in enumerate(token_lists):
        ids = np.asarray(tokens, dtype=np.intp)
        np.add.at(d_table, ids, grad_H[i] / len(ids))
    return {"token_table": d_table, "projection": d_proj}


def project_backward(p: EncoderParams, H: np.ndarray, grad_V: np.ndarray) -> Dict[str, np.ndarray]:
    """External-embedding mode: only W receives a gradient."""

    grad_V = np.atleast_2d(grad_V)
    if grad_V.shape[1] != p.d_p or grad_V.shape[0] != np.atleast_2d(H).shape[0]:
        raise ShapeError(f"upstream gradient shape {grad_V.shape} does not match batch")
    return {
        "token_table": np.zeros_like(p.token_table),
        "projection": grad_V.T @ np.atleast_2d(H),
    }


def encode_backward(p: EncoderParams, tokens: Sequence[int], grad_v: np.ndarray) -> Dict[str, np.ndarray]:
    """Single-instance form of encode_batch_backward."""

    grad_v = np.asarray(grad_v, dtype=float)
    if grad_v.shape != (p.d_p,):
        raise ShapeError(f"grad_v has shape {grad_v.shape}, expected ({p.d_p},)")
    h, _ = encode(p, tokens)
    return encode_batch_backward(p, [tokens], h[None, :], grad_v[None, :])


# =============================================================================
# External hidden states
# =============================================================================
def parse_external(lines: Iterable[str], d_h: int, source: str = "<embeddings>") -> Dict[str, HiddenState]:
    table: Dict[str, HiddenState] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if "\t" not in line:
            raise ShapeError(f"{source}:{lineno}: expected 'instance_id<TAB>values'")
        inst_id, values = line.split("\t", 1)
        try:
            h = np.array([float(x) for x in values.split()], dtype=np.float64)
        except ValueError as e:
            raise ShapeError(f"{source}:{lineno}: {e}")
        if h.shape[0] != d_h:
            raise ShapeError(
                f"{source}:{lineno}: {inst_id!r} has {h.shape[0]} values, expected d_h={d_h}"
            )
        if not np.isfinite(h).all():
            raise ShapeError(f"{source}:{lineno}: {inst_id!r} has non-finite values")
        if inst_id in table:
            raise ShapeError(f"{source}:{lineno}: duplicate instance id {inst_id!r}")
        table[inst_id] = h
    logger.info(f"Ingested {len(table)} external hidden states from {source}")
    return table


def ingest_external(path: str, d_h: int) -> Dict[str, HiddenState]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_external(f, d_h, source=path)


def dump_external(table: Dict[str, HiddenState]) -> str:
    return "".join(
        f"{inst_id}\t{' '.join(repr(float(x)) for x in h)}\n"
        for inst_id, h in table.items()
    )


def export_external(table: Dict[str, HiddenState], path: str):
    """Write hidden states in the record format (exact round trip)."""

    write_text_atomic(path, dump_external(table))
