#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.checkpoint
~~~~~~~~~~~~~~~~~~~~

Checkpoint directories.

    encoder.npz       token table and projection
    prototypes.tsv    per-level prototypes (lossless decimal)
    hierarchy.tsv     the sense hierarchy the prototypes follow
    templates/        one .tpl per language
    config.yaml       echo of the run configuration
    history.jsonl     one record per epoch (or alignment step)

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import json
import logging
import zipfile
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from .corpus import Template
from .encoder import EncoderParams
from .hierarchy import SenseHierarchy, load_hierarchy
from .prototypes import PrototypeSet, read_prototypes, write_prototypes
from .templates import TemplateRegistry
from .utils import ConfigError, ShapeError, write_text_atomic

logger = logging.getLogger(__name__)

ENCODER_FILE = "encoder.npz"
PROTOTYPES_FILE = "prototypes.tsv"
HIERARCHY_FILE = "hierarchy.tsv"
TEMPLATE_DIR = "templates"
CONFIG_FILE = "config.yaml"
HISTORY_FILE = "history.jsonl"

# member timestamp of encoder.npz entries; identical parameters give identical bytes
NPZ_DATE_TIME = (1980, 1, 1, 0, 0, 0)


@dataclass
class Checkpoint:
    params: EncoderParams
    protos: PrototypeSet
    hierarchy: SenseHierarchy
    templates: Dict[str, Template] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    history: List[Dict] = field(default_factory=list)


def dump_history(history: List[Dict]) -> str:
    return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in history)


def write_history(history: List[Dict], path: str):
    write_text_atomic(path, dump_history(history))


def read_history(path: str) -> List[Dict]:
    if not os.path.exists(path):
        return []
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def save_encoder(params: EncoderParams, path: str):
    """Write an .npz archive readable by np.load."""

    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, arr in params.arrays().items():
            info = zipfile.ZipInfo(f"{name}.npy", date_time=NPZ_DATE_TIME)
            with zf.open(info, "w", force_zip64=True) as f:
                np.lib.format.write_array(f, np.ascontiguousarray(arr), allow_pickle=False)


def load_encoder(path: str) -> EncoderParams:
    with np.load(path) as data:
        return EncoderParams(
            token_table=np.array(data["token_table"], dtype=np.float64),
            projection=np.array(data["projection"], dtype=np.float64),
        )


def save_checkpoint(path: str, ckpt: Checkpoint) -> List[str]:
    """Write `ckpt` below `path`; returns the written files (relative)."""

    os.makedirs(path, exist_ok=True)
    save_encoder(ckpt.params, os.path.join(path, ENCODER_FILE))
    write_prototypes(ckpt.protos, ckpt.hierarchy, os.path.join(path, PROTOTYPES_FILE))
    write_text_atomic(os.path.join(path, HIERARCHY_FILE), ckpt.hierarchy.dump())
    TemplateRegistry(ckpt.templates).save_dir(os.path.join(path, TEMPLATE_DIR))
    write_text_atomic(
        os.path.join(path, CONFIG_FILE),
        yaml.safe_dump(ckpt.config, sort_keys=True, default_flow_style=False),
    )
    write_history(ckpt.history, os.path.join(path, HISTORY_FILE))

    written = [ENCODER_FILE, PROTOTYPES_FILE, HIERARCHY_FILE, CONFIG_FILE, HISTORY_FILE]
    written += [os.path.join(TEMPLATE_DIR, f"{lang}.tpl") for lang in sorted(ckpt.templates)]
    logger.info(f"Saved checkpoint to {path}")
    return written


def load_checkpoint(path: str, hierarchy: Optional[SenseHierarchy] = None) -> Checkpoint:
    """Load a checkpoint directory; prototypes are verified against its hierarchy."""

    if not os.path.isdir(path):
        raise ConfigError(f"checkpoint directory not found: {path}")

    for f in (ENCODER_FILE, PROTOTYPES_FILE, HIERARCHY_FILE):
        if not os.path.exists(os.path.join(path, f)):
            raise ConfigError(f"checkpoint {path} is missing {f}")

    h = hierarchy or load_hierarchy(os.path.join(path, HIERARCHY_FILE))
    params = load_encoder(os.path.join(path, ENCODER_FILE))
    protos = read_prototypes(os.path.join(path, PROTOTYPES_FILE), h)
    if params.d_p != protos.d_p:
        raise ShapeError(
            f"checkpoint {path}: encoder d_p {params.d_p} != prototype d_p {protos.d_p}"
        )

    config: Dict[str, Any] = {}
    cfg_path = os.path.join(path, CONFIG_FILE)
    if os.path.exists(cfg_path):
        with open(cfg_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f) or {}

    templates = TemplateRegistry().load_dir(os.path.join(path, TEMPLATE_DIR)).as_dict()
    return Checkpoint(
        params=params,
        protos=protos,
        hierarchy=h,
        templates=templates,
        config=config,
        history=read_history(os.path.join(path, HISTORY_FILE)),
    )
