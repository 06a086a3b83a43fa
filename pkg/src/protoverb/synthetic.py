#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.synthetic
~~~~~~~~~~~~~~~~~~~

Format-compatible synthetic corpora for desk-scale runs.

Every leaf class owns a disjoint signature vocabulary; argument tokens
are drawn from it, or from a shared noise pool with probability
``noise``. Classes are named ``Class1``, ``Class1A``, ``Class1A1``, ...
and tokens carry a language prefix so that parallel corpora in several
languages share class structure but no surface vocabulary.

Optional extras:

  overlap     ``Class1A>Class1B:0.5`` mixes Class1B signature tokens into
              half of Class1A's argument tokens (a confounded class pair)
  multilabel  ``Class1A>Class2A:0.2`` annotates a fifth of Class1A's
              instances with Class2A as a second sense

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import string
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Tuple, Union

import numpy as np

from . import config as cfg_mod
from .corpus import Instance, Template, dump_corpus, validate_instance
from .hierarchy import SenseHierarchy, SenseNode, render_path
from .templates import TemplateRegistry
from .utils import ConfigError, write_text_atomic

logger = logging.getLogger(__name__)

HIERARCHY_FILE = "hierarchy.tsv"
CORPUS_FILE = "corpus.jsonl"
TEMPLATE_DIR = "templates"

SPLIT_SHARES = (0.8, 0.1, 0.1)


@dataclass
class SynthSpec:
    roots: int = 3
    children: int = 2
    grandchildren: int = 0
    vocab_per_leaf: int = 8
    shared_vocab: int = 16
    instances_per_leaf: int = 50
    arg_len: int = 6
    noise: float = 0.1
    languages: str = "en"
    overlap: str = ""
    multilabel: str = ""

    def validate(self):
        if not 0.0 <= self.noise < 1.0:
            raise ConfigError(f"noise rate must lie in [0, 1), got {self.noise}")
        if self.instances_per_leaf < 1:
            raise ConfigError("instances_per_leaf must be >= 1")
        if self.roots < 1 or self.vocab_per_leaf < 1 or self.arg_len < 1:
            raise ConfigError("roots, vocab_per_leaf and arg_len must be >= 1")
        if self.roots > 26 or self.children > 26 or self.grandchildren > 9:
            raise ConfigError("at most 26 roots, 26 children and 9 grandchildren")
        if self.children < 0 or self.grandchildren < 0 or self.shared_vocab < 1:
            raise ConfigError("children/grandchildren must be >= 0, shared_vocab >= 1")
        if self.grandchildren and not self.children:
            raise ConfigError("grandchildren need children")
        if not self.language_list():
            raise ConfigError("at least one language is required")
        for entry in self.overlap_pairs() + self.multilabel_pairs():
            if not 0.0 <= entry[2] <= 1.0:
                raise ConfigError(f"rate for {entry[0]}>{entry[1]} must lie in [0, 1]")
        return self

    @classmethod
    def from_dict(cls, *layers: Mapping[str, Any]) -> "SynthSpec":
        flat = []
        for layer in layers:
            layer = dict(layer or {})
            for key in ("languages", "overlap", "multilabel"):
                if isinstance(layer.get(key), (list, tuple)):
                    layer[key] = ",".join(_entry_text(e) for e in layer[key])
            flat.append(layer)
        return cfg_mod.build(cls, *flat)

    def language_list(self) -> List[str]:
        return [lang.strip() for lang in str(self.languages).split(",") if lang.strip()]

    def overlap_pairs(self) -> List[Tuple[str, str, float]]:
        return _parse_pairs(self.overlap, "overlap")

    def multilabel_pairs(self) -> List[Tuple[str, str, float]]:
        return _parse_pairs(self.multilabel, "multilabel")


def _entry_text(entry: Union[str, Mapping, List]) -> str:
    if isinstance(entry, Mapping):
        return f"{entry['a']}>{entry['b']}:{entry['rate']}"
    if isinstance(entry, (list, tuple)):
        return f"{entry[0]}>{entry[1]}:{entry[2]}"
    return str(entry)


def _parse_pairs(text: str, what: str) -> List[Tuple[str, str, float]]:
    pairs = []
    for raw in str(text or "").split(","):
        raw = raw.strip()
        if not raw:
            continue
        try:
            names, rate = raw.rsplit(":", 1)
            a, b = names.split(">", 1)
            pairs.append((a.strip(), b.strip(), float(rate)))
        except ValueError:
            raise ConfigError(f"{what} entry {raw!r} is not 'leaf_a>leaf_b:rate'")
    return pairs


# =============================================================================
# Generation
# =============================================================================
def synth_hierarchy(spec: SynthSpec) -> SenseHierarchy:
    nodes: List[SenseNode] = []

    def add(name, level, parent):
        nodes.append(SenseNode(id=len(nodes), name=name, level=level, parent=parent))
        return nodes[-1].id

    for r in range(spec.roots):
        root = add(f"Class{r + 1}", 1, None)
        for c in range(spec.children):
            child_name = f"Class{r + 1}{string.ascii_uppercase[c]}"
            child = add(child_name, 2, root)
            for g in range(spec.grandchildren):
                add(f"{child_name}{g + 1}", 3, child)

    # SenseHierarchy orders rows by declaration; re-declare level by level
    by_level = sorted(nodes, key=lambda n: n.level)
    remap = {n.id: i for i, n in enumerate(by_level)}
    return SenseHierarchy(
        SenseNode(
            id=remap[n.id],
            name=n.name,
            level=n.level,
            parent=None if n.parent is None else remap[n.parent],
        )
        for n in by_level
    )


def leaves(h: SenseHierarchy) -> List[int]:
    return list(h.nodes_at_level(h.depth))


def _split_of(rank: int, n: int) -> str:
    n_train = int(round(SPLIT_SHARES[0] * n))
    n_dev = int(round(SPLIT_SHARES[1] * n))
    if n >= 3:
        n_dev = max(1, n_dev)
        n_train = min(n_train, n - n_dev - 1)
    if rank < n_train:
        return "train"
    if rank < n_train + n_dev:
        return "dev"
    return "test"


def gen_synthetic(spec: SynthSpec, seed: int = 42) -> Tuple[SenseHierarchy, List[Instance]]:
    """A hierarchy and a validated instance list, deterministic in (spec, seed)."""

    spec.validate()
    h = synth_hierarchy(spec)
    leaf_ids = leaves(h)
    leaf_index = {h.node(n).name: j for j, n in enumerate(leaf_ids)}

    def leaf_of(name: str, what: str) -> int:
        if name not in leaf_index:
            raise ConfigError(f"{what} names unknown leaf class {name!r}")
        return leaf_index[name]

    overlap = {}
    for a, b, rate in spec.overlap_pairs():
        overlap.setdefault(leaf_of(a, "overlap"), []).append((leaf_of(b, "overlap"), rate))
    multilabel = {}
    for a, b, rate in spec.multilabel_pairs():
        multilabel.setdefault(leaf_of(a, "multilabel"), []).append((leaf_of(b, "multilabel"), rate))

    rng = np.random.default_rng(seed)
    n = spec.instances_per_leaf

    # language-free draft: (leaf, split, [arg tokens as (kind, class, word)], extra senses)
    drafts = []
    for j, leaf in enumerate(leaf_ids):
        ranks = rng.permutation(n)
        for k in range(n):
            args = []
            for _ in range(2):
                toks = []
                for _ in range(spec.arg_len):
                    if rng.random() < spec.noise:
                        toks.append(("n", 0, int(rng.integers(spec.shared_vocab))))
                        continue
                    source = j
                    for other, rate in overlap.get(j, []):
                        if rng.random() < rate:
                            source = other
                    toks.append(("c", source, int(rng.integers(spec.vocab_per_leaf))))
                args.append(toks)
            extra = [
                other for other, rate in multilabel.get(j, [])
                if other != j and rng.random() < rate
            ]
            drafts.append((leaf, _split_of(int(ranks[k]), n), args, extra))

    instances: List[Instance] = []
    for lang in spec.language_list():
        for i, (leaf, split, args, extra) in enumerate(drafts):
            words = [
                " ".join(
                    f"{lang}n{w}" if kind == "n" else f"{lang}c{c + 1}w{w + 1}"
                    for kind, c, w in toks
                )
                for toks in args
            ]
            senses = [render_path(h, leaf)] + [render_path(h, leaf_ids[o]) for o in extra]
            inst = Instance(
                id=f"{lang}-{i + 1:05d}",
                arg1=words[0],
                arg2=words[1],
                sense_paths=tuple(dict.fromkeys(senses)),
                language=lang,
                split=split,
            )
            instances.append(validate_instance(inst, h))

    logger.info(
        f"Generated {len(instances)} synthetic instances over {len(leaf_ids)} leaf classes "
        f"in {len(spec.language_list())} language(s)"
    )
    return h, instances


def synth_templates(spec: SynthSpec) -> Dict[str, Template]:
    """One template per language: the bundled one when present, else the English pattern."""

    bundled = TemplateRegistry().load_builtins()
    english = bundled.get("en")
    return {
        lang: bundled.get(lang) if lang in bundled else Template(language=lang, pattern=english.pattern)
        for lang in spec.language_list()
    }


def write_synthetic(
    out_dir: str,
    h: SenseHierarchy,
    instances: List[Instance],
    templates: Dict[str, Template],
) -> List[str]:
    """Write hierarchy, corpus and templates below `out_dir`; returns relative paths."""

    write_text_atomic(os.path.join(out_dir, HIERARCHY_FILE), h.dump())
    write_text_atomic(os.path.join(out_dir, CORPUS_FILE), dump_corpus(instances))
    TemplateRegistry(templates).save_dir(os.path.join(out_dir, TEMPLATE_DIR))
    return [HIERARCHY_FILE, CORPUS_FILE] + [
        os.path.join(TEMPLATE_DIR, f"{lang}.tpl") for lang in sorted(templates)
    ]
