#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.corpus
~~~~~~~~~~~~~~~~

Discourse instances, multi-label expansion and prompt templates.

Corpus files hold one JSON object per line:

    {"id": "...", "arg1": "...", "arg2": "...",
     "senses": ["Expansion.Conjunction"], "lang": "en", "split": "train"}

Template files start with a ``lang: <tag>`` line; the remainder is the
pattern, which must contain each of ``{L1_LABELS}``, ``{L2_LABELS}``,
``{ARG1}``, ``{ARG2}`` and ``{MASK}`` exactly once.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import re
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Sequence, Tuple

from .hierarchy import SenseHierarchy, resolve_path
from .utils import CorpusError, HierarchyError

logger = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")
RECORD_FIELDS = ("id", "arg1", "arg2", "senses", "lang", "split")

PLACEHOLDERS = ("L1_LABELS", "L2_LABELS", "ARG1", "ARG2", "MASK")
PLACEHOLDER_RE = re.compile(r"\{([A-Z0-9_]+)\}")
MASK_TOKEN = "<mask>"
LABEL_JOIN = ", "


# =============================================================================
# Domain Types
# =============================================================================
@dataclass(frozen=True)
class Instance:
    id: str
    arg1: str
    arg2: str
    sense_paths: Tuple[str, ...]
    language: str = "en"
    split: str = "train"
    # handles for each sense path, level 1 first; filled by validation
    resolved: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False, repr=False)

    def labels_at(self, level: int) -> List[int]:
        """Distinct gold handles at `level`, in sense-path order."""

        golds: List[int] = []
        for path in self.resolved:
            if len(path) >= level and path[level - 1] not in golds:
                golds.append(path[level - 1])
        return golds

    def to_record(self) -> Dict:
        return {
            "id": self.id,
            "arg1": self.arg1,
            "arg2": self.arg2,
            "senses": list(self.sense_paths),
            "lang": self.language,
            "split": self.split,
        }


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    mask_offset: int


@dataclass(frozen=True)
class TrainingExample:
    instance_id: str
    path: Tuple[int, ...]
    instance: Instance = field(compare=False, repr=False)


@dataclass(frozen=True)
class Template:
    language: str
    pattern: str

    def __post_init__(self):
        validate_pattern(self.pattern)

    def to_text(self) -> str:
        return f"lang: {self.language}\n{self.pattern}\n"


# =============================================================================
# Corpus loading
# =============================================================================
def validate_instance(inst: Instance, h: SenseHierarchy) -> Instance:
    """Check `inst` against `h` and return it with resolved sense paths."""

    if not inst.sense_paths:
        raise CorpusError(f"instance {inst.id!r} has no senses")
    if len(set(inst.sense_paths)) != len(inst.sense_paths):
        raise CorpusError(f"instance {inst.id!r} repeats a sense path")
    if not str(inst.arg1).strip() or not str(inst.arg2).strip():
        raise CorpusError(f"instance {inst.id!r} has empty argument text")
    if inst.split not in SPLITS:
        raise CorpusError(f"instance {inst.id!r} has unknown split {inst.split!r}")

    resolved = []
    for path in inst.sense_paths:
        try:
            resolved.append(tuple(resolve_path(h, path)))
        except HierarchyError as e:
            raise CorpusError(f"instance {inst.id!r}: {e}") from e
    return replace(inst, resolved=tuple(resolved))


def parse_record(line: str, h: SenseHierarchy) -> Instance:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusError(f"not a JSON object: {e}")
    if not isinstance(rec, dict):
        raise CorpusError("record is not a JSON object")

    missing = [k for k in RECORD_FIELDS if k not in rec]
    if missing:
        raise CorpusError(f"missing field(s): {', '.join(missing)}")

    senses = rec["senses"]
    if isinstance(senses, str):
        senses = [senses]
    if not isinstance(senses, list):
        raise CorpusError("'senses' must be a list of sense paths")

    inst = Instance(
        id=str(rec["id"]),
        arg1=str(rec["arg1"]),
        arg2=str(rec["arg2"]),
        sense_paths=tuple(str(s) for s in senses),
        language=str(rec["lang"]),
        split=str(rec["split"]),
    )
    return validate_instance(inst, h)


def parse_corpus(lines: Iterable[str], h: SenseHierarchy, source: str = "<corpus>") -> List[Instance]:
    """Parse corpus lines; every rejected line is reported with its cause."""

    instances: List[Instance] = []
    rejects: List[str] = []
    seen: Dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            inst = parse_record(line, h)
        except CorpusError as e:
            rejects.append(f"{source}:{lineno}: {e}")
            continue
        if inst.id in seen:
            rejects.append(
                f"{source}:{lineno}: duplicate id {inst.id!r} (first on line {seen[inst.id]})"
            )
            continue
        seen[inst.id] = lineno
        instances.append(inst)

    if rejects:
        raise CorpusError(
            f"{len(rejects)} invalid record(s):\n  " + "\n  ".join(rejects)
        )

    logger.info(f"Loaded {len(instances)} instances from {source}")
    return instances


def load_corpus(path: str, h: SenseHierarchy) -> List[Instance]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_corpus(f, h, source=path)


def dump_corpus(instances: Iterable[Instance]) -> str:
    return "".join(
        json.dumps(inst.to_record(), ensure_ascii=False) + "\n" for inst in instances
    )


def select_split(instances: Iterable[Instance], split: str) -> List[Instance]:
    return [inst for inst in instances if inst.split == split]


# =============================================================================
# Multi-label expansion
# =============================================================================
def expand_multilabel(instances: Sequence[Instance]) -> List[TrainingExample]:
    """One training example per (instance, sense path); instance order, then path order."""

    examples = []
    for inst in instances:
        for path in inst.resolved:
            examples.append(TrainingExample(instance_id=inst.id, path=path, instance=inst))
    return examples


# =============================================================================
# Templates
# =============================================================================
def validate_pattern(pattern: str):
    found = PLACEHOLDER_RE.findall(pattern)
    unknown = sorted({p for p in found if p not in PLACEHOLDERS})
    if unknown:
        raise CorpusError(f"unknown template placeholder(s): {', '.join(unknown)}")
    for p in PLACEHOLDERS:
        count = found.count(p)
        if count != 1:
            raise CorpusError(
                f"template placeholder {{{p}}} must occur exactly once (found {count})"
            )


def parse_template(text: str, source: str = "<template>") -> Template:
    lines = text.splitlines()
    if not lines or not lines[0].lower().startswith("lang:"):
        raise CorpusError(f"{source}: first line must be 'lang: <tag>'")
    language = lines[0].split(":", 1)[1].strip()
    if not language:
        raise CorpusError(f"{source}: empty language tag")
    pattern = "\n".join(lines[1:]).strip("\n")
    try:
        return Template(language=language, pattern=pattern)
    except CorpusError as e:
        raise CorpusError(f"{source}: {e}") from e


def load_template(path: str) -> Template:
    with open(path, "r", encoding="utf-8") as f:
        return parse_template(f.read(), source=path)


def label_inventory(h: SenseHierarchy, level: int) -> str:
    if level not in h.level_index:
        return ""
    return LABEL_JOIN.join(h.label_names(level))


def render(
    template: Template,
    inst: Instance,
    h: SenseHierarchy,
    include_label_info: bool = True,
) -> RenderedPrompt:
    """Wrap an instance in its language template."""

    if template.language != inst.language:
        raise CorpusError(
            f"template language {template.language!r} does not match "
            f"instance {inst.id!r} language {inst.language!r}"
        )

    values = {
        "L1_LABELS": label_inventory(h, 1) if include_label_info else "",
        "L2_LABELS": label_inventory(h, 2) if include_label_info else "",
        "ARG1": inst.arg1,
        "ARG2": inst.arg2,
        "MASK": MASK_TOKEN,
    }

    out: List[str] = []
    offset = 0
    mask_offset = -1
    pos = 0
    for m in PLACEHOLDER_RE.finditer(template.pattern):
        literal = template.pattern[pos:m.start()]
        out.append(literal)
        offset += len(literal)
        if m.group(1) == "MASK":
            mask_offset = offset
        value = values[m.group(1)]
        out.append(value)
        offset += len(value)
        pos = m.end()
    out.append(template.pattern[pos:])

    return RenderedPrompt(text="".join(out), mask_offset=mask_offset)
