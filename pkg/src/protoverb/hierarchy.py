#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.hierarchy
~~~~~~~~~~~~~~~~~~~

The three-level sense taxonomy.

Hierarchy files are line oriented, one node per line:

    level<TAB>name<TAB>parent-path

where parent-path is empty for level-1 nodes and otherwise the dot-joined
names of the node's ancestors (e.g. ``Expansion`` or ``Expansion.Conjunction``).
Lines starting with ``#`` are comments. Declaration order is kept and is
the row order of every per-level prototype matrix.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import numbers
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .utils import HierarchyError

logger = logging.getLogger(__name__)

THIS_DIR = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(THIS_DIR, "data")

MAX_DEPTH = 3
PATH_SEP = "."


@dataclass(frozen=True)
class SenseNode:
    id: int
    name: str
    level: int
    parent: Optional[int] = None


class SenseHierarchy:
    """Immutable forest of sense nodes, at most three levels deep."""

    def __init__(self, nodes: Iterable[SenseNode]):
        self.nodes: Tuple[SenseNode, ...] = tuple(nodes)
        self.level_index: Dict[int, Tuple[int, ...]] = {}
        self._children: Dict[int, List[int]] = {n.id: [] for n in self.nodes}
        self._paths: Dict[int, str] = {}
        self._by_path: Dict[str, int] = {}
        self._row: Dict[int, int] = {}

        levels: Dict[int, List[int]] = {}
        for node in self.nodes:
            if node.id != len(self._paths):
                raise HierarchyError(f"node handles must be dense, got {node.id}")
            levels.setdefault(node.level, []).append(node.id)
            self._row[node.id] = len(levels[node.level]) - 1
            if node.parent is None:
                path = node.name
            else:
                self._children[node.parent].append(node.id)
                path = f"{self._paths[node.parent]}{PATH_SEP}{node.name}"
            self._paths[node.id] = path
            self._by_path[path] = node.id

        self.level_index = {lvl: tuple(ids) for lvl, ids in sorted(levels.items())}

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        sizes = ", ".join(f"M_{lvl}={len(ids)}" for lvl, ids in self.level_index.items())
        return f"SenseHierarchy({sizes})"

    @property
    def levels(self) -> Tuple[int, ...]:
        return tuple(self.level_index)

    @property
    def depth(self) -> int:
        return max(self.level_index) if self.level_index else 0

    def node(self, n: int) -> SenseNode:
        if not isinstance(n, numbers.Integral) or isinstance(n, bool) or not 0 <= n < len(self.nodes):
            raise HierarchyError(f"invalid node handle: {n!r}")
        return self.nodes[n]

    def nodes_at_level(self, level: int) -> Tuple[int, ...]:
        if level not in self.level_index:
            raise HierarchyError(f"level {level} is not declared")
        return self.level_index[level]

    def size(self, level: int) -> int:
        return len(self.nodes_at_level(level))

    def row_of(self, n: int) -> int:
        """Row index of `n` inside its level (prototype matrix row)."""

        self.node(n)
        return self._row[n]

    def children_of(self, n: int) -> Tuple[int, ...]:
        self.node(n)
        return tuple(self._children[n])

    def find(self, name: str, level: Optional[int] = None) -> int:
        """Handle of the node called `name`, optionally restricted to `level`."""

        hits = [
            node.id
            for node in self.nodes
            if node.name == name and (level is None or node.level == level)
        ]
        if not hits:
            raise HierarchyError(f"unknown sense name: {name!r}")
        if len(hits) > 1:
            raise HierarchyError(f"sense name {name!r} is ambiguous, pass a level")
        return hits[0]

    def label_names(self, level: int) -> List[str]:
        return [self.nodes[n].name for n in self.nodes_at_level(level)]

    def label_paths(self, level: int) -> List[str]:
        return [self._paths[n] for n in self.nodes_at_level(level)]

    def dump(self) -> str:
        """Serialize back into the hierarchy file format."""

        lines = []
        for node in self.nodes:
            parent = "" if node.parent is None else self._paths[node.parent]
            lines.append(f"{node.level}\t{node.name}\t{parent}")
        return "\n".join(lines) + "\n"


# =============================================================================
# Queries
# =============================================================================
def parent_of(h: SenseHierarchy, n: int) -> Optional[int]:
    """The parent handle of `n`, or None for a level-1 node."""

    return h.node(n).parent


def render_path(h: SenseHierarchy, n: int) -> str:
    h.node(n)
    return h._paths[n]


def resolve_path(h: SenseHierarchy, path: str) -> List[int]:
    """Resolve a dot-joined sense path into handles, level 1 first."""

    parts = [p.strip() for p in str(path).split(PATH_SEP)]
    if not 1 <= len(parts) <= MAX_DEPTH or any(not p for p in parts):
        raise HierarchyError(f"sense path must name 1-{MAX_DEPTH} components: {path!r}")

    handles: List[int] = []
    prefix = ""
    for depth, part in enumerate(parts, start=1):
        prefix = part if not prefix else f"{prefix}{PATH_SEP}{part}"
        n = h._by_path.get(prefix)
        if n is None:
            known = [
                node for node in h.nodes if node.name == part and node.level == depth
            ]
            if known:
                parent = render_path(h, known[0].parent) if known[0].parent is not None else None
                raise HierarchyError(
                    f"{part!r} is not a child of {PATH_SEP.join(parts[:depth - 1])!r}"
                    f" (declared under {parent!r}) in {path!r}"
                )
            raise HierarchyError(f"unknown sense {part!r} in {path!r}")
        handles.append(n)
    return handles


# =============================================================================
# Loading
# =============================================================================
def parse_hierarchy(lines: Iterable[str]) -> SenseHierarchy:
    """Build a SenseHierarchy from hierarchy-format lines."""

    records = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue

        fields = line.split("\t")
        if len(fields) < 2 or len(fields) > 3:
            raise HierarchyError(
                "expected 'level<TAB>name<TAB>parent-path'", line=lineno
            )
        try:
            level = int(fields[0])
        except ValueError:
            raise HierarchyError(f"level is not an integer: {fields[0]!r}", line=lineno)
        name = fields[1].strip()
        parent = fields[2].strip() if len(fields) == 3 else ""

        if level not in (1, 2, 3):
            raise HierarchyError(f"level {level} outside {{1, 2, 3}}", line=lineno)
        if not name or PATH_SEP in name:
            raise HierarchyError(f"invalid sense name {name!r}", line=lineno)
        records.append((lineno, level, name, parent))

    declared = {
        (r[2] if not r[3] else f"{r[3]}{PATH_SEP}{r[2]}") for r in records
    }

    nodes: List[SenseNode] = []
    by_path: Dict[str, int] = {}
    names_by_level: Dict[int, set] = {}
    for lineno, level, name, parent in records:
        if level == 1:
            if parent:
                raise HierarchyError(
                    f"level-1 sense {name!r} cannot have a parent", line=lineno
                )
            parent_id = None
        else:
            if not parent:
                raise HierarchyError(
                    f"level-{level} sense {name!r} needs a parent path", line=lineno
                )
            if len(parent.split(PATH_SEP)) != level - 1:
                raise HierarchyError(
                    f"parent path {parent!r} does not sit at level {level - 1}",
                    line=lineno,
                )
            if parent not in by_path:
                if parent in declared:
                    raise HierarchyError(
                        f"level gap: {name!r} declared before its parent {parent!r}",
                        line=lineno,
                    )
                raise HierarchyError(f"dangling parent path {parent!r}", line=lineno)
            parent_id = by_path[parent]

        path = name if parent_id is None else f"{parent}{PATH_SEP}{name}"
        if path in by_path:
            raise HierarchyError(f"duplicate sibling name {name!r}", line=lineno)
        if name in names_by_level.setdefault(level, set()):
            raise HierarchyError(
                f"sense name {name!r} already used at level {level}", line=lineno
            )
        names_by_level[level].add(name)

        node = SenseNode(id=len(nodes), name=name, level=level, parent=parent_id)
        nodes.append(node)
        by_path[path] = node.id

    if not nodes:
        raise HierarchyError("hierarchy declares no senses")

    h = SenseHierarchy(nodes)
    logger.debug(f"Loaded {h!r}")
    return h


def bundled_hierarchies() -> List[str]:
    return sorted(
        os.path.splitext(f)[0] for f in os.listdir(DATA_DIR) if f.endswith(".tsv")
    )


def load_hierarchy(source: str) -> SenseHierarchy:
    """Load a hierarchy from a file path or a bundled name (e.g. 'pdtb2')."""

    path = source
    if not os.path.exists(path):
        bundled = os.path.join(DATA_DIR, f"{source}.tsv")
        if os.path.exists(bundled):
            path = bundled
        else:
            raise HierarchyError(f"hierarchy not found: {source}")

    with open(path, "r", encoding="utf-8") as f:
        try:
            return parse_hierarchy(f)
        except HierarchyError as e:
            raise HierarchyError(f"{path}: {e}") from e
