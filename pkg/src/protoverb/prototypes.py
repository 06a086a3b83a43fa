#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.prototypes
~~~~~~~~~~~~~~~~~~~~

Per-level class prototype matrices and the cosine kernel.

Prototype checkpoint files are line oriented:

    # protoverb prototypes
    d_p<TAB>128
    level<TAB>1<TAB>4
    Comparison<TAB>v1 v2 ... v_dp
    ...

Rows are written with ``repr`` so that reading back is lossless; row
names are the sense paths, in hierarchy order.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import logging
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .hierarchy import SenseHierarchy
from .utils import DegenerateVectorError, ShapeError, write_text_atomic

logger = logging.getLogger(__name__)

NORM_EPS = 1e-12
HEADER = "# protoverb prototypes"


# =============================================================================
# Cosine kernel
# =============================================================================
def normalize_rows(X: np.ndarray, what: str = "vector") -> Tuple[np.ndarray, np.ndarray]:
    """Unit rows and their norms; rows with norm <= 1e-12 raise."""

    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(~(norms > NORM_EPS))
    if bad.size:
        raise DegenerateVectorError(
            f"{what} row(s) {bad[:10].tolist()} have norm <= {NORM_EPS}"
        )
    return X / norms[:, None], norms


def normalize_rows_backward(X_hat: np.ndarray, norms: np.ndarray, G_hat: np.ndarray) -> np.ndarray:
    """Pull dL/dX_hat back through X_hat = X / |X| (row-wise)."""

    radial = np.sum(G_hat * X_hat, axis=1, keepdims=True)
    return (G_hat - radial * X_hat) / norms[:, None]


def cosine_sim(u: np.ndarray, w: np.ndarray) -> float:
    """u.w / (|u| |w|)."""

    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if u.shape != w.shape:
        raise ShapeError(f"cosine_sim of shapes {u.shape} and {w.shape}")
    nu = np.linalg.norm(u)
    nw = np.linalg.norm(w)
    if not (nu > NORM_EPS and nw > NORM_EPS):
        raise DegenerateVectorError(f"cosine_sim input with norm <= {NORM_EPS}")
    return float(np.clip(np.dot(u, w) / (nu * nw), -1.0, 1.0))


def cosine_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """All pairwise cosine similarities between rows of A and rows of B."""

    A_hat, _ = normalize_rows(A)
    B_hat, _ = normalize_rows(B)
    return np.clip(A_hat @ B_hat.T, -1.0, 1.0)


# =============================================================================
# PrototypeSet
# =============================================================================
class PrototypeSet:
    """Level -> (M_level x d_p) matrix; rows follow hierarchy level order."""

    def __init__(self, matrices: Dict[int, np.ndarray]):
        if not matrices:
            raise ShapeError("a prototype set needs at least one level")
        self.matrices: Dict[int, np.ndarray] = {
            lvl: np.asarray(m, dtype=np.float64) for lvl, m in sorted(matrices.items())
        }
        widths = {m.shape[1] for m in self.matrices.values()}
        if len(widths) != 1:
            raise ShapeError(f"prototype levels disagree on d_p: {sorted(widths)}")

    def __repr__(self):
        shapes = ", ".join(f"{lvl}: {m.shape}" for lvl, m in self.matrices.items())
        return f"PrototypeSet({shapes})"

    @property
    def d_p(self) -> int:
        return next(iter(self.matrices.values())).shape[1]

    @property
    def levels(self) -> Tuple[int, ...]:
        return tuple(self.matrices)

    def level(self, level: int) -> np.ndarray:
        if level not in self.matrices:
            raise ShapeError(f"prototype set has no level {level}")
        return self.matrices[level]

    def copy(self) -> "PrototypeSet":
        return PrototypeSet({lvl: m.copy() for lvl, m in self.matrices.items()})

    def arrays(self) -> Dict[str, np.ndarray]:
        return {f"level{lvl}": m for lvl, m in self.matrices.items()}

    def check(self, h: Optional[SenseHierarchy] = None):
        """Raise unless every row has a usable norm (and shapes match `h`)."""

        for lvl, m in self.matrices.items():
            if h is not None and m.shape[0] != h.size(lvl):
                raise ShapeError(
                    f"level {lvl} has {m.shape[0]} prototypes, hierarchy declares {h.size(lvl)}"
                )
            if not np.isfinite(m).all():
                raise DegenerateVectorError(f"level {lvl} prototypes are not finite")
            normalize_rows(m, what=f"level-{lvl} prototype")


def init_prototypes(h: SenseHierarchy, d_p: int = 128, seed: int = 42) -> PrototypeSet:
    """Random prototypes: rows i.i.d. normal(0, 1/sqrt(d_p))."""

    if d_p < 2:
        raise ShapeError(f"prototype dimension must be >= 2, got {d_p}")
    rng = np.random.default_rng(seed)
    std = 1.0 / np.sqrt(d_p)
    ps = PrototypeSet(
        {lvl: rng.normal(0.0, std, size=(h.size(lvl), d_p)) for lvl in h.levels}
    )
    ps.check(h)
    return ps


def similarities(v: np.ndarray, ps: PrototypeSet, level: int) -> np.ndarray:
    """Cosine similarity of `v` to every prototype at `level`."""

    v = np.asarray(v, dtype=np.float64)
    if v.shape != (ps.d_p,):
        raise ShapeError(f"instance vector has shape {v.shape}, expected ({ps.d_p},)")
    return cosine_matrix(v[None, :], ps.level(level))[0]


# =============================================================================
# Checkpoint IO
# =============================================================================
def dump_prototypes(ps: PrototypeSet, h: SenseHierarchy) -> str:
    ps.check(h)
    lines = [HEADER, f"d_p\t{ps.d_p}"]
    for lvl, m in ps.matrices.items():
        lines.append(f"level\t{lvl}\t{m.shape[0]}")
        for name, row in zip(h.label_paths(lvl), m):
            lines.append(f"{name}\t{' '.join(repr(float(x)) for x in row)}")
    return "\n".join(lines) + "\n"


def write_prototypes(ps: PrototypeSet, h: SenseHierarchy, path: str):
    write_text_atomic(path, dump_prototypes(ps, h))


def parse_prototypes(lines: Iterable[str], h: Optional[SenseHierarchy] = None, source: str = "<prototypes>") -> PrototypeSet:
    """Read a prototype checkpoint; with `h`, row names must match its paths."""

    d_p = None
    matrices: Dict[int, list] = {}
    names: Dict[int, list] = {}
    expected: Dict[int, int] = {}
    current = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        # a level's declared rows come first; only then may a header follow
        in_rows = current is not None and len(matrices[current]) < expected[current]
        try:
            if in_rows and len(fields) == 2:
                row = [float(x) for x in fields[1].split()]
                if d_p is not None and len(row) != d_p:
                    raise ShapeError(f"{source}:{lineno}: row has {len(row)} values, d_p={d_p}")
                matrices[current].append(row)
                names[current].append(fields[0])
            elif not in_rows and not matrices and fields[0] == "d_p" and len(fields) == 2:
                d_p = int(fields[1])
            elif not in_rows and fields[0] == "level" and len(fields) == 3:
                current = int(fields[1])
                if current in matrices:
                    raise ShapeError(f"{source}:{lineno}: level {current} declared twice")
                expected[current] = int(fields[2])
                matrices[current] = []
                names[current] = []
            else:
                raise ShapeError(f"{source}:{lineno}: unrecognised prototype line")
        except ValueError as e:
            raise ShapeError(f"{source}:{lineno}: {e}") from e

    if d_p is None or not matrices:
        raise ShapeError(f"{source}: missing d_p header or levels")

    for lvl, rows in matrices.items():
        if len(rows) != expected[lvl]:
            raise ShapeError(
                f"{source}: level {lvl} declares {expected[lvl]} rows, found {len(rows)}"
            )
        if h is not None:
            if lvl not in h.level_index or names[lvl] != h.label_paths(lvl):
                raise ShapeError(f"{source}: level {lvl} classes do not match the hierarchy")

    ps = PrototypeSet({lvl: np.array(rows, dtype=np.float64).reshape(len(rows), d_p) for lvl, rows in matrices.items()})
    if h is not None and set(ps.levels) != set(h.levels):
        raise ShapeError(f"{source}: prototype levels {ps.levels} != hierarchy levels {h.levels}")
    return ps


def read_prototypes(path: str, h: Optional[SenseHierarchy] = None) -> PrototypeSet:
    with open(path, "r", encoding="utf-8") as f:
        return parse_prototypes(f, h, source=path)
