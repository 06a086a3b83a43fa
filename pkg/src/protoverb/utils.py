#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.utils
~~~~~~~~~~~~~~~

Utility functions for colorized output, value coercion, staged
(all-or-nothing) output directories and the protoverb exception types.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import sys
import shutil
import logging
import tempfile
import contextlib
import concurrent.futures
from typing import Any, Callable, Iterable, Iterator, List, Optional

import tqdm

logger = logging.getLogger(__name__)

# =============================================================================
# ANSI Color Codes
# =============================================================================
GREEN = "\033[32m"
YELLOW = "\033[33m"
CYAN = "\033[36m"
RESET = "\033[0m"

BOLD = "\033[1m"


# =============================================================================
# Exceptions
# =============================================================================
class ProtoverbError(Exception):
    """Base class for all protoverb errors."""


class HierarchyError(ProtoverbError):
    """Malformed sense hierarchy, unknown handle or unresolvable path."""

    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class CorpusError(ProtoverbError):
    """Invalid corpus record or template."""

    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class ShapeError(ProtoverbError):
    """Dimension mismatch between arrays that have to agree."""


class DegenerateVectorError(ProtoverbError):
    """A vector with (near) zero norm reached the cosine kernel."""


class NonFiniteLossError(ProtoverbError):
    """An objective evaluated to NaN or inf."""

    def __init__(self, term: str, value: float):
        self.term = term
        self.value = value
        super().__init__(f"non-finite loss in term '{term}': {value}")


class ConfigError(ProtoverbError):
    """Invalid configuration value or key."""


# =============================================================================
# Terminal Printing Helpers
# =============================================================================
def colorize(text: str, color: str) -> str:
    """Wrap text in ANSI color codes."""

    return f"{color}{text}{RESET}"


def echo_success_msg(msg: str, prefix: str = "[ OK ]"):
    """Print a standardized success message."""

    print(f"{GREEN}{BOLD}{prefix}{RESET} {msg}")


class TqdmLoggingHandler(logging.Handler):
    """A logging handler that outputs to tqdm.write() to avoid
    interfering with tqdm progress bars.
    """

    def __init__(self, level=logging.NOTSET):
        super().__init__(level)

    def emit(self, record):
        try:
            msg = self.format(record)
            tqdm.tqdm.write(msg, file=sys.stderr)
            self.flush()
        except Exception:
            self.handleError(record)


def setup_logging(verbose: bool = False):
    log_level = logging.INFO if verbose else logging.WARNING

    root = logging.getLogger()
    root.setLevel(log_level)

    if root.hasHandlers():
        root.handlers.clear()

    handler = TqdmLoggingHandler()
    formatter = logging.Formatter("[ %(levelname)s ] %(name)s: %(message)s")
    handler.setFormatter(formatter)
    root.addHandler(handler)


def progress_disabled(log: logging.Logger) -> bool:
    """Progress bars follow the logger: hidden unless INFO is enabled."""

    return log.getEffectiveLevel() > logging.INFO


# =============================================================================
# Data, Type and File Helpers
# =============================================================================
def float_or(val, or_val=None):
    """Return val if val is a float, else return or_val"""

    try:
        return float(val)
    except Exception:
        return or_val


def str_or(instr, or_val=None, replace_quote=True):
    """Return val if val is a string, else return or_val"""

    if instr is None:
        return or_val
    try:
        s = str(instr)
        return s.replace('"', "") if replace_quote else s
    except Exception:
        return or_val


def str2bool(v):
    """Convert a string (or other type) to a boolean.

    Accepts:
      True:  'yes', 'true', 't', 'y', '1', 'on', 1, True
      False: 'no', 'false', 'f', 'n', '0', 'off', 0, False, None

    Returns None when the value is not recognised.
    """

    if v is None:
        return None

    if isinstance(v, bool):
        return v

    if isinstance(v, (int, float)):
        return bool(v)

    v_str = str(v).lower().strip()

    if v_str in ("yes", "true", "t", "y", "1", "on"):
        return True
    elif v_str in ("no", "false", "f", "n", "0", "off"):
        return False
    else:
        return None


def fmt4(x: float) -> float:
    """Round to the fixed 4-decimal precision used by every report."""

    return round(float(x), 4) + 0.0


def write_text_atomic(path: str, text: str):
    """Write `text` to `path` through a temp file and a rename."""

    dest_dir = os.path.dirname(os.path.abspath(path))
    os.makedirs(dest_dir, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp_", dir=dest_dir)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


@contextlib.contextmanager
def staged_output(out_dir: str) -> Iterator[str]:
    """Yield a staging directory whose contents replace into `out_dir` on success.

    Nothing reaches `out_dir` when the body raises.
    """

    out_dir = os.path.abspath(out_dir)
    parent = os.path.dirname(out_dir)
    os.makedirs(parent, exist_ok=True)
    stage = tempfile.mkdtemp(prefix=f".{os.path.basename(out_dir)}_", dir=parent)
    try:
        yield stage
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise

    os.makedirs(out_dir, exist_ok=True)
    for root, dirs, files in os.walk(stage):
        rel = os.path.relpath(root, stage)
        dst_root = out_dir if rel == "." else os.path.join(out_dir, rel)
        os.makedirs(dst_root, exist_ok=True)
        for f in files:
            os.replace(os.path.join(root, f), os.path.join(dst_root, f))
    shutil.rmtree(stage, ignore_errors=True)
    logger.debug(f"Committed staged outputs into {out_dir}")


def parallel_map(fn: Callable[[Any], Any], items: Iterable[Any], threads: int = 1) -> List[Any]:
    """Map `fn` over `items` keeping input order; fans out when threads > 1."""

    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(i) for i in items]

    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))
