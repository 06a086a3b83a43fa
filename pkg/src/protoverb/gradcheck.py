#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.gradcheck
~~~~~~~~~~~~~~~~~~~

Central finite-difference gradient checks.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import logging
from typing import Callable, Dict, Optional

import numpy as np

from .encoder import EncoderParams, encode_batch, encode_batch_backward
from .hierarchy import SenseHierarchy
from .losses import Batch, LossToggles, total_loss
from .prototypes import PrototypeSet

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
DEFAULT_TOL = 1e-4


def numeric_grad(f: Callable[[], float], x: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """d f / d x by central differences; `x` is perturbed in place and restored."""

    grad = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + step
        f_plus = f()
        x[idx] = orig - step
        f_minus = f()
        x[idx] = orig
        grad[idx] = (f_plus - f_minus) / (2.0 * step)
    return grad


def rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """|a - n| / max(|a| + |n|, 1e-8) over the whole block."""

    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    if not a.size:
        return 0.0
    denom = max(np.linalg.norm(a) + np.linalg.norm(n), 1e-8)
    return float(np.linalg.norm(a - n) / denom)


def check_grad(
    f: Callable[[], float],
    x: np.ndarray,
    analytic: np.ndarray,
    step: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
    name: str = "param",
) -> float:
    """Compare `analytic` against numeric_grad; returns the relative error.

    Raises AssertionError when the error exceeds `tol`.
    """

    err = rel_error(analytic, numeric_grad(f, x, step))
    logger.debug(f"gradcheck {name}: rel error {err:.3e}")
    if not err < tol:
        raise AssertionError(f"gradient check failed for {name}: rel error {err:.3e} >= {tol}")
    return err


def check_model(
    params: EncoderParams,
    ps: PrototypeSet,
    h: SenseHierarchy,
    token_lists,
    paths,
    tau: float = 0.1,
    toggles: Optional[LossToggles] = None,
    step: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
) -> Dict[str, float]:
    """Check the full objective against every encoder and prototype parameter.

    Only token-table rows touched by `token_lists` are perturbed.
    """

    def objective() -> float:
        _, V = encode_batch(params, token_lists)
        return total_loss(Batch.from_paths(V, paths, h, tau), ps, h, toggles).l_total

    H, V = encode_batch(params, token_lists)
    lb = total_loss(Batch.from_paths(V, paths, h, tau), ps, h, toggles)
    enc_grads = encode_batch_backward(params, token_lists, H, lb.grads["vecs"])

    errors: Dict[str, float] = {}
    errors["projection"] = check_grad(
        objective, params.projection, enc_grads["projection"], step, tol, "projection"
    )

    used = sorted({t for tokens in token_lists for t in tokens})
    for t in used:
        row = params.token_table[t]
        errors[f"token_table[{t}]"] = check_grad(
            objective, row, enc_grads["token_table"][t], step, tol, f"token_table[{t}]"
        )

    for lvl, m in ps.matrices.items():
        errors[f"level{lvl}"] = check_grad(
            objective, m, lb.grads["prototypes"][lvl], step, tol, f"level{lvl} prototypes"
        )

    logger.info(f"gradcheck passed on {len(errors)} parameter blocks")
    return errors
