#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.optim
~~~~~~~~~~~~~~~

Adaptive moment estimation over named parameter arrays.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import logging
from typing import Dict

import numpy as np

from .utils import ShapeError

logger = logging.getLogger(__name__)


class Adam:
    """Bias-corrected Adam; parameters are updated in place."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def init_moments(self, params: Dict[str, np.ndarray]):
        """Zero moments shaped exactly like `params`."""

        for k, p in params.items():
            self.m[k] = np.zeros_like(p)
            self.v[k] = np.zeros_like(p)
        return self

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]):
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        step_size = self.lr / bc1

        for k, p in params.items():
            g = grads[k]
            if g.shape != p.shape:
                raise ShapeError(f"gradient for {k} has shape {g.shape}, parameter {p.shape}")
            if k not in self.m:
                self.m[k] = np.zeros_like(p)
                self.v[k] = np.zeros_like(p)

            self.m[k] *= self.beta1
            self.m[k] += (1.0 - self.beta1) * g
            self.v[k] *= self.beta2
            self.v[k] += (1.0 - self.beta2) * (g * g)

            if self.lr == 0:
                continue
            denom = np.sqrt(self.v[k] * (1.0 / bc2)) + self.eps
            p -= step_size * self.m[k] / denom
