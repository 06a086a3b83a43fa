#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.hooks.builtins.training.epoch_log
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

One log line per training epoch.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import logging

from protoverb.hooks import RunHook

logger = logging.getLogger(__name__)


class EpochLog(RunHook):
    """Log the epoch's mean losses and dev metrics.

    Usage: --hook epoch_log
    """

    name = "epoch_log"
    desc = "Log a one-line summary of every training epoch."
    stage = "epoch"
    category = "training"

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.lines = []

    def run(self, record, state=None):
        loss = record.get("loss", {})
        dev = " ".join(
            f"{lvl}: acc {m['accuracy']:.4f} F1 {m['macro_f1']:.4f}"
            for lvl, m in record.get("dev", {}).items()
        )
        line = (
            f"epoch {record.get('epoch')}: loss {loss.get('total', 0.0):.4f} "
            f"(ins_ins {loss.get('ins_ins', 0.0):.4f}, ins_pro {loss.get('ins_pro', 0.0):.4f}, "
            f"pro_pro {loss.get('pro_pro', 0.0):.4f}) | {dev}"
            + (" *" if record.get("best") else "")
        )
        self.lines.append(line)
        logger.info(line)
