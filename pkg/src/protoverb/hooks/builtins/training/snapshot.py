#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.hooks.builtins.training.snapshot
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

Save a checkpoint after every training epoch.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import logging

from protoverb.hooks import RunHook
from protoverb.checkpoint import save_checkpoint

logger = logging.getLogger(__name__)


class Snapshot(RunHook):
    """Write the live parameters to DIR/epochNNN after each epoch.

    A relative DIR lives inside the command's output directory, so
    snapshots of a failed run are discarded with the rest of its outputs.

    Usage: --hook snapshot:dir=snapshots
    """

    name = "snapshot"
    desc = "Save a checkpoint of every epoch into a sub-directory of the output."
    stage = "epoch"
    category = "training"

    def __init__(self, dir="snapshots", **kwargs):
        super().__init__(**kwargs)
        self.dir = dir
        self.root = None
        self.saved = []
        self.files = []

    def setup(self, out_dir):
        self.root = out_dir
        self.saved, self.files = [], []

    def run(self, record, state=None):
        if state is None:
            return
        rel = os.path.join(self.dir, f"epoch{int(record['epoch']):03d}")
        path = rel if self.root is None or os.path.isabs(rel) else os.path.join(self.root, rel)
        written = save_checkpoint(path, state.to_checkpoint([record]))
        self.saved.append(path)
        if self.root is not None and not os.path.isabs(rel):
            self.files += [os.path.join(rel, f) for f in written]
        logger.info(f"Snapshot of epoch {record['epoch']} saved to {rel}")

    def outputs(self):
        return list(self.files)
