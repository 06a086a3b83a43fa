#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.hooks.__init__
~~~~~~~~~~~~~~~~~~~~~~~~

This init file also holds the RunHook super class

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""


class RunHook:
    """Base class for all protoverb hooks."""

    name = "base_hook"
    desc = "Does something."

    # Category for CLI grouping: metadata, training, etc.
    category = "uncategorized"

    # 'epoch': Runs after every training epoch with (record, state).
    # 'post':  Runs once after a command with the run manifest dict.
    stage = "post"

    def __init__(self, **kwargs):
        self.opts = kwargs

    def __eq__(self, other):
        """Hooks are 'equal' if they are the same type and have identical dicts."""

        if not isinstance(other, type(self)):
            return False

        return self.__dict__ == other.__dict__

    def setup(self, out_dir):
        """Called once before the command runs, with the directory its
        outputs are staged in."""

        pass

    def outputs(self):
        """Files this hook wrote into the output directory, relative to it."""

        return []

    def teardown(self):
        """Cleanup.

        Called strictly once after the command is complete.
        """

        pass

    def run(self, *args):
        """Execute the hook.

        Args:
            'epoch' stage: (record, state) where record is the epoch's
                           history entry and state the live TrainState.
            'post' stage:  (manifest,) the run manifest; add fields in place.
        """

        return None
