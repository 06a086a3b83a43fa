#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.hooks.registry
~~~~~~~~~~~~~~~~~~~~~~~~

This holds the hook registry.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import sys
import inspect
import logging
import importlib
from typing import Any, Dict, List

from . import RunHook
from .. import config

logger = logging.getLogger(__name__)


class HookRegistry:
    _hooks: Dict[str, Any] = {}

    @classmethod
    def load_builtins(cls):
        """Recursively scan and load all built-in hooks from the 'builtins' directory."""

        current_dir = os.path.dirname(os.path.abspath(__file__))
        builtins_dir = os.path.join(current_dir, "builtins")

        if not os.path.exists(builtins_dir):
            logger.debug(f"No builtins directory found at {builtins_dir}")
            return

        for root, dirs, files in os.walk(builtins_dir):
            # skip __pycache__ and private packages
            dirs[:] = sorted(d for d in dirs if not d.startswith("_"))

            for f in sorted(files):
                if f.endswith(".py") and not f.startswith("_"):
                    rel_dir = os.path.relpath(root, current_dir)
                    mod_path = rel_dir.replace(os.sep, ".")
                    full_mod_name = f"protoverb.hooks.{mod_path}.{f[:-3]}"

                    try:
                        mod = importlib.import_module(full_mod_name)
                        cls._register_from_module(mod)
                    except Exception as e:
                        logger.warning(f"Failed to load built-in hook {full_mod_name}: {e}")

    @classmethod
    def load_user_plugins(cls):
        """Scan ~/.protoverb/hooks/ for python files."""

        p_dir = os.path.join(config.config_home(), "hooks")
        if not os.path.exists(p_dir):
            return

        sys.path.insert(0, p_dir)
        try:
            for f in sorted(os.listdir(p_dir)):
                if f.endswith(".py") and not f.startswith("_"):
                    try:
                        mod = importlib.import_module(f[:-3])
                        cls._register_from_module(mod)
                    except Exception as e:
                        logger.warning(f"Failed to load user hook {f}: {e}")
        finally:
            sys.path.pop(0)

    @classmethod
    def _register_from_module(cls, module):
        """Inspect a module for classes inheriting from RunHook."""

        for name, obj in inspect.getmembers(module):
            if inspect.isclass(obj) and issubclass(obj, RunHook) and obj is not RunHook:
                key = getattr(obj, "name", name.lower())
                cls._hooks[key] = obj
                logger.debug(f"Registered hook from module: {key}")

    @classmethod
    def get_hook(cls, name):
        """Retrieve a hook class by name."""

        return cls._hooks.get(name)

    @classmethod
    def list_hooks(cls):
        """Return a dict of all registered hooks."""

        return cls._hooks


def run_post_hooks(hooks: List[RunHook], manifest: Dict[str, Any]):
    """Run every 'post' hook on the manifest; failures are logged and ignored."""

    for hook in hooks:
        if hook.stage != "post":
            continue
        try:
            hook.run(manifest)
        except Exception as e:
            logger.error(f"Hook '{hook.name}' failed: {e}")


def teardown_hooks(hooks: List[RunHook]):
    for hook in hooks:
        try:
            hook.teardown()
        except Exception as e:
            logger.error(f"Hook '{hook.name}' teardown failed: {e}")
