#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.recipe
~~~~~~~~~~~~~~~~

The workflow engine.
Loads a recipe (a list of protoverb commands) and executes it in order.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import json
import logging
from typing import Any, Dict, List, Optional

import yaml

from .hierarchy import bundled_hierarchies
from .utils import ConfigError, ProtoverbError
from . import __version__ as protoverb_version

logger = logging.getLogger(__name__)

# example recipe.yaml
# project:
#   name: synth-study
# config:
#   min_protoverb_version: "0.1"
# execution:
#   seed: 42
#   threads: 2
# global_hooks:
#   - {name: checksum, args: {algo: sha256}}
# steps:
#   - {command: gen-synth, args: {out: synth}}
#   - command: train
#     args: {preset: [desk], corpus: synth/corpus.jsonl, hierarchy: synth/hierarchy.tsv,
#            templates: synth/templates, out: run}

PATH_ARGS = (
    "out",
    "corpus",
    "hierarchy",
    "templates",
    "config",
    "spec",
    "checkpoint",
    "source",
    "target",
    "embeddings",
    "init_from",
)
HOOK_PATH_ARGS = ("file", "dir")


def _parse_version(v_str):
    """Dependency-free semantic version parser.
    Converts '2.1.0-beta' into (2, 1, 0).
    """

    parts = []
    for p in v_str.split("."):
        num = "".join(filter(str.isdigit, p))
        parts.append(int(num) if num else 0)
    return tuple(parts)


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


class Recipe:
    """The workflow orchestrator.

    Reads command recipes from YAML/JSON files and executes them.

    Usage:
        # Load the Recipe
        recipe = Recipe.from_file("synth_study.yaml")

        # Run it.
        recipe.run()
    """

    def __init__(self, config, base_dir=None):
        self.config = config or {}
        self.base_dir = base_dir or os.getcwd()
        self.name = self.config.get("project", {}).get("name", "Unnamed_Recipe")

    @classmethod
    def from_file(cls, config_source):
        """Factory method to load the Recipe.
        Accepts a filename (str) or a dictionary directly.
        """

        if isinstance(config_source, dict):
            return cls(config_source)

        if not os.path.exists(config_source):
            raise ConfigError(f"Recipe not found: {config_source}")

        base_dir = os.path.dirname(os.path.abspath(config_source))
        ext = os.path.splitext(config_source)[1].lower()

        with open(config_source, "r", encoding="utf-8") as f:
            if ext in [".yaml", ".yml"]:
                config = yaml.safe_load(f)
            else:
                config = json.load(f)

        if not isinstance(config, dict):
            raise ConfigError(f"{config_source}: a recipe must be a mapping")
        return cls(config, base_dir=base_dir)

    def _check_integrity(self):
        """Ensures the protoverb version meets the recipe's minimum requirements."""

        conf = self.config.get("config", {}) or {}
        min_pv = conf.get("min_protoverb_version")

        if min_pv:
            if protoverb_version == "dev":
                logger.warning(f"Recipe requires protoverb v{min_pv}; running an uninstalled tree")
                return
            if _parse_version(protoverb_version) < _parse_version(str(min_pv)):
                raise ConfigError(
                    f"Recipe requires protoverb v{min_pv}, but found v{protoverb_version}"
                )

    def _resolve_path(self, path):
        """Resolves paths relative to the recipe file."""

        if not isinstance(path, str):
            return path
        if os.path.isabs(path):
            return path
        return os.path.abspath(os.path.join(self.base_dir, path))

    def _resolve_arg(self, key: str, value: Any) -> Any:
        if key not in PATH_ARGS:
            return value
        if key == "hierarchy" and value in bundled_hierarchies():
            return value
        return self._resolve_path(value)

    def step_argv(self, command: str, args: Optional[Dict[str, Any]]) -> List[str]:
        """Translate one step into command-line arguments."""

        argv = [command]
        for key, value in (args or {}).items():
            if value is None or value is False:
                continue
            if value is True:
                argv.append(_flag(key))
                continue
            values = value if isinstance(value, (list, tuple)) else [value]
            for v in values:
                argv += [_flag(key), str(self._resolve_arg(key, v))]
        return argv

    def _hook_args(self) -> List[str]:
        argv = []
        for h in self.config.get("global_hooks", []) or []:
            name = h.get("name")
            kwargs = ",".join(
                f"{k}={self._resolve_path(v) if k in HOOK_PATH_ARGS else v}"
                for k, v in (h.get("args", {}) or {}).items()
            )
            argv += ["--hook", f"{name}:{kwargs}" if kwargs else name]
        return argv

    def global_argv(self) -> List[str]:
        run_opts = self.config.get("execution", {}) or {}
        argv = []
        if run_opts.get("quiet"):
            argv.append("--quiet")
        if run_opts.get("threads"):
            argv += ["--threads", str(int(run_opts["threads"]))]
        if run_opts.get("seed") is not None:
            argv += ["--seed", str(int(run_opts["seed"]))]
        return argv + self._hook_args()

    def run(self) -> int:
        """Execute the recipe; returns the number of steps run."""

        from .cli import main

        self._check_integrity()
        steps = self.config.get("steps", []) or []
        if not steps:
            logger.warning("Recipe empty. Nothing to execute.")
            return 0

        logger.info(f"Preparing to execute recipe: {self.name} ({len(steps)} steps)")
        prefix = self.global_argv()
        for i, step in enumerate(steps, start=1):
            command = step.get("command")
            if not command or command == "recipe":
                raise ConfigError(f"recipe step {i}: invalid command {command!r}")

            argv = prefix + self.step_argv(command, step.get("args"))
            logger.info(f"Step {i}/{len(steps)}: {command}")
            code = main(argv)
            if code != 0:
                raise ProtoverbError(f"recipe step {i} ({command}) failed with exit code {code}")

        logger.info(f"Recipe complete: {self.name}")
        return len(steps)
