#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.presets
~~~~~~~~~~~~~~~~~

Named bundles of TrainConfig overrides (and optional hooks).

Built-ins are the two hyperparameter profiles and the ablation
configurations; user presets in ~/.protoverb/presets.yaml overlay them.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import copy
import logging
from typing import Any, Dict, Iterable, List

import yaml

from . import config
from . import utils
from .utils import ConfigError

# example presets.yaml
# presets:
#   quick:
#     help: "Two epochs at a high learning rate."
#     config: {max_epochs: 2, patience: 1, learning_rate: 0.05}
#     hooks:
#       - {name: epoch_log}

logger = logging.getLogger(__name__)

_GLOBAL_PRESETS: Dict[str, Dict[str, Any]] = {}

ABLATIONS = ("full", "no-ins-ins", "no-pro-pro", "ins-pro-only", "no-label-info")


def load_user_presets() -> Dict[str, Dict[str, Any]]:
    """Load presets from the user's config file."""

    try:
        data = config.load_user_config("presets")
        return data.get("presets", {}) or {}
    except Exception as exception:
        logger.warning(f"Could not load user presets: {exception}")
        return {}


def hook_list_from_preset(preset_def):
    """Convert a preset's hook definitions to a list of Hook objects."""

    from .hooks.registry import HookRegistry

    hooks = []
    for h_def in preset_def.get("hooks", []) or []:
        name = h_def.get("name")
        kwargs = h_def.get("args", {})

        hook_cls = HookRegistry.get_hook(name)
        if hook_cls:
            try:
                hooks.append(hook_cls(**kwargs))
            except Exception as exception:
                logger.error(f"Failed to init preset hook '{name}': {exception}")
        else:
            logger.warning(f"Preset hook '{name}' not found.")

    return hooks


def register_global_preset(name: str, help_text: str, overrides: Dict[str, Any], hooks=None):
    """Register a preset available to every training command."""

    if name in _GLOBAL_PRESETS:
        logger.warning(f"Overwriting global preset '{name}'")

    _GLOBAL_PRESETS[name] = {"help": help_text, "config": dict(overrides), "hooks": list(hooks or [])}
    logger.debug(f"Registered global preset: {name}")


def get_global_presets() -> Dict[str, Dict[str, Any]]:
    """Return built-in presets overlaid with the user's presets."""

    all_presets = copy.deepcopy(_GLOBAL_PRESETS)
    for name, pdef in load_user_presets().items():
        if name in all_presets:
            logger.warning(f"User preset '{name}' overrides the built-in one")
        all_presets[name] = pdef or {}

    return all_presets


def resolve_presets(names: Iterable[str]) -> Dict[str, Any]:
    """Merge the config overrides of `names`, later presets winning."""

    available = get_global_presets()
    merged: Dict[str, Any] = {}
    for name in names or []:
        if name not in available:
            raise ConfigError(
                f"unknown preset {name!r} (available: {', '.join(sorted(available))})"
            )
        merged.update(available[name].get("config", {}) or {})
    return merged


def preset_hooks(names: Iterable[str]) -> List[Any]:
    available = get_global_presets()
    hooks: List[Any] = []
    for name in names or []:
        if name in available:
            hooks.extend(hook_list_from_preset(available[name]))
    return hooks


def init_presets():
    """Generate a default presets.yaml in the user config directory."""

    config_dir = config.config_home()
    config_file = os.path.join(config_dir, "presets.yaml")

    if os.path.exists(config_file):
        print(f"Config file already exists at: {config_file}")
        return

    os.makedirs(config_dir, exist_ok=True)

    default_config = {
        "presets": {
            "quick": {
                "help": "Two desk-scale epochs with per-epoch logging.",
                "config": {"learning_rate": 0.01, "batch_size": 32, "max_epochs": 2, "patience": 1},
                "hooks": [{"name": "epoch_log"}],
            },
            "archive": {
                "help": "Checksum every output and write a json audit.",
                "config": {},
                "hooks": [
                    {"name": "checksum", "args": {"algo": "sha256"}},
                    {"name": "audit", "args": {"file": "audit.json"}},
                ],
            },
        }
    }

    try:
        with open(config_file, "w") as f:
            f.write("# protoverb user presets\n")
            f.write("# Define your own TrainConfig bundles here.\n\n")
            yaml.dump(default_config, f, sort_keys=False, default_flow_style=False)

        utils.echo_success_msg(f"Created default presets at: {config_file}")
    except Exception as e:
        logger.error(f"Could not create presets config: {e}")


# =============================================================================
# Built-ins
# =============================================================================
register_global_preset(
    "published",
    "Published setting: lr 5e-5, batch 196, tau 0.1, d_p 128, 10 epochs, patience 5.",
    {"learning_rate": 5e-5, "batch_size": 196, "tau": 0.1, "d_p": 128, "max_epochs": 10},
)
register_global_preset(
    "desk",
    "Desk-scale synthetic runs: lr 1e-2, batch 32.",
    {"learning_rate": 1e-2, "batch_size": 32},
)
register_global_preset("full", "All three losses with label information.", {})
register_global_preset("no-ins-ins", "Ablation without the instance-instance loss.", {"ins_ins": False})
register_global_preset("no-pro-pro", "Ablation without the prototype-prototype loss.", {"pro_pro": False})
register_global_preset(
    "ins-pro-only",
    "Ablation keeping only the instance-prototype loss.",
    {"ins_ins": False, "pro_pro": False},
)
register_global_preset(
    "no-label-info", "Ablation without label inventories in the prompt.", {"label_info": False}
)
