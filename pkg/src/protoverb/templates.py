#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.templates
~~~~~~~~~~~~~~~~~~~

This holds the language template registry.

Templates are collected in layers, later layers overriding earlier ones:
the bundled templates (``protoverb/data/templates``), the user's
``~/.protoverb/templates`` and finally any directory passed explicitly.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import logging
from typing import Dict, Iterable, Optional

from . import config
from .corpus import Template, load_template
from .utils import CorpusError

logger = logging.getLogger(__name__)

THIS_DIR = os.path.dirname(os.path.abspath(__file__))
BUILTIN_TEMPLATE_DIR = os.path.join(THIS_DIR, "data", "templates")
TEMPLATE_EXT = ".tpl"


class TemplateRegistry:
    """Language tag -> Template."""

    def __init__(self, templates: Optional[Dict[str, Template]] = None):
        self._templates: Dict[str, Template] = dict(templates or {})

    def __contains__(self, language):
        return language in self._templates

    def __len__(self):
        return len(self._templates)

    def __iter__(self):
        return iter(sorted(self._templates))

    def as_dict(self) -> Dict[str, Template]:
        return dict(self._templates)

    def register(self, template: Template, origin: str = "runtime"):
        if template.language in self._templates:
            logger.debug(f"Overriding template '{template.language}' from {origin}")
        self._templates[template.language] = template
        logger.debug(f"Registered template: {template.language} ({origin})")

    def load_dir(self, path: str):
        """Register every *.tpl file found in `path`."""

        if not os.path.isdir(path):
            logger.debug(f"No template directory found at {path}")
            return self

        for f in sorted(os.listdir(path)):
            if f.endswith(TEMPLATE_EXT) and not f.startswith("_"):
                self.register(load_template(os.path.join(path, f)), origin=path)
        return self

    def load_builtins(self):
        return self.load_dir(BUILTIN_TEMPLATE_DIR)

    def load_user_templates(self):
        return self.load_dir(os.path.join(config.config_home(), "templates"))

    def get(self, language: str) -> Template:
        try:
            return self._templates[language]
        except KeyError:
            raise CorpusError(
                f"no template registered for language {language!r} "
                f"(available: {', '.join(sorted(self._templates)) or 'none'})"
            )

    def save_dir(self, path: str, languages: Optional[Iterable[str]] = None):
        os.makedirs(path, exist_ok=True)
        for lang in sorted(languages or self._templates):
            with open(os.path.join(path, f"{lang}{TEMPLATE_EXT}"), "w", encoding="utf-8") as f:
                f.write(self.get(lang).to_text())

    @classmethod
    def default(cls, *extra_dirs: str) -> "TemplateRegistry":
        """Bundled, then user, then `extra_dirs` (in order)."""

        reg = cls().load_builtins().load_user_templates()
        for d in extra_dirs:
            if d:
                reg.load_dir(d)
        return reg
