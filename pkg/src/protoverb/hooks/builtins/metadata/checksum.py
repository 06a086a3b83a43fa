#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.hooks.builtins.metadata.checksum
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

Calculate the checksum of every output named in the run manifest.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import logging
import hashlib

from protoverb.hooks import RunHook

logger = logging.getLogger(__name__)


class Checksum(RunHook):
    """Calculates output checksums once the command has finished.

    Adds a 'checksums' map {output: {'{algo}': hash, 'size': bytes}} to
    the manifest.

    Usage: --hook checksum:algo=sha256
    """

    name = "checksum"
    desc = "Checksum every output file (md5/sha1/sha256)."
    stage = "post"
    category = "metadata"

    def __init__(self, algo="sha256", **kwargs):
        super().__init__(**kwargs)
        self.algo = str(algo).lower()
        if self.algo not in hashlib.algorithms_available:
            logger.warning(f"Checksum algo '{self.algo}' not found. Defaulting to sha256.")
            self.algo = "sha256"

    def run(self, manifest):
        out_dir = manifest.get("out_dir", ".")
        sums = {}
        for rel in manifest.get("outputs", []):
            filepath = os.path.join(out_dir, rel)
            if not os.path.exists(filepath):
                logger.warning(f"Output listed in manifest is missing: {filepath}")
                continue

            try:
                hasher = hashlib.new(self.algo)
                size = 0
                with open(filepath, "rb") as f:
                    for chunk in iter(lambda: f.read(65536), b""):
                        hasher.update(chunk)
                        size += len(chunk)
                sums[rel] = {self.algo: hasher.hexdigest(), "size": size}
            except Exception as e:
                logger.warning(f"Checksum failed for {filepath}: {e}")

        manifest["checksums"] = sums
        return manifest
