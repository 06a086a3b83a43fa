#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.hooks.builtins.metadata.audit
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

Post-run audit (summary of the command, its config and outputs)

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import csv
import json
import logging

from protoverb.hooks import RunHook

logger = logging.getLogger(__name__)


class Audit(RunHook):
    """Write a summary of the run to a file inside the output directory."""

    name = "audit"
    desc = "Save a run summary to a file. Usage: --hook audit:file=audit.json,format=json"
    stage = "post"
    category = "metadata"

    def __init__(self, file="audit.json", format="json", **kwargs):
        super().__init__(**kwargs)
        self.filename = file
        self.format = str(format).lower()

    def _sanitize(self, manifest):
        """Stringify anything json cannot hold."""

        clean = {}
        for k, v in manifest.items():
            if isinstance(v, (dict, list, str, int, float, bool, type(None))):
                clean[k] = v
            else:
                clean[k] = str(v)
        return clean

    def run(self, manifest):
        out_dir = manifest.get("out_dir", ".")
        path = os.path.join(out_dir, self.filename)
        summary = self._sanitize(manifest)

        try:
            with open(path, "w", encoding="utf-8") as f:
                if self.format == "json":
                    json.dump(summary, f, indent=2, sort_keys=True)

                elif self.format == "csv":
                    writer = csv.writer(f, lineterminator="\n")
                    writer.writerow(["output"])
                    for rel in summary.get("outputs", []):
                        writer.writerow([rel])

                else:
                    f.write(f"[{summary.get('command')}] {summary.get('version')}\n")
                    for rel in summary.get("outputs", []):
                        f.write(f"  {rel}\n")

            manifest.setdefault("outputs", []).append(self.filename)
            logger.info(f"Audit log written to {path}")

        except Exception as e:
            logger.error(f"Failed to write audit log: {e}")

        return manifest
