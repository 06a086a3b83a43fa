# -*- coding: utf-8 -*-

__author__ = "protoverb developers"

try:
    from protoverb._version import __version__
except ImportError:
    # Fallback when using the package from source without installing
    # in editable mode with pip (nobody should do this):
    # <https://pip.pypa.io/en/stable/topics/local-project-installs/#editable-installs>
    import warnings

    warnings.warn(
        "Importing 'protoverb' outside a proper installation."
        " It's highly recommended to install the package from a stable release or"
        " in editable mode.",
        stacklevel=2,
    )
    __version__ = "dev"

# Import everything except the CLI and the hooks.
from . import hierarchy
from . import corpus
from . import encoder
from . import prototypes
from . import losses
from . import trainer
from . import metrics
from . import diagnostics
from . import xlingual
from . import synthetic
from .hierarchy import SenseHierarchy, load_hierarchy
from .corpus import Instance, load_corpus
from .trainer import TrainConfig, fit
from .metrics import evaluate

__all__ = [
    "hierarchy",
    "corpus",
    "encoder",
    "prototypes",
    "losses",
    "trainer",
    "metrics",
    "diagnostics",
    "xlingual",
    "synthetic",
    "SenseHierarchy",
    "load_hierarchy",
    "Instance",
    "load_corpus",
    "TrainConfig",
    "fit",
    "evaluate",
]
