# tests/conftest.py
import numpy as np
import pytest

from protoverb.hierarchy import load_hierarchy, parse_hierarchy
from protoverb.synthetic import SynthSpec, gen_synthetic, synth_hierarchy, synth_templates, leaves
from protoverb.trainer import TrainConfig

SMALL_HIERARCHY = """\
# two roots, a level-3 refinement under Comparison.Contrast
1\tComparison\t
1\tExpansion\t
2\tContrast\tComparison
2\tConcession\tComparison
2\tConjunction\tExpansion
3\tJuxtaposition\tComparison.Contrast
3\tOpposition\tComparison.Contrast
"""


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Keep the user's ~/.protoverb (presets, hooks, templates) out of the tests."""

    home = tmp_path / "protoverb_home"
    monkeypatch.setenv("PROTOVERB_HOME", str(home))
    return home


@pytest.fixture
def pdtb2():
    return load_hierarchy("pdtb2")


@pytest.fixture
def small_h():
    return parse_hierarchy(SMALL_HIERARCHY.splitlines(keepends=True))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tiny_synth():
    """3 roots x 2 children, 20 instances per leaf (16/2/2 per split)."""

    spec = SynthSpec(instances_per_leaf=20)
    h, instances = gen_synthetic(spec, seed=7)
    return h, instances, synth_templates(spec)


@pytest.fixture
def tiny_cfg():
    return TrainConfig(
        learning_rate=1e-2,
        batch_size=16,
        max_epochs=3,
        patience=0,
        d_h=16,
        d_p=16,
        vocab_size=4096,
        seed=3,
    )


def random_paths(h, n, rng):
    """`n` random root-to-leaf paths of `h` (handles, level 1 first)."""

    paths = []
    for n_id in rng.choice(leaves(h), size=n):
        path = [int(n_id)]
        while h.node(path[0]).parent is not None:
            path.insert(0, h.node(path[0]).parent)
        paths.append(tuple(path))
    return paths


def random_hierarchy(rng, grandchildren=0):
    """A synthetic hierarchy no larger than 4 roots x 11 children."""

    spec = SynthSpec(
        roots=int(rng.integers(2, 5)),
        children=int(rng.integers(1, 4)),
        grandchildren=grandchildren,
    )
    return synth_hierarchy(spec)
