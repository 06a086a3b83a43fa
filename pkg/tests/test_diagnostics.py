# tests/test_diagnostics.py
import numpy as np
import pytest

from protoverb.corpus import Instance, select_split, validate_instance
from protoverb.diagnostics import (
    analyze,
    avg_cos_distance,
    confusion_share,
    topk_neighbors,
    write_csvs,
)
from protoverb.presets import resolve_presets
from protoverb.prototypes import init_prototypes
from protoverb.synthetic import SynthSpec, gen_synthetic, synth_templates
from protoverb.trainer import TrainConfig, fit
from protoverb.utils import ConfigError, CorpusError, ShapeError

PATHS = [
    "Comparison.Contrast",
    "Comparison.Concession",
    "Expansion.Conjunction",
    "Comparison.Contrast.Juxtaposition",
    "Expansion",
]


def _instances(h, paths):
    return [
        validate_instance(
            Instance(id=f"t{i}", arg1="a", arg2="b", sense_paths=(p,), split="test"), h
        )
        for i, p in enumerate(paths)
    ]


@pytest.mark.parametrize("k", [1, 3, 5, 10])
def test_histograms_hold_min_k_n(small_h, k):
    rng = np.random.default_rng(k)
    instances = _instances(small_h, PATHS)
    ps = init_prototypes(small_h, d_p=6, seed=2)
    V = rng.normal(size=(len(instances), 6))

    hists = topk_neighbors(ps, small_h, V, instances, level=1, k=k)
    assert set(hists) == set(small_h.nodes_at_level(1))
    for hist in hists.values():
        assert sum(hist.values()) == pytest.approx(min(k, len(instances)))


def test_unlabelled_neighbours_are_skipped(small_h):
    """Level-2 histograms only count instances that carry a level-2 gold."""

    instances = _instances(small_h, PATHS)
    ps = init_prototypes(small_h, d_p=6, seed=2)
    V = np.random.default_rng(0).normal(size=(len(instances), 6))
    for hist in topk_neighbors(ps, small_h, V, instances, level=2, k=10).values():
        assert sum(hist.values()) == pytest.approx(4)


def test_unlabelled_nearest_example_does_not_take_a_slot(small_h):
    instances = _instances(small_h, PATHS)
    ps = init_prototypes(small_h, d_p=6, seed=2)
    V = np.random.default_rng(0).normal(size=(len(instances), 6))
    V[-1] = ps.level(2)[0]

    hists = topk_neighbors(ps, small_h, V, instances, level=2, k=1)
    for hist in hists.values():
        assert sum(hist.values()) == pytest.approx(1.0)


def test_neighbours_need_a_labelled_example(small_h):
    instances = _instances(small_h, ["Comparison", "Expansion"])
    ps = init_prototypes(small_h, d_p=4, seed=2)
    V = np.random.default_rng(1).normal(size=(2, 4))
    with pytest.raises(CorpusError, match="level-2"):
        topk_neighbors(ps, small_h, V, instances, level=2, k=3)


def test_k1_picks_the_nearest_example(small_h):
    instances = _instances(small_h, ["Comparison", "Expansion"])
    ps = init_prototypes(small_h, d_p=4, seed=2)
    V = ps.level(1).copy()[::-1]

    hists = topk_neighbors(ps, small_h, V, instances, level=1, k=1)
    comparison, expansion = small_h.nodes_at_level(1)
    assert hists[comparison] == {expansion: 1.0}
    assert hists[expansion] == {comparison: 1.0}
    assert confusion_share(hists[comparison], comparison) == 1.0
    assert confusion_share({}, comparison) == 0.0


def test_distance_is_zero_on_the_prototypes(small_h):
    instances = _instances(small_h, ["Comparison", "Expansion", "Comparison"])
    ps = init_prototypes(small_h, d_p=4, seed=2)
    C = ps.level(1)
    V = np.stack([C[0] * 2.0, C[1], C[0] * 0.5])

    dist = avg_cos_distance(ps, small_h, V, instances, level=1)
    assert list(dist) == list(small_h.nodes_at_level(1))
    assert all(d == pytest.approx(0.0, abs=1e-12) for d in dist.values())


def test_classes_without_examples_are_left_out(small_h):
    instances = _instances(small_h, ["Expansion.Conjunction"])
    ps = init_prototypes(small_h, d_p=4, seed=2)
    dist = avg_cos_distance(ps, small_h, np.ones((1, 4)), instances, level=2)
    assert list(dist) == [small_h.find("Conjunction", 2)]


def test_diagnostics_errors(small_h):
    instances = _instances(small_h, ["Expansion"])
    ps = init_prototypes(small_h, d_p=4, seed=2)
    with pytest.raises(ConfigError):
        topk_neighbors(ps, small_h, np.ones((1, 4)), instances, level=1, k=0)
    with pytest.raises(CorpusError):
        topk_neighbors(ps, small_h, np.ones((0, 4)), [], level=1)
    with pytest.raises(ShapeError):
        avg_cos_distance(ps, small_h, np.ones((2, 4)), instances, level=1)
    with pytest.raises(ShapeError):
        avg_cos_distance(ps, small_h, np.ones((1, 4)), instances, level=4)


def test_csv_files(tmp_path, small_h):
    instances = _instances(small_h, ["Comparison", "Expansion"])
    ps = init_prototypes(small_h, d_p=4, seed=2)
    report = analyze(ps, small_h, ps.level(1).copy(), instances, level=1, k=2)

    written = write_csvs(report, small_h, str(tmp_path))
    assert written == ["avg_distance.csv", "neighbors.csv"]

    avg = (tmp_path / "avg_distance.csv").read_text().splitlines()
    assert avg == ["class,distance", "Comparison,0.0000", "Expansion,0.0000"]
    neighbors = (tmp_path / "neighbors.csv").read_text().splitlines()
    assert neighbors[0] == "prototype,label,count"
    assert "Comparison,Comparison,1.0000" in neighbors
    assert len(neighbors) == 5


@pytest.mark.slow
def test_overlapped_class_attracts_the_confounder():
    spec = SynthSpec(overlap="Class1A>Class1B:0.5")
    h, instances = gen_synthetic(spec, seed=42)
    cfg = TrainConfig.from_dict(resolve_presets(["desk"]), {"max_epochs": 10, "patience": 0})
    state, _ = fit(cfg, instances, h, synth_templates(spec))

    test = select_split(instances, "test")
    hists = topk_neighbors(state.protos, h, state.embed(test), test, level=2, k=10)
    a, b = h.find("Class1A", 2), h.find("Class1B", 2)
    assert hists[a].get(b, 0.0) >= 2.0
