# tests/test_trainer.py
import dataclasses

import numpy as np
import pytest

from protoverb import trainer
from protoverb.checkpoint import load_checkpoint, save_checkpoint
from protoverb.corpus import expand_multilabel, render, select_split
from protoverb.encoder import export_external, tokenize
from protoverb.hooks.builtins.training.epoch_log import EpochLog
from protoverb.losses import LossBreakdown, parent_rows
from protoverb.metrics import evaluate
from protoverb.presets import ABLATIONS, resolve_presets
from protoverb.prototypes import cosine_matrix
from protoverb.synthetic import SynthSpec, gen_synthetic, synth_templates
from protoverb.trainer import (
    TrainConfig,
    fit,
    init_state,
    make_batches,
    monitored_level,
    state_from_checkpoint,
    train_step,
)
from protoverb.utils import ConfigError, CorpusError, NonFiniteLossError, ShapeError


# =============================================================================
# Config
# =============================================================================
@pytest.mark.parametrize(
    "overrides",
    [
        {"tau": 0.0},
        {"learning_rate": -1.0},
        {"batch_size": 1},
        {"max_epochs": -1},
        {"max_epochs": 2, "patience": 3},
        {"d_p": 1},
        {"beta1": 1.0},
    ],
)
def test_config_validation(overrides):
    with pytest.raises(ConfigError):
        TrainConfig.from_dict(overrides)


@pytest.mark.parametrize("max_epochs, patience", [(10, 5), (3, 3), (0, 0)])
def test_unset_patience_follows_max_epochs(max_epochs, patience):
    assert TrainConfig.from_dict({"max_epochs": max_epochs}).patience == patience


def test_patience_from_the_environment_is_an_integer():
    cfg = TrainConfig.from_dict({"max_epochs": "4"}, {"patience": "2"})
    assert cfg.patience == 2 and isinstance(cfg.patience, int)
    assert TrainConfig.from_dict({"patience": "none"}).patience == 5


def test_max_epochs_zero_returns_initial_state(tiny_synth):
    h, instances, templates = tiny_synth
    cfg = TrainConfig.from_dict(resolve_presets(["desk"]), {"max_epochs": 0, "d_p": 8, "d_h": 8, "vocab_size": 256})
    state, history = fit(cfg, instances, h, templates)
    assert history == []
    assert state.epoch == 0 and state.cfg.patience == 0


def test_config_layers_and_unknown_keys():
    cfg = TrainConfig.from_dict({"learning_rate": "0.5", "max_epochs": 3}, {"max_epochs": "4"})
    assert cfg.learning_rate == 0.5
    assert cfg.max_epochs == 4
    assert cfg.toggles().ins_ins

    with pytest.raises(ConfigError, match="unknown"):
        TrainConfig.from_dict({"learning_rat": 0.1})


# =============================================================================
# Batching
# =============================================================================
def test_make_batches_merges_a_short_tail(tiny_synth):
    _, instances, _ = tiny_synth
    examples = expand_multilabel(select_split(instances, "train"))[:5]

    batches = make_batches(examples, 2, seed=1, epoch=1)
    assert [len(b) for b in batches] == [2, 3]
    assert sorted(ex.instance_id for b in batches for ex in b) == sorted(
        ex.instance_id for ex in examples
    )
    again = make_batches(examples, 2, seed=1, epoch=1)
    assert [[ex.instance_id for ex in b] for b in again] == [
        [ex.instance_id for ex in b] for b in batches
    ]


def test_make_batches_errors(tiny_synth):
    _, instances, _ = tiny_synth
    examples = expand_multilabel(instances)
    with pytest.raises(ConfigError):
        make_batches(examples, 1, seed=1, epoch=1)
    with pytest.raises(ShapeError):
        make_batches(examples[:1], 4, seed=1, epoch=1)


# =============================================================================
# Step
# =============================================================================
def test_train_step_updates_parameters(tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    s = init_state(tiny_cfg, h, templates)
    before = {k: v.copy() for k, v in s.param_arrays().items()}

    examples = expand_multilabel(select_split(instances, "train"))[:16]
    _, lb = train_step(s, examples)

    assert np.isfinite(lb.l_total)
    assert lb.l_total == pytest.approx(lb.l_ins_ins + lb.l_ins_pro + lb.l_pro_pro)
    after = s.param_arrays()
    assert not np.array_equal(before["projection"], after["projection"])
    assert not np.array_equal(before["level1"], after["level1"])


def test_zero_learning_rate_keeps_parameters(tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    cfg = dataclasses.replace(tiny_cfg, learning_rate=0.0)
    s = init_state(cfg, h, templates)
    before = {k: v.copy() for k, v in s.param_arrays().items()}

    train_step(s, expand_multilabel(select_split(instances, "train"))[:16])
    for k, v in s.param_arrays().items():
        np.testing.assert_array_equal(v, before[k])


def test_non_finite_loss_is_fatal(tiny_synth, tiny_cfg, monkeypatch):
    h, instances, templates = tiny_synth
    s = init_state(tiny_cfg, h, templates)
    monkeypatch.setattr(
        trainer,
        "total_loss",
        lambda *a, **k: LossBreakdown(l_ins_pro=float("nan"), l_total=float("nan")),
    )
    with pytest.raises(NonFiniteLossError):
        train_step(s, expand_multilabel(select_split(instances, "train"))[:8])


def test_training_prompts_use_the_instance_language_template(tiny_cfg):
    spec = SynthSpec(languages="en,de", instances_per_leaf=5)
    h, instances = gen_synthetic(spec, seed=1)
    templates = synth_templates(spec)
    s = init_state(tiny_cfg, h, templates)

    for lang in ("en", "de"):
        inst = next(i for i in instances if i.language == lang)
        expected = tokenize(render(templates[lang], inst, h), tiny_cfg.vocab_size)
        assert s.tokens_for(inst) == expected


# =============================================================================
# Fit
# =============================================================================
def test_fit_zero_epochs_returns_the_initial_state(tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    cfg = dataclasses.replace(tiny_cfg, max_epochs=0)
    state, history = fit(cfg, instances, h, templates)
    fresh = init_state(cfg, h, templates)

    assert history == []
    for k, v in state.param_arrays().items():
        np.testing.assert_array_equal(v, fresh.param_arrays()[k])


def test_fit_history_records(tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    state, history = fit(tiny_cfg, instances, h, templates)

    assert [rec["epoch"] for rec in history] == [1, 2, 3]
    assert history[0]["best"] is True
    for rec in history:
        assert set(rec["loss"]) == {"ins_ins", "ins_pro", "pro_pro", "total"}
        assert set(rec["dev"]) == {"level1", "level2"}
    assert state.best["epoch"] in (1, 2, 3)
    assert monitored_level(h) == 2

    best = max(
        (rec["dev"]["level2"]["macro_f1"], rec["dev"]["level2"]["accuracy"]) for rec in history
    )
    assert (state.best["macro_f1"], state.best["accuracy"]) == best


@pytest.mark.parametrize(
    "toggle, term",
    [("ins_ins", "ins_ins"), ("pro_pro", "pro_pro")],
)
def test_disabled_terms_are_zero_for_the_whole_run(tiny_synth, tiny_cfg, toggle, term):
    h, instances, templates = tiny_synth
    cfg = dataclasses.replace(tiny_cfg, **{toggle: False})
    _, history = fit(cfg, instances, h, templates)
    assert all(rec["loss"][term] == 0.0 for rec in history)
    assert all(rec["loss"]["ins_pro"] > 0.0 for rec in history)


def test_early_stop_keeps_the_first_best(tiny_synth, tiny_cfg):
    """With no updates the dev metric never improves after epoch 1."""

    h, instances, templates = tiny_synth
    cfg = dataclasses.replace(tiny_cfg, learning_rate=0.0, max_epochs=5, patience=1)
    state, history = fit(cfg, instances, h, templates)

    assert len(history) == 2
    assert [rec["best"] for rec in history] == [True, False]
    assert state.best["epoch"] == 1


def test_fit_needs_both_splits(tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    no_dev = [
        dataclasses.replace(inst, split="train") if inst.split == "dev" else inst
        for inst in instances
    ]
    with pytest.raises(CorpusError, match="dev split is empty"):
        fit(tiny_cfg, no_dev, h, templates)

    no_train = [inst for inst in instances if inst.split != "train"]
    with pytest.raises(CorpusError, match="train split is empty"):
        fit(tiny_cfg, no_train, h, templates)


def test_fit_is_reproducible(tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    a, hist_a = fit(tiny_cfg, instances, h, templates)
    b, hist_b = fit(tiny_cfg, instances, h, templates)

    assert hist_a == hist_b
    for k, v in a.param_arrays().items():
        np.testing.assert_array_equal(v, b.param_arrays()[k])


def test_epoch_hooks_run_and_failures_are_contained(tiny_synth, tiny_cfg):
    class Boom:
        name = "boom"
        stage = "epoch"

        def run(self, record, state=None):
            raise RuntimeError("boom")

    h, instances, templates = tiny_synth
    log = EpochLog()
    fit(tiny_cfg, instances, h, templates, hooks=[Boom(), log])
    assert len(log.lines) == 3
    assert log.lines[0].startswith("epoch 1: loss ")


# =============================================================================
# Warm start / inference state
# =============================================================================
def test_warm_start_from_a_checkpoint(tmp_path, tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    state, history = fit(dataclasses.replace(tiny_cfg, max_epochs=1), instances, h, templates)
    path = str(tmp_path / "ckpt")
    save_checkpoint(path, state.to_checkpoint(history))

    warm = init_state(dataclasses.replace(tiny_cfg, init_from=path), h, templates)
    for k, v in warm.param_arrays().items():
        np.testing.assert_array_equal(v, state.param_arrays()[k])

    with pytest.raises(ShapeError, match="dims"):
        init_state(dataclasses.replace(tiny_cfg, init_from=path, d_p=8), h, templates)


def test_state_from_checkpoint_predicts_like_the_trained_state(tmp_path, tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    state, history = fit(dataclasses.replace(tiny_cfg, max_epochs=1), instances, h, templates)
    path = str(tmp_path / "ckpt")
    save_checkpoint(path, state.to_checkpoint(history))

    restored = state_from_checkpoint(load_checkpoint(path))
    test = select_split(instances, "test")
    assert restored.cfg.init_from is None
    np.testing.assert_allclose(restored.embed(test), state.embed(test), atol=1e-12)
    assert evaluate(restored, test, 1).to_dict() == evaluate(state, test, 1).to_dict()


def test_external_hidden_states(tmp_path, tiny_synth, tiny_cfg):
    h, instances, templates = tiny_synth
    rng = np.random.default_rng(5)
    path = str(tmp_path / "hidden.tsv")
    export_external({inst.id: rng.normal(size=tiny_cfg.d_h) for inst in instances}, path)

    cfg = dataclasses.replace(tiny_cfg, external_embeddings=path, max_epochs=1)
    state, history = fit(cfg, instances, h, templates)
    assert len(history) == 1
    assert state.params.vocab_size == 1
    assert state.embed(instances[:3]).shape == (3, tiny_cfg.d_p)

    partial = str(tmp_path / "partial.tsv")
    export_external({instances[0].id: np.zeros(tiny_cfg.d_h) + 1.0}, partial)
    s = init_state(dataclasses.replace(cfg, external_embeddings=partial), h, templates)
    with pytest.raises(ShapeError, match="no external hidden state"):
        s.embed(instances[:2])


# =============================================================================
# End to end
# =============================================================================
@pytest.fixture(scope="module")
def desk_run():
    spec = SynthSpec(noise=0.1, instances_per_leaf=50)
    h, instances = gen_synthetic(spec, seed=42)
    cfg = TrainConfig.from_dict(resolve_presets(["desk"]), {"max_epochs": 10, "patience": 0})
    state, history = fit(cfg, instances, h, synth_templates(spec))
    return h, instances, state, history


@pytest.mark.slow
def test_synthetic_corpus_is_learned(desk_run):
    h, instances, state, _ = desk_run
    test = select_split(instances, "test")
    assert evaluate(state, test, 1).accuracy >= 0.95
    assert evaluate(state, test, 2).accuracy >= 0.90


@pytest.mark.slow
def test_children_sit_nearest_their_parent(desk_run):
    h, _, state, _ = desk_run
    S = cosine_matrix(state.protos.level(2), state.protos.level(1))
    parents = parent_rows(h, 2)
    for i, p in enumerate(parents):
        others = np.delete(S[i], p)
        assert S[i, p] > others.mean()


@pytest.fixture(scope="module")
def ablation_runs():
    spec = SynthSpec(noise=0.1, instances_per_leaf=50)
    h, instances = gen_synthetic(spec, seed=42)
    dev = select_split(instances, "dev")
    runs = {}
    for name in ABLATIONS:
        cfg = TrainConfig.from_dict(resolve_presets(["desk", name]), {"max_epochs": 10, "patience": 0})
        state, history = fit(cfg, instances, h, synth_templates(spec))
        runs[name] = (cfg, history, trainer.dev_reports(state, dev)[2].macro_f1)
    return runs


@pytest.mark.slow
def test_every_ablation_completes_with_its_terms_off(ablation_runs):
    for name, (cfg, history, _) in ablation_runs.items():
        assert len(history) == 10, name
        for rec in history:
            if not cfg.ins_ins:
                assert rec["loss"]["ins_ins"] == 0.0, name
            if not cfg.pro_pro:
                assert rec["loss"]["pro_pro"] == 0.0, name
            assert rec["loss"]["ins_pro"] > 0.0, name


@pytest.mark.slow
def test_full_model_is_not_beaten_by_a_single_loss_ablation(ablation_runs):
    full = ablation_runs["full"][2]
    for name in ("no-ins-ins", "no-pro-pro"):
        assert full >= ablation_runs[name][2], name
