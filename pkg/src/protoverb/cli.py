#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.cli
~~~~~~~~~~~~~

The protoverb command line: synthetic data, training, evaluation,
diagnostics, prototype alignment, ablations and predictions.

Every command stages its outputs next to the output directory, moves
them in on success and writes manifest.json last.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import io
import csv
import sys
import json
import time
import signal
import inspect
import logging
import argparse
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from . import utils
from . import config
from . import presets
from . import __version__
from .utils import ProtoverbError, CorpusError, ShapeError, setup_logging

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
MANIFEST_FILE = "manifest.json"
ALIGNMENT_HISTORY_FILE = "alignment.jsonl"
PREDICTIONS_FILE = "predictions.jsonl"
ABLATION_FILE = "ablation.csv"
GRADCHECK_BATCH = 4


# =============================================================================
# Run manifest
# =============================================================================
@dataclass
class RunManifest:
    command: str
    version: str
    seed: int
    config: Dict[str, Any]
    inputs: Dict[str, Any]
    out_dir: str
    outputs: List[str] = field(default_factory=list)
    duration_s: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class CommandResult:
    seed: int
    config: Dict[str, Any]
    inputs: Dict[str, Any]
    outputs: List[str]


def write_manifest(manifest: Dict[str, Any], out_dir: str) -> str:
    path = os.path.join(out_dir, MANIFEST_FILE)
    utils.write_text_atomic(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def run_command(
    name: str,
    args: argparse.Namespace,
    hooks: List[Any],
    body: Callable[[argparse.Namespace, str, List[Any]], CommandResult],
) -> Dict[str, Any]:
    """Run `body` against a staging directory, then hooks, then the manifest."""

    from .hooks.registry import run_post_hooks

    start = time.perf_counter()
    out_dir = os.path.normpath(args.out)
    with utils.staged_output(out_dir) as stage:
        for hook in hooks:
            hook.setup(stage)
        result = body(args, stage, hooks)
        hook_outputs = [rel for hook in hooks for rel in hook.outputs()]

    manifest = RunManifest(
        command=name,
        version=__version__,
        seed=result.seed,
        config=result.config,
        inputs=result.inputs,
        out_dir=out_dir,
        outputs=sorted(result.outputs + hook_outputs),
    ).to_dict()
    run_post_hooks(hooks, manifest)
    manifest["duration_s"] = round(time.perf_counter() - start, 4)

    path = write_manifest(manifest, out_dir)
    logger.info(f"{name}: {len(manifest['outputs'])} output(s) in {out_dir}, manifest at {path}")
    return manifest


# =============================================================================
# Hooks
# =============================================================================
def parse_hook_arg(arg_str):
    """Parse a hook string into (name, kwargs).

    Syntax: 'name:key=val,key2=val2'
    Example: 'checksum:algo=md5'
    """

    if ":" in arg_str:
        name, rest = arg_str.split(":", 1)
        parts = rest.split(",")
    else:
        name = arg_str
        parts = []

    kwargs = {}

    for p in parts:
        if not p.strip():
            continue

        if "=" in p:
            k, v = p.split("=", 1)

            if v.lower() == "true":
                kwargs[k] = True
            elif v.lower() == "false":
                kwargs[k] = False
            elif v.startswith("."):
                kwargs[k] = v
            else:
                try:
                    if "." in v:
                        kwargs[k] = float(v)
                    else:
                        kwargs[k] = int(v)
                except ValueError:
                    kwargs[k] = v
        else:
            # Boolean flag
            kwargs[p] = True

    return name, kwargs


def init_hooks(hook_list_strs):
    """Convert a list of strings ['epoch_log', 'checksum:algo=md5'] into initialized Hook objects."""

    from .hooks.registry import HookRegistry

    active_instances = []
    if not hook_list_strs:
        return active_instances

    for h_str in hook_list_strs:
        name, kwargs = parse_hook_arg(h_str)

        HookCls = HookRegistry.get_hook(name)
        if HookCls:
            try:
                instance = HookCls(**kwargs)
                active_instances.append(instance)
            except Exception as e:
                logger.error(f'Failed to initialize hook "{name}": {e}')
        else:
            logger.warning(
                f'Hook "{name}" not found. Use --list-hooks to see available plugins.'
            )

    return active_instances


def print_hook_info(name: str) -> bool:
    from .hooks.registry import HookRegistry

    hook_cls = HookRegistry.get_hook(name)
    if not hook_cls:
        print(f"Hook '{name}' not found.")
        print("   Run 'protoverb --list-hooks' to see available options.")
        return False

    print(f"\nHook: {hook_cls.name}")
    print(f"    Stage: {hook_cls.stage}")
    print(f"    Type:  {hook_cls.category}")
    print(f"    Origin: {hook_cls.__module__}\n")

    doc = inspect.getdoc(hook_cls)
    print(doc if doc else "(No documentation available for this hook)")
    print()
    return True


def print_hooks():
    from .hooks.registry import HookRegistry

    print("\nAvailable Hooks:")
    print("=" * 60)

    grouped_hooks: Dict[str, List] = {}
    for name, cls_obj in HookRegistry.list_hooks().items():
        cat = getattr(cls_obj, "category", "uncategorized").lower()
        grouped_hooks.setdefault(cat, []).append((name, cls_obj))

    cat_order = ["training", "metadata", "uncategorized"]
    existing_cats = [c for c in cat_order if c in grouped_hooks]
    remaining_cats = sorted(c for c in grouped_hooks if c not in cat_order)

    for cat in existing_cats + remaining_cats:
        print(f"\n[ {cat.title()} ]")

        for name, cls_obj in sorted(grouped_hooks[cat], key=lambda x: x[0]):
            desc = getattr(cls_obj, "desc", "No description")
            mod_path = getattr(cls_obj, "__module__", "")
            origin = mod_path.split(".")[0].capitalize() if mod_path else "User Plugin"
            print(
                f"  {utils.colorize(name, utils.BOLD):<18} "
                f"{utils.colorize(f'[{origin}]', utils.YELLOW):<13} : {desc}"
            )

    print()


def print_presets():
    print("\nAvailable Presets:")
    print("=" * 60)
    for name, pdef in sorted(presets.get_global_presets().items()):
        overrides = ", ".join(f"{k}={v}" for k, v in (pdef.get("config") or {}).items())
        print(f"  {utils.colorize(name, utils.BOLD):<24} {pdef.get('help', '')}")
        if overrides:
            print(f"      {overrides}")
    print()


# =============================================================================
# Config assembly
# =============================================================================
def _seed_layer(args) -> Dict[str, Any]:
    return {"seed": args.seed} if getattr(args, "seed", None) is not None else {}


def _file_layer(path: Optional[str]) -> Dict[str, Any]:
    return config.load_config_file(path) if path else {}


def train_flags(args) -> Dict[str, Any]:
    flags = {
        "tau": args.tau,
        "learning_rate": args.lr,
        "batch_size": args.batch_size,
        "max_epochs": args.max_epochs,
        "patience": args.patience,
        "d_p": args.d_p,
        "d_h": args.d_h,
        "vocab_size": args.vocab_size,
        "ins_ins": args.ins_ins,
        "pro_pro": args.pro_pro,
        "label_info": args.label_info,
        "external_embeddings": args.embeddings,
        "init_from": args.init_from,
    }
    flags.update(_seed_layer(args))
    return {k: v for k, v in flags.items() if v is not None}


def train_config(args, extra_presets: Optional[List[str]] = None):
    """flag > environment > config file > preset > default."""

    from .trainer import TrainConfig

    preset_layer = presets.resolve_presets(list(args.preset or []) + list(extra_presets or []))
    return TrainConfig.from_dict(
        preset_layer,
        _file_layer(args.config),
        config.env_overrides(TrainConfig),
        train_flags(args),
    )


def corpus_templates(instances, template_dir: Optional[str]):
    """The template of every language present in `instances`."""

    from .templates import TemplateRegistry

    reg = TemplateRegistry.default(template_dir)
    return {lang: reg.get(lang) for lang in sorted({inst.language for inst in instances})}


def _nonempty_split(instances, split: Optional[str]):
    from .corpus import select_split

    if not split:
        return list(instances)
    chosen = select_split(instances, split)
    if not chosen:
        raise CorpusError(f"the {split} split is empty")
    return chosen


def _restore(args):
    """(state, instances) for the commands that read a checkpoint and a corpus."""

    from .checkpoint import load_checkpoint
    from .corpus import load_corpus
    from .trainer import state_from_checkpoint

    ckpt = load_checkpoint(args.checkpoint)
    state = state_from_checkpoint(ckpt, args.embeddings, threads=args.threads)
    instances = _nonempty_split(load_corpus(args.corpus, ckpt.hierarchy), args.split)
    return state, instances


def _restore_inputs(args) -> Dict[str, Any]:
    return {
        "checkpoint": args.checkpoint,
        "corpus": args.corpus,
        "split": args.split,
        "embeddings": args.embeddings,
    }


# =============================================================================
# Commands
# =============================================================================
def cmd_gen_synth(args, stage: str, hooks) -> CommandResult:
    from .synthetic import SynthSpec, gen_synthetic, synth_templates, write_synthetic

    file_layer = _file_layer(args.spec)
    seed = args.seed if args.seed is not None else int(file_layer.pop("seed", DEFAULT_SEED))
    flags = {
        "roots": args.roots,
        "children": args.children,
        "grandchildren": args.grandchildren,
        "instances_per_leaf": args.instances_per_leaf,
        "vocab_per_leaf": args.vocab_per_leaf,
        "noise": args.noise,
        "languages": args.languages,
        "overlap": ",".join(args.overlap) if args.overlap else None,
        "multilabel": ",".join(args.multilabel) if args.multilabel else None,
    }
    spec = SynthSpec.from_dict(
        file_layer,
        config.env_overrides(SynthSpec),
        {k: v for k, v in flags.items() if v is not None},
    )

    h, instances = gen_synthetic(spec, seed=seed)
    outputs = write_synthetic(stage, h, instances, synth_templates(spec))
    logger.info(f"Generated {len(instances)} instances over {len(h.nodes_at_level(1))} top-level classes")
    return CommandResult(seed, config.as_dict(spec), {"spec": args.spec}, outputs)


def run_gradcheck(cfg, instances, h, templates, threads: int = 1) -> Dict[str, float]:
    """Finite-difference check of the full objective on a few training examples."""

    from .corpus import expand_multilabel, select_split
    from .gradcheck import check_model
    from .trainer import init_state

    state = init_state(cfg, h, templates, threads=threads)
    examples = expand_multilabel(select_split(instances, "train"))[:GRADCHECK_BATCH]
    if len(examples) < 2:
        raise CorpusError("gradcheck needs at least two training examples")

    token_lists, _, _ = state.forward([ex.instance for ex in examples])
    if token_lists is None:
        logger.warning("gradcheck skipped: external embeddings have no encoder to check")
        return {}

    try:
        errors = check_model(
            state.params, state.protos, h, token_lists,
            [ex.path for ex in examples], cfg.tau, cfg.toggles(),
        )
    except AssertionError as e:
        raise ProtoverbError(f"gradient check failed: {e}") from e

    worst = max(errors, key=errors.get)
    logger.info(f"gradcheck: worst relative error {errors[worst]:.2e} ({worst})")
    return errors


def cmd_train(args, stage: str, hooks) -> CommandResult:
    from .checkpoint import save_checkpoint
    from .corpus import load_corpus
    from .hierarchy import load_hierarchy
    from .trainer import fit, rounded_history

    cfg = train_config(args)
    h = load_hierarchy(args.hierarchy)
    instances = load_corpus(args.corpus, h)
    templates = corpus_templates(instances, args.templates)

    if args.gradcheck:
        run_gradcheck(cfg, instances, h, templates, threads=args.threads)

    state, history = fit(cfg, instances, h, templates, hooks=hooks, threads=args.threads)
    outputs = save_checkpoint(stage, state.to_checkpoint(rounded_history(history)))
    inputs = {
        "corpus": args.corpus,
        "hierarchy": args.hierarchy,
        "templates": args.templates,
        "config": args.config,
        "presets": list(args.preset or []),
    }
    return CommandResult(cfg.seed, config.as_dict(cfg), inputs, outputs)


def cmd_eval(args, stage: str, hooks) -> CommandResult:
    from .metrics import evaluate_vectors, write_report
    from .trainer import eval_levels

    state, instances = _restore(args)
    h = state.hierarchy
    levels = sorted(set(args.level)) if args.level else eval_levels(h)
    for lvl in levels:
        if lvl not in h.level_index:
            raise ShapeError(f"level {lvl} is not declared in the hierarchy (levels: {h.levels})")

    V = state.embed(instances)
    outputs = []
    for lvl in levels:
        report = evaluate_vectors(V, instances, state.protos, h, lvl)
        name = f"metrics_level{lvl}.json"
        write_report(report, os.path.join(stage, name))
        logger.info(report.summary())
        outputs.append(name)

    return CommandResult(state.cfg.seed, {"levels": levels}, _restore_inputs(args), outputs)


def cmd_analyze(args, stage: str, hooks) -> CommandResult:
    from .diagnostics import analyze, write_csvs
    from .trainer import monitored_level

    state, instances = _restore(args)
    h = state.hierarchy
    level = args.level if args.level is not None else monitored_level(h)
    report = analyze(state.protos, h, state.embed(instances), instances, level, args.k)
    outputs = write_csvs(report, h, stage)
    return CommandResult(state.cfg.seed, {"level": level, "k": args.k}, _restore_inputs(args), outputs)


def cmd_predict(args, stage: str, hooks) -> CommandResult:
    from .metrics import prediction_records, write_predictions

    state, instances = _restore(args)
    records = prediction_records(instances, state.embed(instances), state.protos, state.hierarchy)
    write_predictions(records, os.path.join(stage, PREDICTIONS_FILE))
    logger.info(f"Predicted {len(records)} instances")
    return CommandResult(state.cfg.seed, {}, _restore_inputs(args), [PREDICTIONS_FILE])


def cmd_align(args, stage: str, hooks) -> CommandResult:
    from .checkpoint import dump_history, load_checkpoint, save_checkpoint
    from .corpus import load_corpus
    from .metrics import evaluate, write_report
    from .trainer import rounded_history, state_from_checkpoint
    from .xlingual import (
        AlignmentConfig,
        align,
        alignment_margins,
        correspondence_by_name,
        describe_correspondence,
    )

    flags = {
        "tau_align": args.tau_align,
        "steps": args.steps,
        "learning_rate": args.lr,
        "update_mode": args.update_mode,
        "level": args.level,
    }
    flags.update(_seed_layer(args))
    acfg = AlignmentConfig.from_dict(
        _file_layer(args.config),
        config.env_overrides(AlignmentConfig),
        {k: v for k, v in flags.items() if v is not None},
    )

    src = load_checkpoint(args.source)
    tgt = load_checkpoint(args.target)
    corr = correspondence_by_name(src.hierarchy, tgt.hierarchy, acfg.level)
    for s_name, t_name in describe_correspondence(src.hierarchy, tgt.hierarchy, corr):
        logger.debug(f"aligning {s_name} <-> {t_name}")

    src_p, tgt_p, history = align(src.protos, tgt.protos, corr, acfg)
    margins = alignment_margins(src_p, tgt_p, corr, acfg.level)
    logger.info(f"Smallest alignment margin: {float(margins.min()):.4f}")

    outputs = save_checkpoint(stage, dataclasses.replace(tgt, protos=tgt_p))
    if acfg.update_mode == "both":
        src_files = save_checkpoint(
            os.path.join(stage, "source"), dataclasses.replace(src, protos=src_p)
        )
        outputs += [os.path.join("source", f) for f in src_files]

    utils.write_text_atomic(
        os.path.join(stage, ALIGNMENT_HISTORY_FILE), dump_history(rounded_history(history))
    )
    outputs.append(ALIGNMENT_HISTORY_FILE)

    if args.corpus:
        aligned = state_from_checkpoint(
            dataclasses.replace(tgt, protos=tgt_p), args.embeddings, threads=args.threads
        )
        test = _nonempty_split(load_corpus(args.corpus, tgt.hierarchy), args.split)
        report = evaluate(aligned, test, acfg.level)
        name = f"metrics_level{acfg.level}.json"
        write_report(report, os.path.join(stage, name))
        logger.info(report.summary())
        outputs.append(name)

    inputs = {
        "source": args.source,
        "target": args.target,
        "config": args.config,
        "corpus": args.corpus,
    }
    return CommandResult(acfg.seed, config.as_dict(acfg), inputs, outputs)


def ablation_csv(rows: List[List[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["preset", "level", "accuracy", "macro_f1"])
    writer.writerows(rows)
    return buf.getvalue()


def cmd_ablate(args, stage: str, hooks) -> CommandResult:
    from .checkpoint import save_checkpoint
    from .corpus import load_corpus, select_split
    from .hierarchy import load_hierarchy
    from .trainer import dev_reports, fit, rounded_history

    names = [n.strip() for n in args.ablations.split(",") if n.strip()]
    if not names:
        raise ProtoverbError("no ablation presets given")
    configs = {name: train_config(args, extra_presets=[name]) for name in names}

    h = load_hierarchy(args.hierarchy)
    instances = load_corpus(args.corpus, h)
    templates = corpus_templates(instances, args.templates)
    dev = select_split(instances, "dev")

    rows: List[List[Any]] = []
    outputs: List[str] = []
    for name in names:
        logger.info(f"Ablation '{name}'")
        state, history = fit(configs[name], instances, h, templates, hooks=hooks, threads=args.threads)
        files = save_checkpoint(os.path.join(stage, name), state.to_checkpoint(rounded_history(history)))
        outputs += [os.path.join(name, f) for f in files]
        for lvl, report in sorted(dev_reports(state, dev).items()):
            rows.append([name, lvl, f"{utils.fmt4(report.accuracy):.4f}", f"{utils.fmt4(report.macro_f1):.4f}"])

    utils.write_text_atomic(os.path.join(stage, ABLATION_FILE), ablation_csv(rows))
    outputs.append(ABLATION_FILE)

    seed = next(iter(configs.values())).seed
    inputs = {"corpus": args.corpus, "hierarchy": args.hierarchy, "templates": args.templates}
    return CommandResult(seed, {n: config.as_dict(c) for n, c in configs.items()}, inputs, outputs)


def cmd_recipe(args) -> int:
    from .recipe import Recipe

    Recipe.from_file(args.recipe_file).run()
    return 0


COMMAND_BODIES = {
    "gen-synth": cmd_gen_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "analyze": cmd_analyze,
    "align": cmd_align,
    "ablate": cmd_ablate,
    "predict": cmd_predict,
}


# =============================================================================
# Command-line Interface(s) (CLI)
#
# `get_parser` here was extracted so we can auto-document the cli with Sphinx.
# =============================================================================
def _add_out(p):
    p.add_argument("-O", "--out", required=True, metavar="DIR", help="Output directory.")


def _add_train_args(p):
    io_grp = p.add_argument_group("Inputs")
    io_grp.add_argument("--corpus", required=True, metavar="FILE", help="Corpus (JSON lines).")
    io_grp.add_argument(
        "--hierarchy", required=True, metavar="SOURCE",
        help="Hierarchy file or bundled name (pdtb2, pdtb3).",
    )
    io_grp.add_argument(
        "--templates", metavar="DIR",
        help="Extra template directory (layered over bundled and user templates).",
    )
    io_grp.add_argument("--config", metavar="FILE", help="Config file (key = value, yaml or json).")
    io_grp.add_argument(
        "--preset", action="append", metavar="NAME",
        help="Apply a named preset (repeatable; see --list-presets).",
    )
    io_grp.add_argument("--embeddings", metavar="FILE", help="External hidden states (id<TAB>values lines).")
    io_grp.add_argument("--init-from", metavar="DIR", help="Warm start from an existing checkpoint.")
    _add_out(p)

    hp_grp = p.add_argument_group("Hyperparameters")
    hp_grp.add_argument("--tau", type=float, metavar="T", help="Contrastive temperature (default: 0.1).")
    hp_grp.add_argument("--lr", type=float, metavar="LR", help="Adam learning rate (default: 5e-5).")
    hp_grp.add_argument("--batch-size", type=int, metavar="N", help="Batch size (default: 196).")
    hp_grp.add_argument("--max-epochs", type=int, metavar="N", help="Maximum epochs (default: 10).")
    hp_grp.add_argument(
        "--patience", type=int, metavar="N",
        help="Early-stopping patience; 0 disables (default: min(5, max epochs)).",
    )
    hp_grp.add_argument("--d-p", type=int, metavar="N", help="Prototype dimension (default: 128).")
    hp_grp.add_argument("--d-h", type=int, metavar="N", help="Hidden dimension (default: 64).")
    hp_grp.add_argument("--vocab-size", type=int, metavar="N", help="Hashed vocabulary size.")

    tg_grp = p.add_argument_group("Loss Toggles")
    tg_grp.add_argument(
        "--no-ins-ins", dest="ins_ins", action="store_const", const=False,
        help="Disable the instance-instance loss.",
    )
    tg_grp.add_argument(
        "--no-pro-pro", dest="pro_pro", action="store_const", const=False,
        help="Disable the prototype-prototype loss.",
    )
    tg_grp.add_argument(
        "--no-label-info", dest="label_info", action="store_const", const=False,
        help="Render prompts without label inventories.",
    )


def _add_restore_args(p, split_default: Optional[str] = "test"):
    p.add_argument("--checkpoint", required=True, metavar="DIR", help="Checkpoint directory.")
    p.add_argument("--corpus", required=True, metavar="FILE", help="Corpus (JSON lines).")
    p.add_argument(
        "--split", default=split_default, metavar="NAME",
        help=f"Corpus split to use (default: {split_default or 'all'}).",
    )
    p.add_argument("--embeddings", metavar="FILE", help="External hidden states (id<TAB>values lines).")
    _add_out(p)


def get_parser():
    parser = argparse.ArgumentParser(
        prog="protoverb",
        description=f"{utils.CYAN}%(prog)s{utils.RESET} ({__version__}) :: Hierarchical prototype verbalizers",
        formatter_class=argparse.RawTextHelpFormatter,
        epilog="""
Examples:
  protoverb gen-synth -O synth
  protoverb train --preset desk --corpus synth/corpus.jsonl --hierarchy synth/hierarchy.tsv \\
      --templates synth/templates -O run
  protoverb eval --checkpoint run --corpus synth/corpus.jsonl --level 1 --level 2 -O run/eval
  protoverb analyze --checkpoint run --corpus synth/corpus.jsonl -O run/analysis
        """,
    )
    parser.add_argument("-v", "--version", action="version", version=f"%(prog)s {__version__}")

    exec_grp = parser.add_argument_group("Execution Control")
    exec_grp.add_argument(
        "-q", "--quiet", action="store_true",
        help="Suppress progress bars and status messages.",
    )
    exec_grp.add_argument(
        "-H", "--threads", type=int, default=1, metavar="N",
        help="Parallel workers for per-instance encoding (default: 1).",
    )
    exec_grp.add_argument(
        "--seed", type=int, default=None, metavar="N",
        help=f"Random seed (default: {DEFAULT_SEED}, or the config file's).",
    )

    adv_grp = parser.add_argument_group("Advanced Configuration")
    adv_grp.add_argument(
        "--hook", action="append",
        help="Add a hook (e.g. 'checksum:algo=md5', 'snapshot:dir=snaps').",
    )
    adv_grp.add_argument("--list-hooks", action="store_true", help="List all available hooks.")
    adv_grp.add_argument(
        "--hook-info", metavar="HOOK_NAME", type=str,
        help="Print detailed documentation and arguments for a specific hook.",
    )
    adv_grp.add_argument("--list-presets", action="store_true", help="List all available presets.")
    adv_grp.add_argument(
        "--init-presets", action="store_true",
        help="Generate a default ~/.protoverb/presets.yaml file.",
    )

    # --seed is also accepted after the command; absent there, the global value stands
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, metavar="N",
        help=f"Random seed (default: {DEFAULT_SEED}, or the config file's).",
    )

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("gen-synth", parents=[common], help="Generate a synthetic hierarchy and corpus.")
    p.add_argument("--spec", metavar="FILE", help="Generator spec (key = value, yaml or json).")
    p.add_argument("--roots", type=int, metavar="N", help="Top-level classes (default: 3).")
    p.add_argument("--children", type=int, metavar="N", help="Children per root (default: 2).")
    p.add_argument("--grandchildren", type=int, metavar="N", help="Level-3 refinements per child.")
    p.add_argument("--instances-per-leaf", type=int, metavar="N", help="Instances per leaf (default: 50).")
    p.add_argument("--vocab-per-leaf", type=int, metavar="N", help="Signature tokens per leaf.")
    p.add_argument("--noise", type=float, metavar="RATE", help="Token noise rate in [0, 1).")
    p.add_argument("--languages", metavar="LIST", help="Comma separated language tags (default: en).")
    p.add_argument("--overlap", action="append", metavar="A>B:RATE", help="Confound leaf A with leaf B.")
    p.add_argument("--multilabel", action="append", metavar="A>B:RATE", help="Annotate leaf A with B as well.")
    _add_out(p)

    p = sub.add_parser("train", parents=[common], help="Train encoder and prototypes; keep the best dev epoch.")
    _add_train_args(p)
    p.add_argument(
        "--gradcheck", action="store_true",
        help="Check analytic gradients against finite differences before training.",
    )

    p = sub.add_parser("ablate", parents=[common], help="Train each ablation preset and tabulate dev metrics.")
    _add_train_args(p)
    p.add_argument(
        "--ablations", default=",".join(presets.ABLATIONS), metavar="LIST",
        help=f"Comma separated presets (default: {','.join(presets.ABLATIONS)}).",
    )

    p = sub.add_parser("eval", parents=[common], help="Accuracy and macro-F1 per level.")
    _add_restore_args(p)
    p.add_argument("--level", type=int, action="append", metavar="L", help="Level to score (repeatable).")

    p = sub.add_parser("analyze", parents=[common], help="Prototype distances and nearest-neighbour histograms.")
    _add_restore_args(p)
    p.add_argument("--level", type=int, metavar="L", help="Prototype level (default: 2 when declared).")
    p.add_argument("-k", "--k", type=int, default=10, metavar="K", help="Neighbours per prototype (default: 10).")

    p = sub.add_parser("predict", parents=[common], help="Per-instance predictions at every level (JSON lines).")
    _add_restore_args(p, split_default=None)

    p = sub.add_parser("align", parents=[common], help="Align target prototypes with source prototypes class-wise.")
    p.add_argument("--source", required=True, metavar="DIR", help="Source-language checkpoint.")
    p.add_argument("--target", required=True, metavar="DIR", help="Target-language checkpoint.")
    p.add_argument("--config", metavar="FILE", help="Alignment config file.")
    p.add_argument("--steps", type=int, metavar="N", help="Adam steps (default: 300).")
    p.add_argument("--lr", type=float, metavar="LR", help="Learning rate (default: 1e-2).")
    p.add_argument("--tau-align", type=float, metavar="T", help="Alignment temperature (default: 0.1).")
    p.add_argument(
        "--update-mode", choices=("target_only", "both"),
        help="Which prototype sets move (default: target_only).",
    )
    p.add_argument("--level", type=int, metavar="L", help="Level to align (default: 1).")
    p.add_argument("--corpus", metavar="FILE", help="Target corpus to evaluate the aligned prototypes on.")
    p.add_argument("--split", default="test", metavar="NAME", help="Evaluation split (default: test).")
    p.add_argument("--embeddings", metavar="FILE", help="External hidden states (id<TAB>values lines) for the target corpus.")
    _add_out(p)

    p = sub.add_parser("recipe", parents=[common], help="Run a sequence of commands from a yaml/json recipe.")
    p.add_argument("recipe_file", metavar="FILE", help="Recipe file.")

    return parser


def _is_recipe_file(arg: str) -> bool:
    return arg.endswith((".json", ".yaml", ".yml")) and os.path.isfile(arg)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse `argv`, run one command and return the exit status."""

    from .hooks.registry import HookRegistry, teardown_hooks

    argv = list(sys.argv[1:] if argv is None else argv)

    HookRegistry.load_builtins()
    HookRegistry.load_user_plugins()

    # protoverb my_recipe.yaml
    if argv and _is_recipe_file(argv[0]):
        argv = ["recipe"] + argv

    parser = get_parser()
    args = parser.parse_args(argv)

    # this prevents logging from distorting tqdm and leaving partial tqdm bars everywhere...
    setup_logging(not args.quiet)

    if args.init_presets:
        presets.init_presets()
        return 0

    if args.hook_info:
        return 0 if print_hook_info(args.hook_info) else 1

    if args.list_hooks:
        print_hooks()
        return 0

    if args.list_presets:
        print_presets()
        return 0

    if not args.command:
        logger.error("You must select a command")
        parser.print_help()
        return 1

    hooks = init_hooks(args.hook)
    if getattr(args, "preset", None):
        hooks.extend(presets.preset_hooks(args.preset))

    try:
        if args.command == "recipe":
            return cmd_recipe(args)
        run_command(args.command, args, hooks, COMMAND_BODIES[args.command])
        return 0

    except ProtoverbError as e:
        logger.error(f"{args.command}: {e}")
        return 1
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return 1
    except KeyboardInterrupt:
        logger.error("User interruption.")
        return 130
    except Exception:
        logger.error(f"{args.command}: unexpected failure", exc_info=True)
        return 1
    finally:
        teardown_hooks(hooks)


def protoverb_cli():
    """Run protoverb from command-line using argparse."""

    try:
        signal.signal(signal.SIGPIPE, signal.SIG_DFL)
    except AttributeError:
        # Windows does not strictly support SIGPIPE in the same way
        pass

    sys.exit(main())


if __name__ == "__main__":
    protoverb_cli()
