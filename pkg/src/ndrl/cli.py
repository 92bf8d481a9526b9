"""Command-line entry point.

Subcommands: generate, pretrain, train, eval, richness, orc-scan, ablate.
Every subcommand reads an optional --config file of key=value lines; any
extra --key=value arguments override it.  Exit codes: 0 success, 2 missing
input file, 3 invalid config or data, 4 training divergence.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import orc, runconfig, trainer
from .checkpoint import Checkpoint, load_any, load_embeddings, save_checkpoint, save_embeddings
from .descriptions import random_bank, read_sentence_vectors, write_sentence_vectors
from .errors import ConfigError, NdrlError, TrainingDiverged
from .evaluator import evaluate
from .kg import (KnowledgeGraph, RichnessConfig, generate_synthetic, load_triples,
                 save_triples, split_dataset, structure_richness)
from .model import ModelParams, build_scoring_state
from .trainer import TrainConfig
from .transe import TransEConfig, pretrain_embeddings

_VARIANTS = [
    ("NDRL-r", {"use_relation_in_neighbors": False}),
    ("NDRL-a", {"desc_mode": "mean"}),
    ("NDRL-s", {"richness_gate": False}),
    ("NDRL", {}),
]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ndrl",
        description="Knowledge-graph embeddings with relation-aware graph "
                    "attention, description attention and a structure-richness "
                    "scoring gate.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, send in [
        ("generate", "synthesize a graph (and optional description vectors)"),
        ("pretrain", "translation-embedding pretraining only"),
        ("train", "full joint training"),
        ("eval", "link-prediction evaluation of a saved checkpoint"),
        ("richness", "per-entity structure richness and gate verdicts"),
        ("orc-scan", "count symmetric/self-loop/transitive structures"),
        ("ablate", "train and evaluate the model and its three ablations"),
    ]:
        p = sub.add_parser(name, help=send)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--show-config", action="store_true",
                       help="print the merged config and exit")
        if name == "richness":
            p.add_argument("--entity", action="append",
                           help="limit output to this entity label (repeatable)")
    return parser


def _show_config(cfg: dict[str, str]) -> int:
    for key in sorted(cfg):
        print(f"{key}={cfg[key]}")
    return 0


def _load_graph(cfg) -> KnowledgeGraph:
    return load_triples(runconfig.require(cfg, "data.triples"))


def _split(cfg, kg):
    return split_dataset(kg, runconfig.get_ratios(cfg), runconfig.get_int(cfg, "split.seed"))


def _bank(cfg, kg):
    path = cfg.get("data.descriptions")
    return read_sentence_vectors(path, kg) if path else None


def _richness_config(cfg) -> RichnessConfig:
    return RichnessConfig(k=runconfig.get_float(cfg, "richness.k"),
                          threshold=runconfig.get_float(cfg, "richness.threshold"))


def _eval_triples(cfg, kg, split):
    part = cfg["eval.split"]
    if part == "all":
        return list(kg.triples)
    if part not in ("train", "valid", "test"):
        raise ConfigError(f"eval.split must be train, valid, test or all, "
                          f"got {part!r}")
    return getattr(split, part)


def _emit(text: str, cfg, key: str = "out.report") -> None:
    path = cfg.get(key)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _epoch_logger(cfg, fh_holder: list):
    path = cfg.get("out.log")
    if not path:
        return None
    fh = open(path, "w", encoding="utf-8", newline="\n")
    fh_holder.append(fh)
    last = time.monotonic()

    def hook(epoch: int, loss: float) -> None:
        nonlocal last
        now = time.monotonic()
        fh.write(f"{epoch}\t{loss!r}\t{(now - last) * 1000.0:.1f}\n")
        last = now

    return hook


def _cmd_generate(cfg) -> int:
    kg = generate_synthetic(
        runconfig.get_int(cfg, "gen.entities"),
        n_relations=runconfig.get_int(cfg, "gen.relations"),
        extra_edges=runconfig.get_int(cfg, "gen.extra_edges"),
        relate_edges=runconfig.get_int(cfg, "gen.relate_edges"),
        symmetric_fraction=runconfig.get_float(cfg, "gen.symmetric_fraction"),
        seed=runconfig.get_int(cfg, "gen.seed"))
    out = runconfig.require(cfg, "data.triples")
    save_triples(out, kg)
    print(f"wrote {kg.n_triples} triples over {kg.n_entities} entities / "
          f"{kg.n_relations} relations to {out}")
    coverage = runconfig.get_float(cfg, "gen.desc_coverage")
    if coverage > 0:
        bank = random_bank(kg, runconfig.get_int(cfg, "gen.desc_dim"), coverage,
                           runconfig.get_int(cfg, "gen.desc_max_sentences"),
                           runconfig.get_int(cfg, "gen.desc_seed"))
        dpath = runconfig.require(cfg, "data.descriptions")
        write_sentence_vectors(dpath, kg, bank)
        print(f"wrote sentence vectors for {len(bank)} entities to {dpath}")
    return 0


def _cmd_pretrain(cfg) -> int:
    kg = _load_graph(cfg)
    split = _split(cfg, kg)
    holder: list = []
    hook = _epoch_logger(cfg, holder)
    try:
        table = pretrain_embeddings(
            kg,
            TransEConfig(margin=runconfig.get_float(cfg, "transe.margin"),
                         lr=runconfig.get_float(cfg, "transe.lr"),
                         epochs=runconfig.get_int(cfg, "transe.epochs"),
                         seed=runconfig.get_int(cfg, "transe.seed"),
                         batch_size=runconfig.get_int(cfg, "transe.batch")),
            runconfig.get_int(cfg, "model.dim"),
            triples=split.train, on_epoch=hook)
    finally:
        for fh in holder:
            fh.close()
    out = runconfig.require(cfg, "out.checkpoint")
    save_embeddings(out, table)
    print(f"pretrained {kg.n_entities} entity and {kg.n_relations} relation "
          f"vectors (dim {table.dim}) on {len(split.train)} triples; wrote {out}")
    return 0


def _cmd_train(cfg) -> int:
    kg = _load_graph(cfg)
    split = _split(cfg, kg)
    bank = _bank(cfg, kg)
    cfg_t = TrainConfig.from_flat(cfg)
    init = None
    if cfg.get("data.embeddings"):
        init = load_embeddings(cfg["data.embeddings"])
    holder: list = []
    hook = _epoch_logger(cfg, holder)
    try:
        ckpt = trainer.train(kg, cfg_t, triples=split.train, bank=bank,
                             init=init, on_epoch=hook)
    finally:
        for fh in holder:
            fh.close()
    out = runconfig.require(cfg, "out.checkpoint")
    for key in ("data.triples", "data.descriptions", "split.ratios", "split.seed"):
        if cfg.get(key):
            ckpt.config[key] = cfg[key]
    save_checkpoint(out, ckpt)
    final = ckpt.losses[-1] if ckpt.losses else float("nan")
    print(f"trained {cfg_t.epochs} epoch(s) on {len(split.train)} triples; "
          f"final loss {final:.6g}; wrote {out}")
    return 0


def _scoring_inputs(cfg, kg, ckpt: Checkpoint):
    """Scoring knobs for a loaded checkpoint under the active config."""
    bank = None
    if isinstance(ckpt.params, ModelParams) and ckpt.params.desc is not None:
        bank = _bank(cfg, kg)
        if bank is None:
            raise ConfigError(
                "checkpoint has a description branch; set data.descriptions")
    elif cfg.get("data.descriptions"):
        print("note: checkpoint has no description branch, "
              "data.descriptions ignored", file=sys.stderr)
    gate = runconfig.get_bool(cfg, "ablation.richness_gate")
    desc_mode = cfg["ablation.desc_mode"]
    include_inverse = runconfig.get_bool(cfg, "model.include_inverse")
    return bank, gate, desc_mode, include_inverse


def _cmd_eval(cfg_file, overrides) -> int:
    active = runconfig.merge(cfg_file, overrides)
    ckpt = load_any(runconfig.require(active, "out.checkpoint"))
    cfg = runconfig.merge({**ckpt.config, **(cfg_file or {})}, overrides)
    kg = _load_graph(cfg)
    split = _split(cfg, kg)
    test = _eval_triples(cfg, kg, split)
    bank, gate, desc_mode, include_inverse = _scoring_inputs(cfg, kg, ckpt)
    state = build_scoring_state(ckpt.params, kg, bank, _richness_config(cfg),
                                gate=gate, desc_mode=desc_mode,
                                include_inverse=include_inverse)
    report = evaluate(state, kg, test, known=kg.triples)
    _emit(report.as_text(), cfg)
    return 0


def _cmd_richness(cfg, labels) -> int:
    kg = _load_graph(cfg)
    rcfg = _richness_config(cfg)
    if labels:
        for lab in labels:
            if lab not in kg.entity_ids:
                raise ConfigError(f"unknown entity label {lab!r}")
        handles = [kg.entity_ids[lab] for lab in labels]
    else:
        handles = range(kg.n_entities)
    lines = [f"# k={rcfg.k:g} threshold={rcfg.threshold:g}",
             "entity\trichness\tgate"]
    rich_count = 0
    for e in handles:
        value = structure_richness(kg, e, rcfg)
        rich = value >= rcfg.threshold
        rich_count += rich
        lines.append(f"{kg.entities[e]}\t{value:g}\t{'rich' if rich else 'plain'}")
    lines.append(f"# rich {rich_count} of {len(lines) - 2}")
    _emit("\n".join(lines) + "\n", cfg)
    return 0


def _cmd_orc(cfg) -> int:
    kg = _load_graph(cfg)
    _emit(orc.scan(kg).as_text(), cfg)
    return 0


def _cmd_ablate(cfg) -> int:
    kg = _load_graph(cfg)
    split = _split(cfg, kg)
    bank = _bank(cfg, kg)
    base = TrainConfig.from_flat(cfg)
    out_base = runconfig.require(cfg, "out.checkpoint")
    rcfg = _richness_config(cfg)
    rows = []
    for name, changes in _VARIANTS:
        cfg_v = replace(base, **changes)
        ckpt = trainer.train(kg, cfg_v, triples=split.train, bank=bank)
        save_checkpoint(f"{out_base}.{name}.txt", ckpt)
        state = build_scoring_state(ckpt.params, kg, bank, rcfg,
                                    gate=cfg_v.richness_gate,
                                    desc_mode=cfg_v.desc_mode,
                                    include_inverse=cfg_v.include_inverse)
        report = evaluate(state, kg, _eval_triples(cfg, kg, split),
                          known=kg.triples)
        rows.append((name, report))

    header = (f"{'variant':<8} {'h@1.filt':>10} {'h@10.filt':>10} "
              f"{'MR.filt':>10} {'MRR.filt':>10} {'h@1.raw':>10} "
              f"{'h@10.raw':>10} {'MR.raw':>10} {'MRR.raw':>10}")
    lines = [header]
    for name, rep in rows:
        lines.append(f"{name:<8} {rep.hits1_filtered:>10.4f} "
                     f"{rep.hits10_filtered:>10.4f} {rep.mr_filtered:>10.4f} "
                     f"{rep.mrr_filtered:>10.4f} {rep.hits1_raw:>10.4f} "
                     f"{rep.hits10_raw:>10.4f} {rep.mr_raw:>10.4f} "
                     f"{rep.mrr_raw:>10.4f}")
    lines.append("")
    for name, rep in rows:
        for key, value in rep.as_pairs():
            lines.append(f"{name}.{key}={value!r}" if isinstance(value, float)
                         else f"{name}.{key}={value}")
    _emit("\n".join(lines) + "\n", cfg)
    return 0


def _dispatch(argv) -> int:
    parser = _build_parser()
    args, leftovers = parser.parse_known_args(argv)
    overrides = {}
    for arg in leftovers:
        if not arg.startswith("--"):
            raise ConfigError(f"unrecognized argument {arg!r}")
        key, value = runconfig.parse_override(arg)
        overrides[key] = value
    file_cfg = runconfig.load_config(args.config) if args.config else None
    cfg = runconfig.merge(file_cfg, overrides)
    if args.show_config:
        return _show_config(cfg)
    if args.command == "generate":
        return _cmd_generate(cfg)
    if args.command == "pretrain":
        return _cmd_pretrain(cfg)
    if args.command == "train":
        return _cmd_train(cfg)
    if args.command == "eval":
        return _cmd_eval(file_cfg, overrides)
    if args.command == "richness":
        return _cmd_richness(cfg, args.entity)
    if args.command == "orc-scan":
        return _cmd_orc(cfg)
    if args.command == "ablate":
        return _cmd_ablate(cfg)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    try:
        return _dispatch(argv)
    except FileNotFoundError as exc:
        name = getattr(exc, "filename", None) or exc
        print(f"error: missing file: {name}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NdrlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
