"""Command-line entry point.

Subcommands: validate, conj-rewrite, stats {labels,lengths,dataset}, gen,
train, sweep. Exit codes: 0 success, 1 usage error, 2 data or processing
error. Values may come from a JSON --config file; explicit flags win.
SDPFORGE_THREADS caps per-file parse parallelism.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import conllu, corpus, pathstats, silver, trainer
from .errors import SdpforgeError

log = logging.getLogger("sdpforge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise UsageError(message)


def _threads() -> int:
    raw = os.environ.get("SDPFORGE_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return max(1, os.cpu_count() or 1)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as f:
        obj = json.load(f)
    if not isinstance(obj, dict):
        raise SdpforgeError(f"{path}: config must be a JSON object")
    return obj


def _merge(args: argparse.Namespace, file_values: dict, defaults: dict) -> dict:
    """Explicit flag > config-file value > built-in default."""
    resolved = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_values:
            resolved[key] = file_values[key]
        else:
            resolved[key] = default
    return resolved


def _write_echo(path: Path, resolved: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(resolved, f, indent=2, sort_keys=True)
        f.write("\n")


def _conllu_paths(spec: str) -> list[Path]:
    path = Path(spec)
    if path.is_dir():
        return sorted(path.glob("*.conllu"))
    return [path]


def _parse_files(paths: list[Path], domain: str | None = None) -> tuple[list[conllu.ParsedSentence], list[str]]:
    """Parse files (parallel when allowed); issue strings carry file names."""

    def one(path: Path):
        result = conllu.parse_conllu_file(path, default_domain=domain or "unknown")
        return result.sentences, [f"{path.name}: {issue}" for issue in result.issues]

    workers = min(_threads(), max(1, len(paths)))
    if workers == 1 or len(paths) == 1:
        parsed = [one(p) for p in paths]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parsed = list(pool.map(one, paths))
    sentences: list[conllu.ParsedSentence] = []
    issues: list[str] = []
    for sents, errs in parsed:
        sentences.extend(sents)
        issues.extend(errs)
    return sentences, issues


# ----------------------------------------------------------------------------
# subcommands

def _cmd_validate(args) -> int:
    total = 0
    for spec in args.input:
        for path in _conllu_paths(spec):
            _, issues = _parse_files([path])
            for line in issues:
                print(line)
            total += len(issues)
    return 0 if total == 0 else 2


def _cmd_conj_rewrite(args) -> int:
    sentences, issues = _parse_files([Path(args.input)])
    if issues:
        for line in issues:
            print(line, file=sys.stderr)
        return 2
    from .trees import propagate_conj

    rewritten = [propagate_conj(s) for s in sentences]
    text = conllu.serialize_conllu(rewritten)
    _write_text(args.out, text)
    return 0


def _write_text(out: str | None, text: str) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _aligned_from_args(args) -> list:
    from .trees import propagate_conj

    if not args.corpus or not args.conllu:
        raise UsageError("labels/lengths stats need both --corpus and --conllu")
    records = corpus.load_corpus(args.corpus, adapter=args.adapter)
    sentences, issues = _parse_files([Path(args.conllu)])
    if issues:
        raise SdpforgeError("; ".join(issues))
    propagated = [propagate_conj(s) for s in sentences]
    return corpus.align(records, propagated)


def _emit_table(table: pathstats.PathStatsTable, fmt: str, out: str | None) -> None:
    _write_text(out, table.to_tsv() if fmt == "tsv" else table.to_json() + "\n")


def _cmd_stats(args) -> int:
    group_by = pathstats.GROUP_BY_RELATION if args.group_by == "relation" else pathstats.GROUP_BY_DOMAIN
    if args.kind == "labels":
        _emit_table(pathstats.label_distribution(_aligned_from_args(args), group_by), args.format, args.out)
    elif args.kind == "lengths":
        _emit_table(pathstats.length_histogram(_aligned_from_args(args), group_by), args.format, args.out)
    else:  # dataset
        entries = args.corpus_split or ([f"all={args.corpus}"] if args.corpus else [])
        if not entries:
            raise UsageError("dataset stats need --corpus-split SPLIT=PATH (or --corpus)")
        splits: dict[str, list] = {}
        for entry in entries:
            if "=" not in entry:
                raise UsageError(f"--corpus expects SPLIT=PATH, got {entry!r}")
            split, path = entry.split("=", 1)
            splits.setdefault(split, []).extend(corpus.load_corpus(path, adapter=args.adapter))
        stats = corpus.dataset_stats(splits)
        _write_text(args.out, stats.to_tsv() if args.format == "tsv" else stats.to_json() + "\n")
    return 0


def _cmd_gen(args) -> int:
    from .trees import propagate_conj

    file_values = _load_config_file(args.config)
    resolved = _merge(
        args,
        file_values,
        {
            "labels": ",".join(silver.DEFAULT_LABEL_WHITELIST),
            "max_per_sentence": silver.DEFAULT_MAX_PER_SENTENCE,
            "per_domain": 0,
            "holdout": 0,
            "seed": 4012,
            "sweep_sizes": None,
        },
    )
    whitelist = [x for x in str(resolved["labels"]).split(",") if x]

    pools: dict[str, list[conllu.ParsedSentence]] = {}
    files: dict[str, str] = {}
    for entry in args.conllu:
        if "=" in entry:
            domain, spec = entry.split("=", 1)
        else:
            domain, spec = None, entry
        paths = _conllu_paths(spec)
        sentences, issues = _parse_files(paths, domain=domain)
        if issues:
            raise SdpforgeError("; ".join(issues))
        for sentence in sentences:
            pools.setdefault(sentence.domain, []).append(propagate_conj(sentence))
        files[domain or (sentences[0].domain if sentences else "unknown")] = spec

    if resolved["sweep_sizes"]:
        sizes = [int(x) for x in str(resolved["sweep_sizes"]).split(",")]
        out_dir = Path(args.out_dir or "manifest_out")
        manifest = silver.build_manifest(
            pools,
            sizes,
            int(resolved["seed"]),
            out_dir,
            whitelist=whitelist,
            max_per_sentence=int(resolved["max_per_sentence"]),
            files=files,
        )
        _write_echo(out_dir / "gen.config.json", resolved)
        log.info("wrote %d manifest files to %s", len(manifest), out_dir)
        return 0

    train_instances, holdout_instances = silver.generate_silver(
        pools,
        n_per_domain=int(resolved["per_domain"]),
        seed=int(resolved["seed"]),
        whitelist=whitelist,
        max_per_sentence=int(resolved["max_per_sentence"]),
        holdout_per_domain=int(resolved["holdout"]),
        files=files,
    )
    out = Path(args.out)
    silver.write_instances(train_instances, out)
    if int(resolved["holdout"]):
        silver.write_instances(holdout_instances, args.holdout_out or out.with_suffix(".holdout.jsonl"))
    _write_echo(Path(str(out) + ".config.json"), resolved)
    return 0


def _group_by_domain(instances: list[dict]) -> dict[str, list[dict]]:
    grouped: dict[str, list[dict]] = {}
    for obj in instances:
        grouped.setdefault(obj.get("domain", "unknown"), []).append(obj)
    return grouped


def _finetune_from_args(args) -> dict[str, trainer.DomainData]:
    train = _group_by_domain(silver.read_instances(args.train))
    dev = _group_by_domain(silver.read_instances(args.dev)) if args.dev else {}
    test = _group_by_domain(silver.read_instances(args.test)) if args.test else {}
    domains = sorted(set(train) | set(dev) | set(test))
    return {
        d: trainer.DomainData(train=train.get(d, []), dev=dev.get(d, []), test=test.get(d, []))
        for d in domains
    }


def _train_config(args, file_values: dict) -> trainer.TrainConfig:
    defaults = trainer.TrainConfig()
    resolved = _merge(
        args,
        file_values,
        {
            "d": defaults.d,
            "h": defaults.h,
            "lr_pretrain": defaults.lr_pretrain,
            "lr_finetune": defaults.lr_finetune,
            "batch_size": defaults.batch_size,
            "epochs": defaults.epochs,
            "seeds": ",".join(str(s) for s in defaults.seeds),
            "patience": defaults.patience,
        },
    )
    seeds = resolved["seeds"]
    if isinstance(seeds, str):
        seeds = [int(x) for x in seeds.split(",") if x]
    return trainer.TrainConfig(
        d=int(resolved["d"]),
        h=int(resolved["h"]),
        lr_pretrain=float(resolved["lr_pretrain"]),
        lr_finetune=float(resolved["lr_finetune"]),
        batch_size=int(resolved["batch_size"]),
        epochs=int(resolved["epochs"]),
        seeds=tuple(int(s) for s in seeds),
        patience=int(resolved["patience"]),
    )


def _cmd_train(args) -> int:
    config = _train_config(args, _load_config_file(args.config))
    pretrain = silver.read_instances(args.pretrain) if args.pretrain else []
    pretrain_dev = silver.read_instances(args.pretrain_dev) if args.pretrain_dev else None
    report = trainer.run_protocol(
        pretrain,
        _finetune_from_args(args),
        config,
        baseline=args.pretrain is None,
        pretrain_dev=pretrain_dev,
    )
    report_path = Path(args.report)
    report_path.write_text(report.to_json() + "\n", encoding="utf-8")
    report_path.with_suffix(".tsv").write_text(report.cells_tsv(), encoding="utf-8")
    log.info("mean test Macro-F1 %.4f", report.mean_macro_f1())
    return 0


def _cmd_sweep(args) -> int:
    config = _train_config(args, _load_config_file(args.config))
    with open(args.manifest, encoding="utf-8") as f:
        manifest = json.load(f)
    curve = trainer.sweep(manifest, _finetune_from_args(args), config)
    out = Path(args.report)
    out.write_text(json.dumps(curve, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    out.with_suffix(".tsv").write_text(trainer.sweep_tsv(curve), encoding="utf-8")
    return 0


# ----------------------------------------------------------------------------
# argument wiring

def _build_parser() -> _Parser:
    parser = _Parser(prog="sdpforge", description=__doc__)
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse CoNLL-U files and report violations")
    p.add_argument("--input", nargs="+", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("conj-rewrite", help="propagate conjunction attachments")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_conj_rewrite)

    p = sub.add_parser("stats", help="path label/length statistics and dataset counts")
    p.add_argument("kind", choices=["labels", "lengths", "dataset"])
    p.add_argument("--corpus", help="canonical corpus JSONL (labels/lengths)")
    p.add_argument("--conllu", help="matching parses (labels/lengths)")
    p.add_argument(
        "--corpus-split",
        nargs="+",
        default=[],
        metavar="SPLIT=PATH",
        help="dataset mode: one or more split=file entries",
    )
    p.add_argument("--adapter", choices=["canonical", "crossre"], default="canonical")
    p.add_argument("--group-by", choices=["domain", "relation"], default="domain")
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("gen", help="generate silver pre-training instances")
    p.add_argument("--conllu", nargs="+", required=True, metavar="[DOMAIN=]PATH")
    p.add_argument("--labels")
    p.add_argument("--max-per-sentence", type=int, dest="max_per_sentence")
    p.add_argument("--per-domain", type=int, dest="per_domain")
    p.add_argument("--holdout", type=int)
    p.add_argument("--holdout-out")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", default="silver.jsonl")
    p.add_argument("--sweep-sizes", dest="sweep_sizes")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_gen)

    for name in ("train", "sweep"):
        p = sub.add_parser(name, help=f"run the two-phase protocol ({name})")
        if name == "train":
            p.add_argument("--pretrain")
            p.add_argument("--pretrain-dev", dest="pretrain_dev")
        else:
            p.add_argument("--manifest", required=True)
        p.add_argument("--train", required=True)
        p.add_argument("--dev")
        p.add_argument("--test")
        p.add_argument("--seeds")
        p.add_argument("--d", type=int)
        p.add_argument("--h", type=int)
        p.add_argument("--lr-pretrain", type=float, dest="lr_pretrain")
        p.add_argument("--lr-finetune", type=float, dest="lr_finetune")
        p.add_argument("--batch-size", type=int, dest="batch_size")
        p.add_argument("--epochs", type=int)
        p.add_argument("--patience", type=int)
        p.add_argument("--config")
        p.add_argument("--report", required=True)
        p.set_defaults(func=_cmd_train if name == "train" else _cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (SdpforgeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
