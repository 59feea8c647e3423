"""Command-line entry point: ``hyperkge {train,eval,export,params}``.

Exit codes: 0 success, 1 usage, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config as cfg
from .checkpoint import export_tsv, load_checkpoint, save_checkpoint
from .errors import DataError, NumericError
from .evaluation import TIES, evaluate, parameter_count
from .graph import add_reciprocals, load_dir
from .model import ModelVariant
from .train import SAMPLERS, TrainConfig, train

logger = logging.getLogger("hyperkge")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

VARIANTS = {
    "quate": ModelVariant.QUATE,
    "quate-raw": ModelVariant.QUATE_RAW,
    "weighted": ModelVariant.WEIGHTED,
    "dual": ModelVariant.DUAL,
    "complex": ModelVariant.COMPLEX,
    "distmult": ModelVariant.DISTMULT,
    "octonione": ModelVariant.OCTONION,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_model_flags(p):
    p.add_argument("--preset", help="shipped preset name, e.g. quate1-wn18rr")
    p.add_argument("--config", help="key = value config file (overrides the preset)")
    p.add_argument("--k", type=int)
    p.add_argument("--variant", choices=sorted(VARIANTS))
    p.add_argument("--octonion", action="store_true", help="octonion embeddings (OctonionE)")
    p.add_argument("--reciprocal", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperkge", allow_abbrev=False, description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", allow_abbrev=False, help="train embeddings and write a checkpoint")
    p.add_argument("--data", required=True, help=f"dataset directory or name under ${cfg.DATA_ENV}")
    _add_model_flags(p)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--n3", dest="n3_weight", type=float)
    p.add_argument("--neg", dest="neg_per_pos", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batches", dest="batch_count", type=int)
    p.add_argument("--sampler", choices=SAMPLERS)
    p.add_argument("--init", choices=("auto", "quaternion", "uniform"))
    p.add_argument("--type-constraints", dest="type_constraints", action="store_true", default=None)
    p.add_argument("--type-constrained-sampling", dest="type_constrained_sampling", action="store_true", default=None)
    p.add_argument("--strict-negatives", dest="strict_negatives", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--eval-every", dest="eval_every", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--ties", choices=TIES)
    p.add_argument("--workers", type=int)
    p.add_argument(
        "--keep-normalization", action="store_true",
        help="keep relation normalization when N3 is enabled",
    )
    p.add_argument("--out", default="model.qkge", help="checkpoint path")
    p.add_argument("--log", help="training log path (default: <out>.log)")
    p.add_argument("--dump-vocab", metavar="DIR", help="write entity/relation id dictionaries")

    p = sub.add_parser("eval", allow_abbrev=False, help="filtered link-prediction metrics")
    p.add_argument("checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("valid", "test"), default="test")
    p.add_argument("--per-relation", action="store_true")
    p.add_argument("--type-constraints", action="store_true")
    p.add_argument("--ties", choices=TIES, default="average")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("export", allow_abbrev=False, help="dump embeddings as TSV")
    p.add_argument("checkpoint")
    p.add_argument("--data", help="dataset directory for entity/relation names")
    p.add_argument("--out", required=True)

    p = sub.add_parser("params", allow_abbrev=False, help="count free parameters")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="dataset directory, or a benchmark name")
    src.add_argument("--sizes", nargs=2, type=int, metavar=("N", "M"))
    _add_model_flags(p)
    return parser


def resolve_config(args) -> TrainConfig:
    """Defaults < preset < config file < flags."""
    values = {}
    try:
        if args.preset:
            values.update(cfg.load_preset(args.preset))
        if args.config:
            values.update(cfg.read_config(args.config))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for name in TrainConfig.field_names():
        flag = getattr(args, name, None)
        if flag is not None and name != "variant":
            values[name] = flag
    if args.variant is not None:
        values["variant"] = VARIANTS[args.variant]
    if args.octonion:
        current = ModelVariant(values.get("variant", ModelVariant.QUATE))
        if args.variant is not None and current not in (ModelVariant.QUATE, ModelVariant.OCTONION):
            raise UsageError(f"--octonion conflicts with --variant {args.variant}")
        values["variant"] = ModelVariant.OCTONION
    if values.get("n3_weight", 0) > 0:
        variant = ModelVariant(values.get("variant", ModelVariant.QUATE))
        if variant.normalizes and not getattr(args, "keep_normalization", False):
            if variant is not ModelVariant.QUATE:
                raise UsageError(f"N3 disables relation normalization; {variant.value} needs --keep-normalization")
            logger.warning("N3 enabled: relation normalization disabled (variant QuatERaw); use --keep-normalization to override")
            values["variant"] = ModelVariant.QUATE_RAW
        if values.get("lambda1", 0) or values.get("lambda2", 0):
            logger.warning("N3 and L2 regularization are both enabled")
    try:
        return TrainConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_train(args) -> int:
    config = resolve_config(args)
    data_dir = cfg.resolve_data_dir(args.data)
    vocab, store = load_dir(data_dir)
    if args.dump_vocab:
        out = Path(args.dump_vocab)
        out.mkdir(parents=True, exist_ok=True)
        vocab.dump(out / "entities.dict", out / "relations.dict")
    print(cfg.format_config(config))
    table, log = train(store, config)
    save_checkpoint(args.out, table, reciprocal=config.reciprocal)
    log_path = args.log or f"{args.out}.log"
    log.write(log_path)
    if log.best_mrr is not None:
        print(f"best valid MRR {log.best_mrr:.6f} at epoch {log.best_epoch}")
    print(f"checkpoint written to {args.out}; log {log_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    table, info = load_checkpoint(args.checkpoint)
    vocab, store = load_dir(cfg.resolve_data_dir(args.data))
    if info.reciprocal:
        vocab, store = add_reciprocals(store, vocab)
    if table.n_entities != store.n_entities or table.n_relations != store.n_relations:
        raise DataError(
            f"checkpoint has N={table.n_entities}, M={table.n_relations}; "
            f"data has N={store.n_entities}, M={store.n_relations}"
        )
    report = evaluate(
        table, store, args.split, type_constraints=args.type_constraints,
        ties=args.ties, workers=args.workers,
    )
    print(report.format(per_relation=args.per_relation, relation_names=vocab.relations))
    return EXIT_OK


def cmd_export(args) -> int:
    table, info = load_checkpoint(args.checkpoint)
    entity_names = relation_names = None
    if args.data:
        vocab, store = load_dir(cfg.resolve_data_dir(args.data))
        if info.reciprocal:
            vocab, store = add_reciprocals(store, vocab)
        if (vocab.n_entities, vocab.n_relations) != (table.n_entities, table.n_relations):
            raise DataError("checkpoint and data vocabularies differ in size")
        entity_names, relation_names = vocab.entities, vocab.relations
    export_tsv(args.out, table, entity_names, relation_names, reciprocal=info.reciprocal)
    return EXIT_OK


class _Sizes:
    def __init__(self, n_entities, n_relations):
        self.n_entities = n_entities
        self.n_relations = n_relations


def cmd_params(args) -> int:
    config = resolve_config(args)
    if args.sizes:
        sizes = _Sizes(*args.sizes)
    else:
        path = cfg.resolve_data_dir(args.data)
        if path.is_dir():
            sizes = load_dir(path)[0]
        elif args.data.lower() in cfg.BENCHMARKS:
            sizes = _Sizes(*cfg.BENCHMARKS[args.data.lower()][:2])
        else:
            raise DataError(f"no dataset directory {path}")
    print(parameter_count(sizes, config))
    return EXIT_OK


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "export": cmd_export, "params": cmd_params}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hyperkge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"hyperkge: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"hyperkge: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
