"""``lorentzfm`` command-line entry point.

Subcommands: preprocess, synthesize, train, evaluate, explain, inspect.
Exit codes: 0 success, 2 configuration error, 3 data or I/O error,
4 numerical failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence

from pydantic import ValidationError

from lorentzfm import __version__
from lorentzfm.cli.explain import build_heatmap, parse_feature_spec, resolve_features
from lorentzfm.cli.summary import inspect_target
from lorentzfm.data.bundle import DatasetBundle
from lorentzfm.data.pipeline import PreprocessOptions, preprocess
from lorentzfm.data.schema import load_schema
from lorentzfm.errors import ConfigError, DataError, LorentzFMError
from lorentzfm.evaluation.report import evaluate_model
from lorentzfm.logging_config import configure_logging
from lorentzfm.models.base import InteractionModel
from lorentzfm.models.checkpoint import Checkpoint, load_checkpoint
from lorentzfm.settings import RuntimeSettings, get_settings
from lorentzfm.training.config import load_train_config
from lorentzfm.training.engine import train
from lorentzfm.training.synthetic import generate_synthetic, load_synthetic_spec

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, RuntimeSettings], int]


def _load_for_data(ckpt_path: str, data_dir: str) -> tuple[Checkpoint, InteractionModel, DatasetBundle]:
    """Load a checkpoint and the dataset it must match.

    Raises:
        DataError: If the checkpoint was trained for another task or vocabulary.
    """
    ckpt = load_checkpoint(ckpt_path)
    bundle = DatasetBundle.load(data_dir)
    task = ckpt.metadata.get("task")
    if task is not None and task != bundle.task.value:
        raise DataError(f"checkpoint was trained for {task}, dataset is {bundle.task.value}")
    if ckpt.count != bundle.feature_count:
        raise DataError(f"checkpoint has {ckpt.count} features, dataset vocabulary has {bundle.feature_count}")
    return ckpt, ckpt.to_model(), bundle


def cmd_preprocess(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    schema = load_schema(args.schema)
    overrides = {"min_freq": args.min_freq, "k_user": args.k_user, "k_item": args.k_item}
    options = PreprocessOptions(**{k: v for k, v in overrides.items() if v is not None})
    bundle = preprocess(schema, args.raw, args.out_dir, options, seed=settings.seed)
    print(bundle.stats.to_text())
    return 0


def cmd_synthesize(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    spec = load_synthetic_spec(args.spec)
    bundle = generate_synthetic(spec, seed=settings.seed)
    bundle.save(args.out_dir)
    print(bundle.stats.to_text())
    return 0


def cmd_train(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    config = load_train_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    if settings.deterministic and config.asynchronous:
        logger.warning("Deterministic mode: asynchronous updates disabled")
        config = config.model_copy(update={"asynchronous": False})

    bundle = DatasetBundle.load(args.data_dir)
    result = train(config, bundle, run_dir=args.out_dir, threads=settings.threads)
    report = evaluate_model(
        result.model,
        bundle,
        "test",
        hit_ks=tuple(config.hit_ks),
        exclude_validation_items=config.exclude_validation_items,
        seed=config.seed,
        threads=settings.threads,
        exclude_padding=config.exclude_padding,
        config_digest=config.digest(),
    )
    report.write(args.out_dir)
    print(report.to_text(), end="")
    return 0


def cmd_evaluate(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    ckpt, model, bundle = _load_for_data(args.checkpoint, args.data_dir)
    report = evaluate_model(
        model,
        bundle,
        args.split,
        hit_ks=tuple(sorted(set(args.hit_k or [10]))),
        exclude_validation_items=not args.include_validation_items,
        seed=ckpt.seed,
        threads=settings.threads,
        exclude_padding=bool(ckpt.metadata.get("exclude_padding", False)),
        config_digest=str(ckpt.metadata.get("config_digest", "")),
    )
    if args.out:
        report.write(args.out)
    print(report.to_text(), end="")
    return 0


def cmd_explain(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    ckpt, model, bundle = _load_for_data(args.checkpoint, args.data_dir)
    unknown: list[str] = []
    if args.features is not None:
        batch, unknown = resolve_features(bundle, parse_feature_spec(args.features))
    else:
        if args.user is None or args.item is None:
            raise ConfigError("explain needs --user and --item, or --features")
        batch = bundle.compose(bundle.users.position(args.user), bundle.items.position(args.item))
    export = build_heatmap(
        model,
        batch,
        bundle,
        decompose=args.decompose,
        exclude_padding=bool(ckpt.metadata.get("exclude_padding", False)),
        unknown_tokens=unknown,
    )
    if args.out:
        export.write(args.out)
    else:
        print(export.grid(), end="")
    return 0


def cmd_inspect(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    print(inspect_target(args.target), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with global flags and one subparser per command."""
    parser = argparse.ArgumentParser(prog="lorentzfm", description="Lorentzian factorization machines")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="master seed (default: LFM_SEED or 0)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default: LFM_THREADS or 1)")
    parser.add_argument(
        "--deterministic",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="serial, seed-reproducible execution (default on)",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="build a processed dataset from a raw delimited file")
    p.add_argument("schema", help="dataset schema file (TOML or JSON)")
    p.add_argument("raw", help="raw delimited data file with a header row")
    p.add_argument("out_dir", help="output dataset directory")
    p.add_argument("--min-freq", type=int, default=None, help="fold tokens seen fewer times (default 5)")
    p.add_argument("--k-user", type=int, default=None, help="k-core threshold for users (default 1)")
    p.add_argument("--k-item", type=int, default=None, help="k-core threshold for items (default 1)")
    p.set_defaults(handler=cmd_preprocess)

    p = sub.add_parser("synthesize", help="generate a synthetic CTR dataset")
    p.add_argument("spec", help="synthetic spec file (TOML or JSON)")
    p.add_argument("out_dir", help="output dataset directory")
    p.set_defaults(handler=cmd_synthesize)

    p = sub.add_parser("train", help="train a model and evaluate it on the test split")
    p.add_argument("config", help="training config file (TOML or JSON)")
    p.add_argument("data_dir", help="processed dataset directory")
    p.add_argument("out_dir", help="run directory")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a split")
    p.add_argument("checkpoint")
    p.add_argument("data_dir")
    p.add_argument("--split", choices=["val", "test"], default="test")
    p.add_argument("--out", default=None, help="directory for metrics.json and metrics.txt")
    p.add_argument("--hit-k", type=int, action="append", help="HR cut-off, repeatable (default 10)")
    p.add_argument(
        "--include-validation-items",
        action="store_true",
        help="keep validation items in test candidate pools",
    )
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("explain", help="export the pairwise-interaction heatmap of an instance")
    p.add_argument("checkpoint")
    p.add_argument("data_dir")
    p.add_argument("--user", default=None, help="raw user id (ranking data)")
    p.add_argument("--item", default=None, help="raw item id (ranking data)")
    p.add_argument("--features", default=None, help="field=token,field=token|token")
    p.add_argument("--out", default=None, help="output directory (default: print the grid)")
    p.add_argument("--decompose", action="store_true", help="also export interaction, linear and triangle-defect terms")
    p.set_defaults(handler=cmd_explain)

    p = sub.add_parser("inspect", help="summarize a checkpoint, dataset or run directory")
    p.add_argument("target")
    p.set_defaults(handler=cmd_inspect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings(
            seed=args.seed,
            threads=args.threads,
            deterministic=args.deterministic,
            log_level=args.log_level,
        )
    except ValidationError as exc:
        print(f"error: invalid runtime settings: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    configure_logging(settings.log_level, settings.log_format)

    handler: Handler = args.handler
    try:
        return handler(args, settings)
    except LorentzFMError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        logger.error("%s failed: invalid configuration: %s", args.command, exc)
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except OSError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code
    except Exception:
        logger.exception("%s failed unexpectedly", args.command)
        return 1


if __name__ == "__main__":
    sys.exit(main())
