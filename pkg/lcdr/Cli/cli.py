import argparse
import logging
import sys

from Cli.commands import (
    cmd_ingest,
    cmd_train,
    cmd_eval,
    cmd_sweep,
    cmd_report,
    cmd_simulate,
    synth_config_from_sources,
)
from Cli.globals import LOG_DIR, DEFAULT_THREADS
from Cli.helpers import setup_logging, parse_seeds, parse_values
from Cli.RunConfig import RunConfig, load_config_file
from DataIO.globals import DEFAULT_VAL_FRACTION, FORMATS, SPLIT_TEST, SPLIT_VAL
from Trainer.globals import METHODS
from exceptions import exit_code_for


def parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config with data/train/recommender/run/synth sections")
    common.add_argument("--seed", type=int, help="Single seed")
    common.add_argument("--seeds", help="Seed list, e.g. 0-9 or 0,2,4")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--force", action="store_true", help="Overwrite existing outputs")
    common.add_argument("--threads", type=int, help="Worker threads for seeds")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug output on the console")
    common.add_argument("--log-dir", default=LOG_DIR, help="Directory for the session log file")

    parser = argparse.ArgumentParser(description="Latent-confounder debiased recommendation")
    commands = parser.add_subparsers(dest="command")
    commands.required = True

    ingest = commands.add_parser("ingest", parents=[common], help="Raw dataset to canonical files")
    ingest.add_argument("--format", required=True, choices=sorted(FORMATS))
    ingest.add_argument("--input", required=True, help="Raw dataset file or directory")
    ingest.add_argument("--val-fraction", type=float, default=DEFAULT_VAL_FRACTION)
    ingest.add_argument("--threshold", type=float, help="Rating threshold for positives")

    train = commands.add_parser("train", parents=[common], help="Train a method over seeds")
    train.add_argument("--data", help="Canonical dataset directory")
    train.add_argument("--method", choices=METHODS)
    train.add_argument("--lambda", dest="lam", type=float, help="Alignment weight")

    evaluate = commands.add_parser("eval", parents=[common], help="Re-score a finished run")
    evaluate.add_argument("--run", required=True, help="Run directory")
    evaluate.add_argument("--split", default=SPLIT_TEST, choices=[SPLIT_VAL, SPLIT_TEST])

    sweep = commands.add_parser("sweep", parents=[common], help="Sweep a stage-one parameter")
    sweep.add_argument("--data", help="Canonical dataset directory")
    sweep.add_argument("--param", default="lambda")
    sweep.add_argument("--values", required=True, help="Comma separated values")

    report = commands.add_parser("report", parents=[common], help="Aggregate runs into a table")
    report.add_argument("--runs", nargs="+", required=True, help="Run directories")
    report.add_argument("--baseline", help="Baseline run directory for p-values")

    simulate = commands.add_parser("simulate", parents=[common], help="Generate synthetic data")
    simulate.add_argument("--users", dest="num_users", type=int)
    simulate.add_argument("--items", dest="num_items", type=int)
    simulate.add_argument("--latent-dim", dest="latent_dim_true", type=int)
    simulate.add_argument("--proxy-noise", dest="proxy_noise", type=float)
    simulate.add_argument("--sparsity", dest="exposure_sparsity", type=float)
    return parser


def _seeds(args):
    if args.seeds is not None:
        return parse_seeds(args.seeds)
    if args.seed is not None:
        return [args.seed]
    return None


def _run_config(args, sections):
    return RunConfig.from_sources(
        sections,
        {
            "data": getattr(args, "data", None),
            "method": getattr(args, "method", None),
            "seeds": _seeds(args),
            "threads": args.threads,
            "lambda": getattr(args, "lam", None),
        },
    )


def dispatch(args):
    sections = load_config_file(args.config)
    if args.command == "ingest":
        manifest = cmd_ingest(
            args.format,
            args.input,
            args.out,
            val_fraction=args.val_fraction,
            seed=args.seed or 0,
            rating_threshold=args.threshold,
            force=args.force,
        )
        print("Ingested {}: {}".format(args.input, manifest["counts"]))
    elif args.command == "train":
        report = cmd_train(_run_config(args, sections), args.out, force=args.force)
        print("{} NDCG@{}: {:.4f} ± {:.4f}".format(report.method, report.k, report.mean["ndcg"], report.std["ndcg"]))
    elif args.command == "eval":
        report = cmd_eval(args.run, args.split)
        print("{} {} NDCG@{}: {:.4f}".format(report.method, args.split, report.k, report.mean["ndcg"]))
    elif args.command == "sweep":
        table = cmd_sweep(
            _run_config(args, sections), args.param, parse_values(args.values), args.out, force=args.force
        )
        print(table.to_string(index=False))
    elif args.command == "report":
        _, markdown = cmd_report(args.runs, args.baseline, args.out)
        print(markdown)
    elif args.command == "simulate":
        overrides = dict(
            (name, getattr(args, name))
            for name in ("num_users", "num_items", "latent_dim_true", "proxy_noise", "exposure_sparsity")
        )
        overrides["seed"] = args.seed
        manifest = cmd_simulate(synth_config_from_sources(sections, overrides), args.out, force=args.force)
        print("Simulated: {}".format(manifest["counts"]))


def main(argv=None):
    args = parser().parse_args(argv)
    setup_logging(args.verbose, args.log_dir)
    if args.command not in ("report", "eval") and args.out is None:
        logging.error("--out is required for {}".format(args.command))
        return 2
    try:
        dispatch(args)
    except Exception as e:
        code = exit_code_for(e)
        if code == 1:
            logging.exception(e)
        else:
            logging.error(e)
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
