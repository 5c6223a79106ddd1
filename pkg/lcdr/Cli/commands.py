import logging
import os
import queue
import threading

import pandas as pd

from Cli.globals import (
    CONFIG_SNAPSHOT,
    CHECKPOINT_DIR,
    RUN_LOG_DIR,
    METRICS_DIR,
    REPORT_FILE,
    SEED_METRICS_FILE,
    SEED_CHECKPOINT_DIR,
    SEED_LOG_FILE,
    SEED_DIAGNOSTICS_FILE,
    EVAL_FILE,
    SWEEP_FILE,
    SWEEP_PARAMS,
    GROUND_TRUTH_FILE,
    IVAE_CHECKPOINT,
    LCVAE_CHECKPOINT,
    RECOMMENDER_CHECKPOINT,
    FEATURES_FILE,
)
from Cli.helpers import (
    prepare_output_dir,
    write_json,
    read_json,
    write_jsonl,
    save_stage_one,
)
from Cli.RunConfig import RunConfig, config_hash
from DataIO.canonical import write_canonical, read_canonical
from DataIO.globals import DEFAULT_VAL_FRACTION, SPLITS
from DataIO.ingest import ingest
from DataIO.protocol import binarize, split
from Metrics.MetricsReport import MetricsReport, report_table, render_markdown
from Metrics.ranking import evaluate
from Recommender.recommender import save_recommender, load_recommender, score_batch
from SynthLab.GroundTruth import write_ground_truth
from SynthLab.SynthConfig import SynthConfig
from SynthLab.synthlab import generate
from Trainer.globals import METHOD_LCDR
from Trainer.pipeline import run_method
from Trainer.RepresentationTable import RepresentationTable, read_representation_tsv
from exceptions import ConfigurationError, NumericalError


def cmd_ingest(fmt, input_path, output_dir, val_fraction=DEFAULT_VAL_FRACTION, seed=0, rating_threshold=None, force=False):
    """Raw dataset -> binarized, split canonical files with a manifest."""
    settings = {
        "format": fmt,
        "input": os.path.abspath(input_path),
        "val_fraction": val_fraction,
        "seed": seed,
        "rating_threshold": rating_threshold,
    }
    dataset = ingest(fmt, input_path)
    dataset = split(binarize(dataset, rating_threshold), val_fraction, seed)
    prepare_output_dir(output_dir, force)
    manifest = write_canonical(
        dataset, output_dir, extra={"ingest": settings, "config_hash": config_hash(settings)}
    )
    return manifest


def _save_seed_outputs(run_dir, result, config):
    seed = result["seed"]
    artifacts = result["artifacts"]
    checkpoint_dir = os.path.join(run_dir, CHECKPOINT_DIR, SEED_CHECKPOINT_DIR.format(seed))
    os.makedirs(checkpoint_dir)
    meta = {"seed": seed, "method": result["method"], "config_hash": config.hash}
    models = artifacts["models"]
    train_dict = config.train.replace(seed=seed).to_dict()
    if models.get("ivae") is not None:
        save_stage_one(os.path.join(checkpoint_dir, IVAE_CHECKPOINT), models["ivae"], train_dict, meta)
    if models.get("lcvae") is not None:
        save_stage_one(os.path.join(checkpoint_dir, LCVAE_CHECKPOINT), models["lcvae"], train_dict, meta)
    save_recommender(
        os.path.join(checkpoint_dir, RECOMMENDER_CHECKPOINT),
        models["params"],
        models["head"],
        config=config.recommender.to_dict(),
        meta=meta,
    )
    if artifacts["features"] is not None:
        RepresentationTable(artifacts["features"]).write_tsv(
            os.path.join(checkpoint_dir, FEATURES_FILE)
        )

    log_entries = []
    for branches, entries in sorted(artifacts["stage_one_logs"].items()):
        log_entries.extend(dict(entry, stage="one", branches=branches) for entry in entries)
    log_entries.extend(dict(entry, stage="two") for entry in artifacts["stage_two_log"])
    write_jsonl(os.path.join(run_dir, RUN_LOG_DIR, SEED_LOG_FILE.format(seed)), log_entries)

    metrics = dict((key, value) for key, value in result.items() if key != "artifacts")
    metrics["config_hash"] = config.hash
    write_json(os.path.join(run_dir, METRICS_DIR, SEED_METRICS_FILE.format(seed)), metrics)
    return metrics


def run_seeds(config, dataset, run_dir=None, threads=1):
    """Run config.method for every seed, spread over worker threads.

    Returns per-seed metric dicts in seed order. The first failure (by seed)
    is re-raised once all workers have stopped.
    """
    seed_queue = queue.Queue()
    results = {}
    failures = {}
    lock = threading.Lock()

    def seed_worker():
        while True:
            seed = seed_queue.get()
            if seed is None:
                seed_queue.task_done()
                break
            try:
                result = run_method(
                    config.method, dataset, config.train, config.recommender, seed, config.k
                )
                if run_dir is not None:
                    with lock:
                        result = _save_seed_outputs(run_dir, result, config)
                results[seed] = result
            except Exception as e:
                logging.error("Seed {} failed: {}".format(seed, e))
                failures[seed] = e
            seed_queue.task_done()

    workers = []
    for _ in range(min(threads, len(config.seeds))):
        t = threading.Thread(target=seed_worker)
        t.start()
        workers.append(t)
    for seed in config.seeds:
        seed_queue.put(seed)
    for _ in workers:
        seed_queue.put(None)
    seed_queue.join()
    for t in workers:
        t.join()

    if failures:
        seed = min(failures)
        error = failures[seed]
        if run_dir is not None and isinstance(error, NumericalError):
            write_json(
                os.path.join(run_dir, RUN_LOG_DIR, SEED_DIAGNOSTICS_FILE.format(seed)),
                dict(error.diagnostics, message=str(error), seed=seed),
            )
        raise error
    return [results[seed] for seed in config.seeds]


def cmd_train(config, run_dir, force=False):
    """Both stages per seed; writes the run directory and returns its report."""
    config.validate()
    dataset, _ = read_canonical(config.data)
    prepare_output_dir(run_dir, force)
    for name in (CHECKPOINT_DIR, RUN_LOG_DIR, METRICS_DIR):
        os.makedirs(os.path.join(run_dir, name))
    with open(os.path.join(run_dir, CONFIG_SNAPSHOT), "w") as fh:
        fh.write(config.snapshot())
    logging.info(
        "Training {} on {} for seeds {} (config {})".format(
            config.method, config.data, config.seeds, config.hash[:12]
        )
    )

    runs = run_seeds(config, dataset, run_dir, config.threads)
    report = MetricsReport.from_runs(runs, dataset=os.path.basename(os.path.normpath(config.data)))
    report.to_csv(os.path.join(run_dir, REPORT_FILE), extra={"config_hash": config.hash})
    logging.info(
        "{}: NDCG@{} {:.4f} ± {:.4f}".format(
            config.method, config.k, report.mean["ndcg"], report.std["ndcg"]
        )
    )
    return report


def load_run(run_dir, split="test"):
    """MetricsReport from a run directory's per-seed metric files."""
    metrics_dir = os.path.join(run_dir, METRICS_DIR)
    if not os.path.isdir(metrics_dir):
        raise FileNotFoundError("No metrics directory in {}".format(run_dir))
    runs = [
        read_json(os.path.join(metrics_dir, name))
        for name in sorted(os.listdir(metrics_dir))
        if name.startswith("seed_") and name.endswith(".json")
    ]
    config = RunConfig.from_snapshot(os.path.join(run_dir, CONFIG_SNAPSHOT))
    return MetricsReport.from_runs(
        runs, dataset=os.path.basename(os.path.normpath(config.data)), split=split
    )


def cmd_eval(run_dir, split="test"):
    """Re-score a finished run from its recommender checkpoints."""
    if split not in SPLITS:
        raise ConfigurationError("Unknown split: {}".format(split))
    snapshot = os.path.join(run_dir, CONFIG_SNAPSHOT)
    if not os.path.isfile(snapshot):
        raise FileNotFoundError("No {} in {}".format(CONFIG_SNAPSHOT, run_dir))
    config = RunConfig.from_snapshot(snapshot)
    dataset, _ = read_canonical(config.data)

    report = MetricsReport(method=config.method, dataset=os.path.basename(os.path.normpath(config.data)), k=config.k)
    for seed in config.seeds:
        checkpoint_dir = os.path.join(run_dir, CHECKPOINT_DIR, SEED_CHECKPOINT_DIR.format(seed))
        params, head, _, _ = load_recommender(os.path.join(checkpoint_dir, RECOMMENDER_CHECKPOINT))
        features = None
        if head is not None:
            features = read_representation_tsv(os.path.join(checkpoint_dir, FEATURES_FILE))
        scores = evaluate(
            lambda u, i: score_batch(params, head, features, u, i), dataset, split, config.k
        )
        report.add(seed, scores)
    blob = report.to_dict()
    blob["split"] = split
    blob["config_hash"] = config.hash
    write_json(os.path.join(run_dir, METRICS_DIR, EVAL_FILE.format(split)), blob)
    return report


def cmd_sweep(config, param, values, out_dir, force=False):
    """Train LCDR for each value of param; CSV of mean/std per value."""
    if param not in SWEEP_PARAMS:
        raise ConfigurationError("Cannot sweep {}; supported: {}".format(param, sorted(SWEEP_PARAMS)))
    if not values:
        raise ConfigurationError("Sweep needs at least one value")
    if len(set(values)) != len(values):
        raise ConfigurationError("Sweep values must be distinct: {}".format(values))
    config.method = METHOD_LCDR
    config.validate()
    dataset, _ = read_canonical(config.data)
    prepare_output_dir(out_dir, force)

    rows = []
    for value in values:
        swept = RunConfig(
            data=config.data,
            method=config.method,
            seeds=config.seeds,
            k=config.k,
            train=config.train.replace(lam=value),
            recommender=config.recommender,
            threads=config.threads,
        )
        logging.info("Sweep {} = {}".format(param, value))
        report = MetricsReport.from_runs(run_seeds(swept, dataset, threads=swept.threads))
        rows.append(
            {
                "value": value,
                "ndcg_mean": report.mean["ndcg"],
                "recall_mean": report.mean["recall"],
                "ndcg_std": report.std["ndcg"],
                "recall_std": report.std["recall"],
                "seeds": len(report.seeds),
                "config_hash": swept.hash,
            }
        )
    table = pd.DataFrame(rows)
    table.to_csv(os.path.join(out_dir, SWEEP_FILE), index=False)
    return table


def cmd_report(run_dirs, baseline_run=None, out_path=None):
    """Mean ± std per run and p-values against the baseline run."""
    if not run_dirs:
        raise ConfigurationError("report needs at least one run directory")
    reports = [load_run(run_dir) for run_dir in run_dirs]
    baseline = None
    if baseline_run is not None:
        if baseline_run in run_dirs:
            baseline = reports[run_dirs.index(baseline_run)]
        else:
            baseline = load_run(baseline_run)
        for run_dir, report in zip(run_dirs, reports):
            if report.seeds != baseline.seeds:
                raise ConfigurationError(
                    "Seed sets differ: {} has {}, baseline {} has {}".format(
                        run_dir, report.seeds, baseline_run, baseline.seeds
                    )
                )
    table = report_table(reports, baseline)
    markdown = render_markdown(table)
    if out_path is not None:
        table.to_csv(out_path, index=False)
        with open(os.path.splitext(out_path)[0] + ".md", "w") as fh:
            fh.write(markdown)
    return table, markdown


def cmd_simulate(synth_config, output_dir, force=False):
    dataset, ground_truth = generate(synth_config)
    prepare_output_dir(output_dir, force)
    settings = synth_config.to_dict()
    manifest = write_canonical(
        dataset, output_dir, extra={"synth": settings, "config_hash": config_hash(settings)}
    )
    write_ground_truth(ground_truth, os.path.join(output_dir, GROUND_TRUTH_FILE))
    return manifest


def synth_config_from_sources(sections=None, overrides=None):
    values = dict((sections or {}).get("synth", {}))
    values.update((key, value) for key, value in (overrides or {}).items() if value is not None)
    return SynthConfig.from_dict(values)
