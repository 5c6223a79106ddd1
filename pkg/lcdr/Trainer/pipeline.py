import logging
import time

from DataIO.globals import SPLIT_VAL, SPLIT_TEST
from DataIO.protocol import build_exposure
from Metrics.globals import DEFAULT_K, INFERENCE_FIELD
from Metrics.ranking import evaluate
from Recommender.RecConfig import RecConfig
from Recommender.recommender import baseline_variant, score_batch
from Trainer.globals import (
    METHODS,
    METHOD_LCDR,
    METHOD_VAE_IVAE_CONCAT,
    METHOD_LCDR_WO_LC,
    BRANCHES_JOINT,
    BRANCHES_IVAE,
    BRANCHES_VAE,
)
from Trainer.trainer import seed_streams, train_representations
from exceptions import ConfigurationError


def _stage_one(method, dataset, train_config, seed):
    exposure = build_exposure(dataset)
    artifacts = {"proxies": dataset.proxies}
    models = {}
    logs = {}

    def run(branches, config):
        # fresh streams per branch run, so one run never shifts another
        return train_representations(
            dataset, config, branches=branches, streams=seed_streams(seed), exposure=exposure
        )

    if method == METHOD_LCDR:
        ivae, lcvae, table, logs["joint"] = run(BRANCHES_JOINT, train_config)
        artifacts["z_lc"] = table
        artifacts["z"] = table.z
        models.update(ivae=ivae, lcvae=lcvae)
    elif method == METHOD_LCDR_WO_LC:
        # lambda = 0 leaves the constrained branch a plain VAE
        _, lcvae, table, logs["vae"] = run(BRANCHES_VAE, train_config.replace(lam=0.0))
        artifacts["z_lc_wo_lc"] = table
        models.update(lcvae=lcvae)
    elif method == METHOD_VAE_IVAE_CONCAT:
        _, lcvae, vae_table, logs["vae"] = run(BRANCHES_VAE, train_config)
        ivae, _, ivae_table, logs["ivae"] = run(BRANCHES_IVAE, train_config)
        artifacts["z_vae"] = vae_table.z_lc
        artifacts["z"] = ivae_table.z
        models.update(ivae=ivae, lcvae=lcvae)
    return artifacts, models, logs


def run_method(method, dataset, train_config, rec_config=None, seed=0, k=DEFAULT_K):
    """Both stages of one method for one seed, scored on val and test."""
    if method not in METHODS:
        raise ConfigurationError("Unknown method: {}".format(method))
    rec_config = rec_config or RecConfig()
    train_config = train_config.replace(seed=seed)
    logging.info("Running {} with seed {}".format(method, seed))

    started = time.perf_counter()
    artifacts, models, stage_one_logs = _stage_one(method, dataset, train_config, seed)
    stage_one_ms = (time.perf_counter() - started) * 1000.0

    stage_two_started = time.perf_counter()
    params, head, features, stage_two_log = baseline_variant(
        method, dataset, artifacts, rec_config, streams=seed_streams(seed)
    )
    stage_two_ms = (time.perf_counter() - stage_two_started) * 1000.0

    def score_fn(users, items):
        return score_batch(params, head, features, users, items)

    val = evaluate(score_fn, dataset, SPLIT_VAL, k)
    test = evaluate(score_fn, dataset, SPLIT_TEST, k)
    result = {
        "method": method,
        "seed": seed,
        "val": val,
        "test": test,
        "stage_one_ms": stage_one_ms,
        "stage_two_ms": stage_two_ms,
        INFERENCE_FIELD: test[INFERENCE_FIELD],
        "wall_ms": (time.perf_counter() - started) * 1000.0,
    }
    models.update(params=params, head=head)
    result["artifacts"] = {
        "features": features,
        "models": models,
        "stage_one_logs": stage_one_logs,
        "stage_two_log": stage_two_log,
        "table": artifacts.get("z_lc", artifacts.get("z_lc_wo_lc")),
    }
    logging.info(
        "{} seed {}: test NDCG@{} {:.4f} Recall@{} {:.4f}".format(
            method, seed, k, result["test"]["ndcg"], k, result["test"]["recall"]
        )
    )
    return result
