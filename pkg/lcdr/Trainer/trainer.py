import logging
import time

import numpy as np

from DataIO.protocol import build_exposure
from Ivae.IvaeModel import IvaeModel, ivae_loss_and_grads
from Ivae.IvaeModel import posterior_means as ivae_posterior_means
from Lcvae.LcvaeModel import LcvaeModel, lcvae_loss_and_grads
from Lcvae.LcvaeModel import posterior_means as lcvae_posterior_means
from NumKernel.AdamState import AdamState, adam_step
from NumKernel.helpers import parameter_norms
from Trainer.globals import RNG_STREAMS, BRANCHES, BRANCHES_JOINT, BRANCHES_IVAE, BRANCHES_VAE
from Trainer.RepresentationTable import RepresentationTable
from exceptions import ConfigurationError, NumericalError


def seed_streams(seed):
    """Split one run seed into the named, independent generators."""
    children = np.random.SeedSequence(seed).spawn(len(RNG_STREAMS))
    return dict(
        (name, np.random.default_rng(child)) for name, child in zip(RNG_STREAMS, children)
    )


def train_representations(dataset, config, branches=BRANCHES_JOINT, streams=None, exposure=None):
    """Stage one: mini-batch training of the iVAE and constrained VAE.

    branches selects "joint" (both, aligned with config.lam), "ivae" or
    "vae" (plain VAE, no alignment). Returns (ivae, lcvae, table, log);
    the model of a branch that was not trained is None.
    """
    if branches not in BRANCHES:
        raise ConfigurationError("Unknown branches setting: {}".format(branches))
    if dataset.num_users == 0:
        raise ConfigurationError("Cannot train representations without users")
    streams = streams or seed_streams(config.seed)
    exposure = build_exposure(dataset) if exposure is None else exposure
    proxies = dataset.proxies

    ivae = lcvae = None
    ivae_params = lcvae_params = None
    if branches in (BRANCHES_JOINT, BRANCHES_IVAE):
        ivae = IvaeModel(
            dataset.num_items,
            dataset.proxy_width,
            latent_dim=config.latent_dim,
            hidden_dim=config.hidden_dim,
            rng=streams["ivae_init"],
        )
        ivae_params = ivae.named_parameters()
        ivae_state = AdamState(lr=config.lr, weight_decay=config.weight_decay)
    if branches in (BRANCHES_JOINT, BRANCHES_VAE):
        lcvae = LcvaeModel(
            dataset.num_items,
            latent_dim=config.latent_dim,
            hidden_dim=config.hidden_dim,
            rng=streams["lcvae_init"],
        )
        lcvae_params = lcvae.named_parameters()
        lcvae_state = AdamState(lr=config.lr, weight_decay=config.weight_decay)
    lam = config.lam if branches == BRANCHES_JOINT else 0.0

    num_users = dataset.num_users
    latent_dim = config.latent_dim
    log = []
    # each branch stops on its own loss only
    progress = dict(
        (name, {"best": np.inf, "stale": 0, "done": False, "last": 0.0})
        for name, model in (("ivae", ivae), ("lcvae", lcvae))
        if model is not None
    )
    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        order = streams["shuffle"].permutation(num_users)
        totals = dict.fromkeys(["ivae_loss", "lcvae_loss", "recon", "kl", "align"], 0.0)
        train_lcvae = lcvae is not None and not progress["lcvae"]["done"]
        train_ivae = ivae is not None and not progress["ivae"]["done"]
        # a converged iVAE still samples Z while the constrained branch trains
        run_ivae = train_ivae or (ivae is not None and train_lcvae)

        for batch_no, start in enumerate(range(0, num_users, config.batch_size)):
            users = order[start:start + config.batch_size]
            a = exposure[users]
            z = None
            ivae_loss = lcvae_loss = 0.0
            cause = None

            try:
                if run_ivae:
                    noise = streams["ivae_noise"].standard_normal((len(users), latent_dim))
                    ivae_loss, ivae_grads, z, ivae_parts = ivae_loss_and_grads(
                        ivae, a, proxies[users], noise
                    )
                if train_lcvae:
                    noise = streams["lcvae_noise"].standard_normal((len(users), latent_dim))
                    # z enters as a constant: no gradient reaches the iVAE
                    lcvae_loss, lcvae_grads, _, lcvae_parts = lcvae_loss_and_grads(
                        lcvae, a, z, lam, noise
                    )
            except NumericalError as e:
                cause = e
                ivae_loss = lcvae_loss = float("nan")

            if cause is not None or not np.isfinite(ivae_loss + lcvae_loss):
                norms = {}
                norms.update(parameter_norms(ivae_params or {}))
                norms.update(parameter_norms(lcvae_params or {}))
                raise NumericalError(
                    "Non-finite stage-one loss at epoch {} batch {}".format(epoch, batch_no),
                    diagnostics={
                        "epoch": epoch,
                        "batch": batch_no,
                        "users": [int(u) for u in users],
                        "ivae_loss": ivae_loss,
                        "lcvae_loss": lcvae_loss,
                        "parameter_norms": norms,
                        "cause": str(cause) if cause is not None else None,
                    },
                )

            if train_ivae:
                adam_step(ivae_params, ivae_grads, ivae_state)
            if train_lcvae:
                adam_step(lcvae_params, lcvae_grads, lcvae_state)

            weight = len(users) / float(num_users)
            totals["ivae_loss"] += weight * ivae_loss
            totals["lcvae_loss"] += weight * lcvae_loss
            parts = lcvae_parts if train_lcvae else ivae_parts
            totals["recon"] += weight * parts["recon"]
            totals["kl"] += weight * parts["kl"]
            totals["align"] += weight * parts.get("align", 0.0)

        # a frozen branch that was not evaluated keeps its final loss in the log
        if lcvae is not None and not train_lcvae:
            totals["lcvae_loss"] = progress["lcvae"]["last"]
        for name in progress:
            if not progress[name]["done"]:
                _update_progress(progress[name], totals[name + "_loss"], config, name, epoch)

        entry = {"epoch": epoch}
        entry.update(totals)
        entry["wall_ms"] = (time.perf_counter() - started) * 1000.0
        log.append(entry)
        logging.debug(
            "Stage one epoch {}: ivae {:.4f} lcvae {:.4f} align {:.4f}".format(
                epoch, totals["ivae_loss"], totals["lcvae_loss"], totals["align"]
            )
        )
        if all(state["done"] for state in progress.values()):
            logging.info("Stage one converged after {} epochs".format(epoch))
            break

    table = None
    if lcvae is not None:
        table = extract_zlc(lcvae, dataset, exposure=exposure)
    if ivae is not None:
        z = extract_z(ivae, dataset, exposure=exposure)
        # an iVAE-only run exposes Z in both slots
        table = RepresentationTable(table.z_lc if table is not None else z, z)
    return ivae, lcvae, table, log


def _update_progress(state, loss, config, name, epoch):
    """Relative-improvement stopping rule for one branch."""
    best = state["best"]
    improvement = (best - loss) / max(abs(best), 1e-12) if np.isfinite(best) else np.inf
    state["stale"] = state["stale"] + 1 if improvement < config.tol else 0
    state["best"] = min(best, loss)
    state["last"] = loss
    if state["stale"] >= config.patience:
        state["done"] = True
        logging.debug("Stage one branch {} stopped at epoch {}".format(name, epoch))


def extract_zlc(lcvae_model, dataset, exposure=None):
    exposure = build_exposure(dataset) if exposure is None else exposure
    return RepresentationTable(lcvae_posterior_means(lcvae_model, exposure))


def extract_z(ivae_model, dataset, exposure=None):
    exposure = build_exposure(dataset) if exposure is None else exposure
    return ivae_posterior_means(ivae_model, exposure, dataset.proxies)
