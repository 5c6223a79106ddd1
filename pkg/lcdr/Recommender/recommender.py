import logging
import time

import numpy as np
import pandas as pd

from DataIO.globals import SPLIT_TRAIN, SPLIT_VAL
from Lcvae.LcvaeModel import lcvae_encode
from Metrics.ranking import evaluate
from NumKernel.AdamState import AdamState, adam_step
from NumKernel.checkpoint import save_checkpoint, load_checkpoint
from NumKernel.helpers import sigmoid, parameter_norms
from Recommender.globals import HEAD_INIT_ZERO, SCORE_EXPORT_COLUMNS
from Recommender.MfParams import MfParams, ConfounderHead
from Recommender.RecConfig import RecConfig
from Trainer.trainer import seed_streams
from Trainer.globals import (
    METHODS,
    METHOD_LCDR,
    METHOD_MF,
    METHOD_MF_WF,
    METHOD_VAE_IVAE_CONCAT,
    METHOD_LCDR_WO_LC,
)
from exceptions import ConfigurationError, NumericalError

RECOMMENDER_CHECKPOINT = "recommender"


def _check_ids(params, users, items):
    users = np.asarray(users)
    items = np.asarray(items)
    if users.size and (users.min() < 0 or users.max() >= params.num_users):
        raise IndexError("User id out of range [0, {})".format(params.num_users))
    if items.size and (items.min() < 0 or items.max() >= params.num_items):
        raise IndexError("Item id out of range [0, {})".format(params.num_items))
    return users, items


def feature_matrix(features):
    """Accepts a RepresentationTable, a plain array or None."""
    if features is None:
        return None
    if hasattr(features, "z_lc"):
        return features.z_lc
    return np.asarray(features, dtype=np.float64)


def mf_score(params, u, i):
    _check_ids(params, [u], [i])
    return float(
        params.P[u] @ params.Q[i] + params.b_u[u] + params.b_i[i] + params.global_bias[0]
    )


def lcdr_score(params, head, u, i, z_lc_u):
    score = mf_score(params, u, i)
    if head is None:
        return score
    return score + float((head.H @ np.asarray(z_lc_u, dtype=np.float64)) @ head.Qc[i])


def score_batch(params, head, features, users, items):
    """Vectorized lcdr_score over aligned user/item arrays."""
    users, items = _check_ids(params, users, items)
    scores = (
        np.einsum("nd,nd->n", params.P[users], params.Q[items])
        + params.b_u[users]
        + params.b_i[items]
        + params.global_bias[0]
    )
    if head is not None:
        projected = features[users] @ head.H.T
        scores = scores + np.einsum("nd,nd->n", projected, head.Qc[items])
    return scores


def loss_and_grads(params, head, features, users, items, labels):
    """Mean binary cross-entropy on logits and its gradients.

    Gradient keys match MfParams/ConfounderHead.named_parameters().
    """
    scores = score_batch(params, head, features, users, items)
    labels = np.asarray(labels, dtype=np.float64)
    n = float(len(scores))
    loss = float(np.mean(np.logaddexp(0.0, scores) - labels * scores))
    d_scores = (sigmoid(scores) - labels) / n

    grads = {
        "P": np.zeros_like(params.P),
        "Q": np.zeros_like(params.Q),
        "b_u": np.zeros_like(params.b_u),
        "b_i": np.zeros_like(params.b_i),
        "global_bias": np.array([d_scores.sum()]),
    }
    np.add.at(grads["P"], users, d_scores[:, None] * params.Q[items])
    np.add.at(grads["Q"], items, d_scores[:, None] * params.P[users])
    np.add.at(grads["b_u"], users, d_scores)
    np.add.at(grads["b_i"], items, d_scores)

    if head is not None:
        user_features = features[users]
        projected = user_features @ head.H.T
        grads["head.H"] = (d_scores[:, None] * head.Qc[items]).T @ user_features
        grads["head.Qc"] = np.zeros_like(head.Qc)
        np.add.at(grads["head.Qc"], items, d_scores[:, None] * projected)
    return loss, grads


def _make_head(feature_dim, num_items, config, rng):
    if config.head_init == HEAD_INIT_ZERO:
        return ConfounderHead(feature_dim, num_items, config.d_mf)
    return ConfounderHead(feature_dim, num_items, config.d_mf, rng=rng)


def train_recommender(dataset, features, config=None, streams=None):
    """Stage two: point-wise BCE training of MF plus the confounder head.

    features is the per-user table fed to the head (Z_lc for LCDR); None
    trains plain MF. Early stopping watches validation NDCG@k when the
    dataset has a validation split. Returns (params, head, log).
    """
    config = config or RecConfig()
    streams = streams or seed_streams(0)
    features = feature_matrix(features)
    if features is not None and features.shape[0] != dataset.num_users:
        raise ConfigurationError(
            "Feature table has {} rows for {} users".format(features.shape[0], dataset.num_users)
        )

    params = MfParams(dataset.num_users, dataset.num_items, config.d_mf, rng=streams["mf_init"])
    head = None
    if features is not None:
        head = _make_head(features.shape[1], dataset.num_items, config, streams["head_init"])
    if config.epochs == 0:
        return params, head, []

    train = dataset.in_split(SPLIT_TRAIN)
    if len(train) == 0:
        raise ConfigurationError("No training records for the recommender")
    users = train["user"].to_numpy()
    items = train["item"].to_numpy()
    labels = train["label"].to_numpy()

    trainable = params.named_parameters()
    if head is not None and not config.freeze_head:
        trainable.update(head.named_parameters())
    state = AdamState(lr=config.lr, weight_decay=config.weight_decay)
    has_val = len(dataset.in_split(SPLIT_VAL)) > 0

    log = []
    best_ndcg = -np.inf
    best = (params.copy(), head.copy() if head is not None else None)
    stale = 0
    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        order = streams["rec_shuffle"].permutation(len(users))
        epoch_loss = 0.0
        for batch_no, start in enumerate(range(0, len(order), config.batch_size)):
            batch = order[start:start + config.batch_size]
            loss, grads = loss_and_grads(
                params, head, features, users[batch], items[batch], labels[batch]
            )
            if not np.isfinite(loss):
                raise NumericalError(
                    "Non-finite recommender loss at epoch {} batch {}".format(epoch, batch_no),
                    diagnostics={
                        "epoch": epoch,
                        "batch": batch_no,
                        "loss": loss,
                        "parameter_norms": parameter_norms(trainable),
                    },
                )
            grads = dict((name, grads[name]) for name in trainable)
            adam_step(trainable, grads, state)
            epoch_loss += loss * len(batch) / float(len(order))

        entry = {"epoch": epoch, "loss": epoch_loss}
        if has_val:
            scores = evaluate(
                lambda u, i: score_batch(params, head, features, u, i),
                dataset,
                SPLIT_VAL,
                config.k,
            )
            entry["val_ndcg"] = scores["ndcg"]
            entry["val_recall"] = scores["recall"]
        entry["wall_ms"] = (time.perf_counter() - started) * 1000.0
        log.append(entry)
        logging.debug("Stage two epoch {}: loss {:.4f}".format(epoch, epoch_loss))

        if not has_val:
            continue
        if entry["val_ndcg"] > best_ndcg:
            best_ndcg = entry["val_ndcg"]
            best = (params.copy(), head.copy() if head is not None else None)
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                logging.info(
                    "Stage two stopped early at epoch {} (best val NDCG@{} {:.4f})".format(
                        epoch, config.k, best_ndcg
                    )
                )
                break

    if has_val:
        return best[0], best[1], log
    return params, head, log


class OutcomeModel:
    """Stage-one encoder plus stage-two scorer, for potential-outcome queries."""

    def __init__(self, lcvae, params, head, exposure):
        self.lcvae = lcvae
        self.params = params
        self.head = head
        self.exposure = np.asarray(exposure, dtype=np.float64)


def estimate_potential_outcome(models, u, i, a, num_samples, rng=None):
    """Monte-Carlo estimate of p(r_ui = 1) under the intervention a_ui := a.

    z is drawn from q(Z_lc | A_u) on the user's observed exposure row: the
    intervention acts on a_ui only and leaves the confounder distribution
    unchanged. The recommender's probability is averaged over the draws.
    """
    if num_samples < 1:
        raise ConfigurationError("num_samples must be >= 1, got {}".format(num_samples))
    if a not in (0, 1):
        raise ConfigurationError("Exposure value must be 0 or 1, got {}".format(a))
    base = mf_score(models.params, u, i)
    if models.head is None:
        return float(sigmoid(np.float64(base)))
    rng = rng if rng is not None else np.random.default_rng(0)

    posterior = lcvae_encode(models.lcvae, models.exposure[u][None, :])
    noise = rng.standard_normal((num_samples, posterior.dim))
    z = posterior.mean + posterior.std * noise
    head = models.head
    probs = sigmoid(base + (z @ head.H.T) @ head.Qc[i])
    # deviations from the first draw, so a constant integrand is returned exactly
    return float(probs[0] + np.mean(probs - probs[0]))


def build_features(kind, artifacts):
    """Feature table fed to the confounder head for a method, or None."""
    if kind not in METHODS:
        raise ConfigurationError("Unknown method: {}".format(kind))

    def need(name):
        value = artifacts.get(name)
        if value is None:
            raise ConfigurationError("Method {} needs the {} artifact".format(kind, name))
        return feature_matrix(value)

    if kind == METHOD_MF:
        return None
    if kind == METHOD_LCDR:
        return need("z_lc")
    if kind == METHOD_LCDR_WO_LC:
        return need("z_lc_wo_lc")
    if kind == METHOD_VAE_IVAE_CONCAT:
        return np.hstack([need("z_vae"), need("z")])
    if kind == METHOD_MF_WF:
        proxies = need("proxies")
        if proxies.shape[1] == 0:
            raise ConfigurationError("Method mf_wf needs a non-empty proxy table")
        return proxies


def baseline_variant(kind, dataset, artifacts, config=None, streams=None):
    features = build_features(kind, artifacts)
    logging.info(
        "Training {} recommender ({} feature columns)".format(
            kind, 0 if features is None else features.shape[1]
        )
    )
    params, head, log = train_recommender(dataset, features, config, streams)
    return params, head, features, log


def export_scores(params, head, features, dataset, path, split=None):
    records = dataset.records if split is None else dataset.in_split(split)
    users = records["user"].to_numpy()
    items = records["item"].to_numpy()
    frame = pd.DataFrame(
        {
            "user": users,
            "item": items,
            "score": score_batch(params, head, feature_matrix(features), users, items),
        },
        columns=SCORE_EXPORT_COLUMNS,
    )
    frame.to_csv(path, sep="\t", header=False, index=False, float_format="%.17g")
    logging.debug("Exported {} scores to {}".format(len(frame), path))
    return frame


def save_recommender(path, params, head, config=None, meta=None):
    arrays = dict(params.named_parameters())
    if head is not None:
        arrays.update(head.named_parameters())
    save_checkpoint(path, RECOMMENDER_CHECKPOINT, arrays, config=config, meta=meta)


def load_recommender(path):
    _, config, meta, arrays = load_checkpoint(path, expected_kind=RECOMMENDER_CHECKPOINT)
    num_users, d_mf = arrays["P"].shape
    params = MfParams(num_users, arrays["Q"].shape[0], d_mf)
    for name, array in params.named_parameters().items():
        array[...] = arrays[name]
    head = None
    if "head.H" in arrays:
        head = ConfounderHead(arrays["head.H"].shape[1], arrays["head.Qc"].shape[0], d_mf)
        head.H[...] = arrays["head.H"]
        head.Qc[...] = arrays["head.Qc"]
    return params, head, config, meta
