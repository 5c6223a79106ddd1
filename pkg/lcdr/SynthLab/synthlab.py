import logging

import numpy as np
from scipy import linalg, optimize

from DataIO.globals import ORIGIN_BIASED, ORIGIN_UNBIASED, VALUE_SCALE_CLICK
from DataIO.helpers import build_records
from DataIO.InteractionDataset import InteractionDataset
from DataIO.protocol import binarize, split
from NumKernel.helpers import sigmoid
from SynthLab.globals import SYNTH_STREAMS, CALIBRATION_BRACKET, ALIGNMENT_DECIMALS
from SynthLab.GroundTruth import GroundTruth
from exceptions import CalibrationError, ConfigurationError


def _streams(seed):
    children = np.random.SeedSequence(seed).spawn(len(SYNTH_STREAMS))
    return dict(
        (name, np.random.default_rng(child)) for name, child in zip(SYNTH_STREAMS, children)
    )


def _one_hot(classes, num_classes):
    num_users, num_factors = classes.shape
    onehot = np.zeros((num_users, num_factors * num_classes))
    offsets = np.arange(num_factors) * num_classes
    onehot[np.arange(num_users)[:, None], offsets + classes] = 1.0
    return onehot


def class_means(config):
    """Evenly spaced, zero-centred means; neighbours are class_spread std devs apart."""
    step = config.class_spread * config.latent_std
    return (np.arange(config.num_classes) - (config.num_classes - 1) / 2.0) * step


def calibrate_offset(logits, target):
    """Offset c with mean(sigmoid(logits + c)) == target."""
    low, high = CALIBRATION_BRACKET

    def gap(c):
        return float(np.mean(sigmoid(logits + c))) - target

    if not 0.0 < target < 1.0 or gap(low) > 0 or gap(high) < 0:
        raise CalibrationError(
            "Exposure sparsity target {} is not reachable".format(target)
        )
    try:
        return optimize.brentq(gap, low, high, xtol=1e-12)
    except (ValueError, RuntimeError) as error:
        raise CalibrationError("Exposure calibration failed: {}".format(error))


def generate(config):
    """Synthetic confounded dataset with its ground truth.

    One categorical proxy factor per latent dimension drives z_true through
    class-dependent means. Exposure and feedback both depend on z_true; each
    user also gets unbiased_per_user uniformly exposed items, split into
    val/test the way real datasets are.
    """
    streams = _streams(config.seed)
    num_users, num_items = config.num_users, config.num_items
    latent_dim, num_classes = config.latent_dim_true, config.num_classes

    clean = streams["classes"].integers(0, num_classes, size=(num_users, latent_dim))
    resample = streams["corruption"].random((num_users, latent_dim)) < config.proxy_noise
    replacement = streams["corruption"].integers(0, num_classes, size=(num_users, latent_dim))
    observed = np.where(resample, replacement, clean)

    means = class_means(config)
    z_true = means[clean] + config.latent_std * streams["latent"].standard_normal(
        (num_users, latent_dim)
    )

    v = streams["exposure_weights"].standard_normal((latent_dim, num_items)) / np.sqrt(latent_dim)
    item_effect = 0.5 * streams["exposure_weights"].standard_normal(num_items)
    exposure_logits = config.exposure_scale * (z_true @ v) + item_effect
    offset = calibrate_offset(exposure_logits, config.exposure_sparsity)
    exposed = streams["exposure"].random((num_users, num_items)) < sigmoid(exposure_logits + offset)
    logging.debug(
        "Exposure offset {:.4f} gives density {:.4f}".format(offset, exposed.mean())
    )

    feedback_rng = streams["feedback_weights"]
    theta = feedback_rng.standard_normal((num_users, config.preference_dim)) / np.sqrt(
        config.preference_dim
    )
    e = feedback_rng.standard_normal((num_items, config.preference_dim))
    g = feedback_rng.standard_normal((latent_dim, num_items)) / np.sqrt(latent_dim)
    feedback_prob = sigmoid(
        theta @ e.T + config.confounder_strength * (z_true @ g) + config.feedback_bias
    )
    biased_labels = streams["feedback"].random((num_users, num_items)) < feedback_prob
    unbiased_labels = streams["feedback"].random((num_users, num_items)) < feedback_prob

    per_user = min(config.unbiased_per_user, num_items)
    unbiased_items = streams["unbiased"].random((num_users, num_items)).argsort(axis=1)[:, :per_user]
    unbiased_users = np.repeat(np.arange(num_users), per_user)
    unbiased_items = unbiased_items.ravel()

    biased_users, biased_items = np.nonzero(exposed)
    records, duplicates = build_records(
        np.concatenate([biased_users, unbiased_users]),
        np.concatenate([biased_items, unbiased_items]),
        np.concatenate(
            [
                biased_labels[biased_users, biased_items],
                unbiased_labels[unbiased_users, unbiased_items],
            ]
        ).astype(np.float64),
        [ORIGIN_BIASED] * len(biased_users) + [ORIGIN_UNBIASED] * len(unbiased_users),
    )

    w_clean = _one_hot(clean, num_classes)
    w_observed = _one_hot(observed, num_classes)
    dataset = InteractionDataset(
        num_users=num_users,
        num_items=num_items,
        records=records,
        proxies=w_observed,
        proxy_columns=[
            "f{}={}".format(j, k) for j in range(latent_dim) for k in range(num_classes)
        ],
        rating_threshold=1.0,
        value_scale=VALUE_SCALE_CLICK,
        report={"duplicates": duplicates, "unknown_categories": 0},
    )
    dataset = split(binarize(dataset), config.val_fraction, config.seed)
    logging.info(
        "Generated synthetic data: {} biased, {} unbiased records (proxy noise {})".format(
            len(biased_users), len(unbiased_users), config.proxy_noise
        )
    )
    return dataset, GroundTruth(z_true, w_clean, w_observed, num_classes)


def alignment_score(z_recovered, z_true):
    """Mean R^2 of the best affine map from z_recovered onto z_true.

    Any invertible affine transform of z_true scores 1.
    """
    z_recovered = np.asarray(z_recovered, dtype=np.float64)
    z_true = np.asarray(z_true, dtype=np.float64)
    if z_recovered.ndim == 1:
        z_recovered = z_recovered[:, None]
    if z_true.ndim == 1:
        z_true = z_true[:, None]
    if z_recovered.shape[0] != z_true.shape[0]:
        raise ConfigurationError(
            "alignment_score needs equal user counts, got {} and {}".format(
                z_recovered.shape[0], z_true.shape[0]
            )
        )
    if z_recovered.shape[1] < 1:
        raise ConfigurationError("Recovered representation has no dimensions")

    design = np.hstack([z_recovered, np.ones((z_recovered.shape[0], 1))])
    coef, _, rank, _ = linalg.lstsq(design, z_true)
    if rank < design.shape[1]:
        logging.warning(
            "Recovered representation is rank deficient ({} < {}), using pseudo-inverse".format(
                rank, design.shape[1]
            )
        )
        coef = linalg.pinv(design) @ z_true

    residual = z_true - design @ coef
    ss_res = (residual ** 2).sum(axis=0)
    ss_tot = ((z_true - z_true.mean(axis=0)) ** 2).sum(axis=0)
    r2 = np.where(ss_tot > 0, 1.0 - ss_res / np.where(ss_tot > 0, ss_tot, 1.0), 1.0)
    score = float(np.clip(np.mean(r2), 0.0, 1.0))
    return float(np.round(score, ALIGNMENT_DECIMALS))
