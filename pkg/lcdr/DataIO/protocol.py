import logging

import numpy as np
import pandas as pd

from DataIO.globals import (
    ORIGIN_BIASED,
    ORIGIN_UNBIASED,
    SPLIT_TRAIN,
    SPLIT_VAL,
    SPLIT_TEST,
    VALUE_SCALE_CLICK,
)
from exceptions import ConfigurationError, SplitError

BINARY = "binary"


def binarize(dataset, rating_threshold=None):
    """Label = 1 iff value >= threshold (ratings) or value == 1 (clicks)."""
    threshold = dataset.rating_threshold if rating_threshold is None else rating_threshold
    out = dataset.copy()
    values = out.records["value"].to_numpy()
    if out.value_scale == VALUE_SCALE_CLICK:
        labels = values == 1
    else:
        labels = values >= threshold
    out.records["label"] = labels.astype(np.int64)
    out.rating_threshold = threshold
    return out


def split(dataset, val_fraction, seed):
    """Biased records go to train; unbiased ones are split uniformly at random
    into val (round(val_fraction * n) records) and test."""
    if not 0.0 < val_fraction < 1.0:
        raise ConfigurationError(
            "val_fraction must lie in (0, 1), got {}".format(val_fraction)
        )
    out = dataset.copy()
    origins = out.records["origin"].to_numpy()
    unbiased_idx = np.flatnonzero(origins == ORIGIN_UNBIASED)
    if unbiased_idx.size == 0:
        raise SplitError("Dataset has no unbiased records to split")

    n_val = int(np.floor(val_fraction * unbiased_idx.size + 0.5))
    rng = np.random.default_rng(seed)
    permuted = unbiased_idx[rng.permutation(unbiased_idx.size)]

    assignment = np.full(len(origins), SPLIT_TRAIN, dtype=object)
    assignment[permuted[:n_val]] = SPLIT_VAL
    assignment[permuted[n_val:]] = SPLIT_TEST
    out.records["split"] = pd.Series(assignment, dtype=object)
    logging.debug(
        "Split {} unbiased records into {} val / {} test".format(
            unbiased_idx.size, n_val, unbiased_idx.size - n_val
        )
    )
    return out


def build_exposure(dataset):
    """Row u is the exposure vector A_u: 1 iff a biased record (u, i) exists."""
    exposure = np.zeros((dataset.num_users, dataset.num_items), dtype=np.float64)
    biased = dataset.records[dataset.records["origin"] == ORIGIN_BIASED]
    exposure[biased["user"].to_numpy(), biased["item"].to_numpy()] = 1.0
    return exposure


def infer_proxy_schema(raw_features):
    schema = {}
    for column in raw_features.columns:
        observed = raw_features[column].dropna().unique()
        if len(observed) and set(observed).issubset(set([0, 1])):
            schema[str(column)] = BINARY
        else:
            schema[str(column)] = sorted(str(v) for v in observed)
    return schema


def encode_proxies(raw_features, schema=None, num_users=None):
    """Encode per-user raw features into fixed-width proxy rows.

    raw_features is a DataFrame indexed by dense user id. Categorical
    features are one-hot encoded, binary ones passed through. Columns are
    ordered by feature name, then category. Missing values and categories
    absent from the schema leave an all-zero block.
    Returns (matrix, column_names, unknown_count).
    """
    if schema is None:
        schema = infer_proxy_schema(raw_features)
    num_users = len(raw_features) if num_users is None else num_users

    blocks = []
    columns = []
    unknown = 0
    for feature in sorted(schema):
        spec = schema[feature]
        values = (
            raw_features[feature] if feature in raw_features.columns
            else pd.Series([None] * len(raw_features), index=raw_features.index)
        )
        if spec == BINARY:
            block = np.zeros((num_users, 1))
            present = values.notna()
            block[values.index[present].to_numpy(), 0] = np.clip(
                values[present].astype(np.float64).to_numpy(), 0.0, 1.0
            )
            columns.append(feature)
        else:
            categories = [str(c) for c in spec]
            position = dict((c, j) for j, c in enumerate(categories))
            block = np.zeros((num_users, len(categories)))
            for user, value in values.items():
                if pd.isna(value):
                    continue
                key = str(value)
                if key not in position:
                    unknown += 1
                    continue
                block[user, position[key]] = 1.0
            columns.extend("{}={}".format(feature, c) for c in categories)
        blocks.append(block)

    if unknown:
        logging.warning(
            "{} proxy value(s) fell outside the declared categories and were zeroed".format(
                unknown
            )
        )
    matrix = np.hstack(blocks) if blocks else np.zeros((num_users, 0))
    return matrix, columns, unknown


def proxy_matrix(dataset):
    """Proxy rows W_u stacked into a (num_users x width) float array."""
    return np.array(dataset.proxies, dtype=np.float64, copy=True)
