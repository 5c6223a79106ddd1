import logging
import os

import numpy as np
import pandas as pd
import yaml

from DataIO.globals import (
    FORMATS,
    ORIGIN_BIASED,
    ORIGIN_UNBIASED,
    ORIGINS,
    COAT_BIASED_FILE,
    COAT_UNBIASED_FILE,
    COAT_USER_FEATURE_FILES,
    TRIPLES_BIASED_FILES,
    TRIPLES_UNBIASED_FILES,
    TRIPLES_USER_FEATURE_FILES,
    DEFAULT_RATING_THRESHOLD,
    VALUE_SCALE_RATING,
    VALUE_SCALE_CLICK,
)
from DataIO.InteractionDataset import InteractionDataset
from DataIO.helpers import build_records, find_existing, read_matrix, read_whitespace_rows
from DataIO.protocol import encode_proxies
from exceptions import ConfigurationError, ParseError


def ingest(fmt, path, num_users=None, num_items=None):
    """Read a raw dataset into an InteractionDataset with dense 0-based ids.

    coat:     directory with train.ascii / test.ascii rating matrices
    triples:  directory with biased/unbiased "user item rating" files, or a
              single file whose optional 4th column is the origin
    kuairand: YAML schema file naming the CSVs and their columns
    """
    if fmt not in FORMATS:
        raise ConfigurationError(
            "Unknown format {}. Expected one of {}".format(fmt, sorted(FORMATS))
        )
    if not os.path.exists(path):
        raise FileNotFoundError("Input path does not exist: {}".format(path))
    logging.info("Ingesting {} data from {}".format(fmt, path))
    if fmt == "coat":
        return ingest_coat(path)
    if fmt == "triples":
        return ingest_triples(path, num_users=num_users, num_items=num_items)
    return ingest_kuairand(path)


def ingest_coat(root):
    biased_path = os.path.join(root, COAT_BIASED_FILE)
    unbiased_path = os.path.join(root, COAT_UNBIASED_FILE)
    for required in (biased_path, unbiased_path):
        if not os.path.isfile(required):
            raise FileNotFoundError("Coat file missing: {}".format(required))

    biased = read_matrix(biased_path)
    unbiased = read_matrix(unbiased_path)
    if biased.shape != unbiased.shape:
        raise ConfigurationError(
            "Coat matrices disagree in shape: {} vs {}".format(biased.shape, unbiased.shape)
        )
    num_users, num_items = biased.shape

    users, items, values, origins = [], [], [], []
    for matrix, origin in ((biased, ORIGIN_BIASED), (unbiased, ORIGIN_UNBIASED)):
        u, i = np.nonzero(matrix)
        users.append(u)
        items.append(i)
        values.append(matrix[u, i])
        origins.extend([origin] * len(u))
    records, duplicates = build_records(
        np.concatenate(users), np.concatenate(items), np.concatenate(values), origins
    )

    feature_path = find_existing(root, COAT_USER_FEATURE_FILES)
    proxies, columns, unknown = _coat_proxies(feature_path, num_users)

    return InteractionDataset(
        num_users=num_users,
        num_items=num_items,
        records=records,
        proxies=proxies,
        proxy_columns=columns,
        rating_threshold=DEFAULT_RATING_THRESHOLD,
        value_scale=VALUE_SCALE_RATING,
        report={"duplicates": duplicates, "unknown_categories": unknown},
    )


def _coat_proxies(feature_path, num_users):
    if feature_path is None:
        logging.warning("No Coat user feature file found; proxies are empty")
        return np.zeros((num_users, 0)), [], 0
    raw = read_matrix(feature_path)
    if raw.shape[0] != num_users:
        raise ConfigurationError(
            "Coat user features have {} rows for {} users".format(raw.shape[0], num_users)
        )
    # the shipped feature matrix is already one-hot, so every column is binary
    frame = pd.DataFrame(raw, columns=["f{:02d}".format(j) for j in range(raw.shape[1])])
    schema = dict((column, "binary") for column in frame.columns)
    return encode_proxies(frame, schema)


def ingest_triples(path, num_users=None, num_items=None):
    sources = []
    feature_path = None
    if os.path.isdir(path):
        biased_path = find_existing(path, TRIPLES_BIASED_FILES)
        unbiased_path = find_existing(path, TRIPLES_UNBIASED_FILES)
        if biased_path is None or unbiased_path is None:
            raise FileNotFoundError(
                "Triples directory {} needs one of {} and one of {}".format(
                    path, TRIPLES_BIASED_FILES, TRIPLES_UNBIASED_FILES
                )
            )
        sources = [(biased_path, ORIGIN_BIASED), (unbiased_path, ORIGIN_UNBIASED)]
        feature_path = find_existing(path, TRIPLES_USER_FEATURE_FILES)
    else:
        sources = [(path, None)]

    users, items, values, origins = [], [], [], []
    for source, origin in sources:
        for line_number, tokens in read_whitespace_rows(source, width=set([3, 4]), cast=str):
            try:
                user, item, value = int(tokens[0]), int(tokens[1]), float(tokens[2])
            except ValueError:
                raise ParseError(source, line_number, "non-numeric user/item/rating")
            row_origin = origin or (tokens[3] if len(tokens) == 4 else ORIGIN_BIASED)
            if row_origin not in ORIGINS:
                raise ParseError(source, line_number, "unknown origin {}".format(row_origin))
            if user < 1 or item < 1:
                raise ParseError(source, line_number, "ids are 1-indexed, found {} {}".format(user, item))
            users.append(user - 1)
            items.append(item - 1)
            values.append(value)
            origins.append(row_origin)

    if not users and (num_users is None or num_items is None):
        raise ConfigurationError(
            "Triples input {} is empty; declare num_users and num_items".format(path)
        )
    num_users = num_users if num_users is not None else max(users) + 1
    num_items = num_items if num_items is not None else max(items) + 1
    records, duplicates = build_records(users, items, values, origins)

    proxies, columns, unknown = np.zeros((num_users, 0)), [], 0
    if feature_path is not None:
        raw = pd.read_csv(feature_path, sep="\t", index_col=0)
        raw.index = raw.index - 1
        raw = raw.reindex(range(num_users))
        proxies, columns, unknown = encode_proxies(raw, num_users=num_users)

    return InteractionDataset(
        num_users=num_users,
        num_items=num_items,
        records=records,
        proxies=proxies,
        proxy_columns=columns,
        rating_threshold=DEFAULT_RATING_THRESHOLD,
        value_scale=VALUE_SCALE_RATING,
        report={"duplicates": duplicates, "unknown_categories": unknown},
    )


def ingest_kuairand(schema_path):
    """The schema YAML declares:

        biased: <csv>            unbiased: <csv>
        user_column: user_id     item_column: video_id
        click_column: is_click
        user_features: <csv>     (optional)
        feature_columns: [...]   (optional, default: every non-id column)
    """
    with open(schema_path, "r") as fh:
        schema = yaml.safe_load(fh) or {}
    missing = [k for k in ("biased", "unbiased", "user_column", "item_column", "click_column") if k not in schema]
    if missing:
        for key in missing:
            logging.error("KuaiRand schema {} missing key: {}".format(schema_path, key))
        raise ConfigurationError("Incomplete KuaiRand schema: {}".format(", ".join(missing)))

    root = os.path.dirname(os.path.abspath(schema_path))
    user_col, item_col, click_col = schema["user_column"], schema["item_column"], schema["click_column"]
    frames = []
    for origin in (ORIGIN_BIASED, ORIGIN_UNBIASED):
        csv_path = os.path.join(root, schema[origin])
        frame = pd.read_csv(csv_path, usecols=[user_col, item_col, click_col])
        if frame.isna().any().any():
            bad = int(np.flatnonzero(frame.isna().any(axis=1).to_numpy())[0])
            # +2: header line plus 1-based numbering
            raise ParseError(csv_path, bad + 2, "missing user/item/click value")
        frame["origin"] = origin
        frames.append(frame)
    raw = pd.concat(frames, ignore_index=True)

    features = None
    if schema.get("user_features"):
        features = pd.read_csv(os.path.join(root, schema["user_features"]))

    user_ids = pd.Index(sorted(set(raw[user_col]).union(
        set(features[user_col]) if features is not None else set()
    )))
    item_ids = pd.Index(sorted(set(raw[item_col])))
    users = user_ids.get_indexer(raw[user_col])
    items = item_ids.get_indexer(raw[item_col])
    records, duplicates = build_records(users, items, raw[click_col].to_numpy(), raw["origin"].tolist())

    proxies, columns, unknown = np.zeros((len(user_ids), 0)), [], 0
    if features is not None:
        feature_columns = schema.get("feature_columns") or [
            c for c in features.columns if c != user_col
        ]
        features = features.drop_duplicates(subset=[user_col], keep="last")
        features.index = user_ids.get_indexer(features[user_col])
        features = features.reindex(range(len(user_ids)))
        # categorical profile columns are one-hot encoded regardless of dtype
        categorical = dict(
            (c, sorted(str(v) for v in features[c].dropna().unique())) for c in feature_columns
        )
        proxies, columns, unknown = encode_proxies(features, categorical, num_users=len(user_ids))

    return InteractionDataset(
        num_users=len(user_ids),
        num_items=len(item_ids),
        records=records,
        proxies=proxies,
        proxy_columns=columns,
        rating_threshold=1.0,
        value_scale=VALUE_SCALE_CLICK,
        report={"duplicates": duplicates, "unknown_categories": unknown},
    )
