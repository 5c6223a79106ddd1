import logging
import math
import time

import numpy as np

from DataIO.globals import SPLITS
from Metrics.globals import INFERENCE_FIELD
from exceptions import ConfigurationError, EvaluationError


def idcg(n):
    return sum(1.0 / math.log2(rank + 1) for rank in range(1, n + 1))


def ndcg_at_k(ranked_items, relevant, k):
    if k < 1:
        raise ConfigurationError("k must be >= 1, got {}".format(k))
    relevant = set(relevant)
    if not relevant:
        return 0.0
    dcg = 0.0
    for rank, item in enumerate(ranked_items[:k], start=1):
        if item in relevant:
            dcg += 1.0 / math.log2(rank + 1)
    return dcg / idcg(min(k, len(relevant)))


def recall_at_k(ranked_items, relevant, k):
    if k < 1:
        raise ConfigurationError("k must be >= 1, got {}".format(k))
    relevant = set(relevant)
    if not relevant:
        return 0.0
    hits = sum(1 for item in ranked_items[:k] if item in relevant)
    return hits / float(len(relevant))


def rank_items(items, scores):
    """Order by score descending, ties broken by item id ascending."""
    items = np.asarray(items)
    order = np.lexsort((items, -np.asarray(scores, dtype=np.float64)))
    return items[order].tolist()


def evaluate(score_fn, dataset, split, k):
    """Average NDCG@k / Recall@k over users of a split.

    score_fn(users, items) returns one score per pair. Each user's own items
    in the split are the candidates; users without a positive are skipped.
    The scoring call is timed and reported per scored pair.
    """
    if split not in SPLITS:
        raise ConfigurationError("Unknown split: {}".format(split))
    records = dataset.in_split(split)
    if len(records) == 0:
        raise EvaluationError("Split {} is empty".format(split))

    users = records["user"].to_numpy()
    items = records["item"].to_numpy()
    labels = records["label"].to_numpy()
    started = time.perf_counter()
    scores = np.asarray(score_fn(users, items), dtype=np.float64)
    inference_ms = (time.perf_counter() - started) * 1000.0

    ndcgs, recalls = [], []
    skipped = 0
    order = np.argsort(users, kind="stable")
    boundaries = np.flatnonzero(np.diff(users[order])) + 1
    for group in np.split(order, boundaries):
        relevant = set(items[group][labels[group] == 1].tolist())
        if not relevant:
            skipped += 1
            continue
        ranked = rank_items(items[group], scores[group])
        ndcgs.append(ndcg_at_k(ranked, relevant, k))
        recalls.append(recall_at_k(ranked, relevant, k))

    if not ndcgs:
        logging.warning("No user in split {} has a positive item".format(split))
    return {
        "ndcg": float(np.mean(ndcgs)) if ndcgs else 0.0,
        "recall": float(np.mean(recalls)) if recalls else 0.0,
        "k": k,
        "users_evaluated": len(ndcgs),
        "users_skipped": skipped,
        INFERENCE_FIELD: inference_ms / len(records),
    }
