import hashlib
import logging
import os

import numpy as np
import pandas as pd

from DataIO.globals import SPLIT_TRAIN
from exceptions import ParseError


def find_existing(root, candidates):
    for name in candidates:
        path = os.path.join(root, name)
        if os.path.isfile(path):
            return path
    return None


def read_whitespace_rows(path, width=None, cast=float):
    """Yield (line_number, values) per non-blank line of a whitespace table."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if width is not None and len(tokens) not in width:
                raise ParseError(
                    path,
                    line_number,
                    "expected {} fields, found {}".format(
                        " or ".join(str(w) for w in sorted(width)), len(tokens)
                    ),
                )
            try:
                values = [cast(token) for token in tokens]
            except ValueError:
                raise ParseError(path, line_number, "non-numeric field in: {}".format(line.strip()))
            yield line_number, values


def read_matrix(path, cast=int):
    rows = []
    expected = None
    for line_number, values in read_whitespace_rows(path, cast=cast):
        if expected is None:
            expected = len(values)
        elif len(values) != expected:
            raise ParseError(
                path,
                line_number,
                "row has {} columns, previous rows have {}".format(len(values), expected),
            )
        rows.append(values)
    return np.array(rows, dtype=np.float64).reshape(len(rows), expected or 0)


def build_records(users, items, values, origins):
    """Assemble a records frame, dropping repeated (user, item, origin) keys.

    The last occurrence wins. Returns (frame, duplicate_count).
    """
    frame = pd.DataFrame(
        {
            "user": np.asarray(users, dtype=np.int64),
            "item": np.asarray(items, dtype=np.int64),
            "value": np.asarray(values, dtype=np.float64),
            "label": np.zeros(len(users), dtype=np.int64),
            "origin": pd.Series(list(origins), dtype=object),
            "split": pd.Series([SPLIT_TRAIN] * len(users), dtype=object),
        }
    )
    before = len(frame)
    frame = frame.drop_duplicates(subset=["user", "item", "origin"], keep="last")
    duplicates = before - len(frame)
    if duplicates:
        logging.warning(
            "Dropped {} duplicated (user, item, origin) record(s), kept last occurrence".format(
                duplicates
            )
        )
    return frame.reset_index(drop=True), duplicates


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()
