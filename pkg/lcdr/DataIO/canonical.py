import json
import logging
import os

import numpy as np
import pandas as pd

from DataIO.globals import (
    CANONICAL_COLUMNS,
    CANONICAL_DATASET_FILE,
    CANONICAL_PROXIES_FILE,
    MANIFEST_FILE,
    ORIGINS,
    SPLITS,
)
from DataIO.InteractionDataset import InteractionDataset
from DataIO.helpers import sha256_file
from DataIO.protocol import binarize
from exceptions import ParseError


def write_canonical(dataset, out_dir, extra=None):
    """Write dataset.tsv, proxies.tsv and manifest.json; return the manifest."""
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    dataset_path = os.path.join(out_dir, CANONICAL_DATASET_FILE)
    proxies_path = os.path.join(out_dir, CANONICAL_PROXIES_FILE)

    with open(dataset_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(CANONICAL_COLUMNS) + "\n")
        for row in dataset.records.itertuples(index=False):
            fh.write(
                "{}\t{}\t{}\t{}\t{}\n".format(
                    row.user, row.item, repr(float(row.value)), row.origin, row.split
                )
            )

    with open(proxies_path, "w", encoding="utf-8", newline="\n") as fh:
        for user in range(dataset.num_users):
            fh.write(
                "{}\t{}\n".format(
                    user, ",".join(repr(float(x)) for x in dataset.proxies[user])
                )
            )

    manifest = {
        "num_users": dataset.num_users,
        "num_items": dataset.num_items,
        "rating_threshold": dataset.rating_threshold,
        "value_scale": dataset.value_scale,
        "proxy_columns": dataset.proxy_columns,
        "counts": dataset.counts(),
        "report": dataset.report,
        "checksums": {
            CANONICAL_DATASET_FILE: sha256_file(dataset_path),
            CANONICAL_PROXIES_FILE: sha256_file(proxies_path),
        },
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, MANIFEST_FILE), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    logging.info("Canonical dataset written to {}: {}".format(out_dir, manifest["counts"]))
    return manifest


def _first_bad_line(path):
    """Locate the first dataset.tsv line pandas could not have parsed."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if line_number == 1:
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != len(CANONICAL_COLUMNS):
                return line_number, "expected {} fields, found {}".format(len(CANONICAL_COLUMNS), len(fields))
            try:
                int(fields[0])
                int(fields[1])
                float(fields[2])
            except ValueError:
                return line_number, "non-numeric user, item or value"
    return 1, "unreadable table"


def read_canonical(in_dir):
    manifest_path = os.path.join(in_dir, MANIFEST_FILE)
    if not os.path.isfile(manifest_path):
        raise FileNotFoundError("No manifest at {}".format(manifest_path))
    with open(manifest_path, "r") as fh:
        manifest = json.load(fh)

    dataset_path = os.path.join(in_dir, CANONICAL_DATASET_FILE)
    try:
        records = pd.read_csv(
            dataset_path,
            sep="\t",
            dtype={"user": np.int64, "item": np.int64, "value": np.float64, "origin": object, "split": object},
        )
    except (pd.errors.ParserError, ValueError) as e:
        line_number, problem = _first_bad_line(dataset_path)
        raise ParseError(dataset_path, line_number, "{} ({})".format(problem, e))
    if list(records.columns) != CANONICAL_COLUMNS:
        raise ParseError(dataset_path, 1, "unexpected header {}".format(list(records.columns)))
    for column, allowed in (("origin", ORIGINS), ("split", SPLITS)):
        bad = ~records[column].isin(allowed)
        if bad.any():
            # +2: header line plus 1-based numbering
            line_number = int(np.flatnonzero(bad.to_numpy())[0]) + 2
            raise ParseError(dataset_path, line_number, "bad {} value".format(column))
    records.insert(3, "label", np.zeros(len(records), dtype=np.int64))

    proxies = np.zeros((manifest["num_users"], len(manifest["proxy_columns"])))
    proxies_path = os.path.join(in_dir, CANONICAL_PROXIES_FILE)
    with open(proxies_path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            user, _, values = line.partition("\t")
            try:
                row = [float(v) for v in values.split(",")] if values else []
                proxies[int(user)] = row
            except (ValueError, IndexError):
                raise ParseError(proxies_path, line_number, "malformed proxy row")

    dataset = InteractionDataset(
        num_users=manifest["num_users"],
        num_items=manifest["num_items"],
        records=records,
        proxies=proxies,
        proxy_columns=manifest["proxy_columns"],
        rating_threshold=manifest["rating_threshold"],
        value_scale=manifest["value_scale"],
        report=manifest.get("report"),
    )
    return binarize(dataset), manifest
