import json
import logging

import numpy as np

from NumKernel.globals import CHECKPOINT_FORMAT_VERSION
from NumKernel.MlpParams import MlpParams
from exceptions import ConfigurationError


def mlp_to_arrays(mlp, prefix):
    arrays = mlp.named_parameters(prefix)
    activations = dict(
        ("{}{}.activation".format(prefix, idx), act)
        for idx, act in enumerate(mlp.activations())
    )
    return arrays, activations


def mlp_from_arrays(arrays, activations, prefix):
    mlp = MlpParams()
    idx = 0
    while "{}{}.weight".format(prefix, idx) in arrays:
        mlp.add_layer(
            arrays["{}{}.weight".format(prefix, idx)],
            arrays["{}{}.bias".format(prefix, idx)],
            activations["{}{}.activation".format(prefix, idx)],
        )
        idx += 1
    if idx == 0:
        raise ConfigurationError("Checkpoint has no layers under {}".format(prefix))
    return mlp


def save_checkpoint(path, kind, arrays, config=None, meta=None):
    # sorted keys and float reprs keep the file byte-stable for a given state
    blob = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "kind": kind,
        "config": config or {},
        "meta": meta or {},
        "arrays": dict(
            (
                name,
                {
                    "shape": list(np.shape(array)),
                    "data": [float(x) for x in np.ravel(array)],
                },
            )
            for name, array in arrays.items()
        ),
    }
    with open(path, "w") as fh:
        json.dump(blob, fh, sort_keys=True)
    logging.debug("Checkpoint {} written to {}".format(kind, path))


def load_checkpoint(path, expected_kind=None):
    with open(path, "r") as fh:
        blob = json.load(fh)
    if blob.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise ConfigurationError(
            "Unsupported checkpoint version {} in {}".format(
                blob.get("format_version"), path
            )
        )
    if expected_kind and blob["kind"] != expected_kind:
        raise ConfigurationError(
            "Checkpoint {} holds {}, expected {}".format(path, blob["kind"], expected_kind)
        )
    arrays = dict(
        (
            name,
            np.array(entry["data"], dtype=np.float64).reshape(entry["shape"]),
        )
        for name, entry in blob["arrays"].items()
    )
    return blob["kind"], blob["config"], blob["meta"], arrays
