import json
import logging
import os
import shutil
from datetime import datetime

from Cli.globals import LOG_DIR, LOG_FORMAT, CONSOLE_FORMAT, DATE_FORMAT
from Ivae.IvaeModel import IvaeModel
from Lcvae.LcvaeModel import LcvaeModel
from NumKernel.checkpoint import mlp_to_arrays, mlp_from_arrays, save_checkpoint, load_checkpoint
from exceptions import ConfigurationError, OutputConflictError

_CONSOLE = None


def setup_logging(verbose=False, log_dir=LOG_DIR):
    """DEBUG to ./logs/lcdr-<timestamp>.log, INFO (or DEBUG) to the console."""
    global _CONSOLE
    if not os.path.isdir(log_dir):
        os.makedirs(log_dir)
    logging.basicConfig(
        level=logging.DEBUG,
        format=LOG_FORMAT,
        datefmt=DATE_FORMAT,
        filename=os.path.join(
            log_dir, "lcdr-{}.log".format(datetime.now().strftime(DATE_FORMAT))
        ),
        filemode="w",
    )
    if _CONSOLE is None:
        _CONSOLE = logging.StreamHandler()
        _CONSOLE.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        logging.getLogger("").addHandler(_CONSOLE)
    _CONSOLE.setLevel(logging.DEBUG if verbose else logging.INFO)


def prepare_output_dir(path, force=False):
    """Create path; an existing non-empty directory needs force and is cleared."""
    if os.path.isdir(path) and os.listdir(path):
        if not force:
            raise OutputConflictError(
                "{} already exists and is not empty (use --force to overwrite)".format(path)
            )
        logging.warning("Overwriting {}".format(path))
        shutil.rmtree(path)
    if not os.path.isdir(path):
        os.makedirs(path)
    return path


def write_json(path, blob):
    with open(path, "w") as fh:
        json.dump(blob, fh, indent=2, sort_keys=True)


def read_json(path):
    with open(path, "r") as fh:
        return json.load(fh)


def write_jsonl(path, entries):
    with open(path, "w") as fh:
        for entry in entries:
            json.dump(entry, fh, sort_keys=True)
            fh.write("\n")


def parse_seeds(text):
    """'0-9' or '0,3,5' or '7'."""
    if text is None:
        return None
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                low, high = part.split("-", 1)
                seeds.extend(range(int(low), int(high) + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise ConfigurationError("Bad seed list: {}".format(text))
    return seeds


def parse_values(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError("Bad value list: {}".format(text))


def save_stage_one(path, model, config=None, meta=None):
    """IvaeModel or LcvaeModel into a versioned checkpoint."""
    kind = "ivae" if isinstance(model, IvaeModel) else "lcvae"
    arrays, activations = {}, {}
    for prefix, net in model.networks().items():
        net_arrays, net_activations = mlp_to_arrays(net, prefix)
        arrays.update(net_arrays)
        activations.update(net_activations)
    meta = dict(meta or {})
    meta.update(
        activations=activations,
        num_items=model.num_items,
        latent_dim=model.latent_dim,
        hidden_dim=model.hidden_dim,
    )
    if kind == "ivae":
        meta["proxy_dim"] = model.proxy_dim
    save_checkpoint(path, kind, arrays, config=config, meta=meta)


def load_stage_one(path):
    kind, config, meta, arrays = load_checkpoint(path)
    nets = dict(
        (prefix.rstrip("."), mlp_from_arrays(arrays, meta["activations"], prefix))
        for prefix in set(name.split(".")[0] + "." for name in arrays)
    )
    if kind == "ivae":
        model = IvaeModel(
            meta["num_items"],
            meta["proxy_dim"],
            latent_dim=meta["latent_dim"],
            hidden_dim=meta["hidden_dim"],
            prior_net=nets["prior"],
            encoder_net=nets["encoder"],
            decoder_net=nets["decoder"],
        )
    elif kind == "lcvae":
        model = LcvaeModel(
            meta["num_items"],
            latent_dim=meta["latent_dim"],
            hidden_dim=meta["hidden_dim"],
            encoder_net=nets["encoder"],
            decoder_net=nets["decoder"],
        )
    else:
        raise ConfigurationError("{} is not a stage-one checkpoint".format(path))
    return model, config
