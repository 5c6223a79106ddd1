import hashlib
import json
import logging
import os

import yaml

from Metrics.globals import DEFAULT_K, HEADLINE_SEEDS
from Recommender.RecConfig import RecConfig
from Trainer.globals import METHODS, METHOD_LCDR
from Trainer.TrainConfig import TrainConfig
from Cli.globals import CONFIG_SECTIONS, DEFAULT_THREADS
from exceptions import ConfigurationError


def load_config_file(path):
    """Read a sectioned YAML config; returns {section: {key: value}}."""
    if path is None:
        return {}
    if not os.path.isfile(path):
        raise FileNotFoundError("Config file not found: {}".format(path))
    with open(path, "r") as fh:
        try:
            blob = yaml.safe_load(fh) or {}
        except yaml.YAMLError as error:
            raise ConfigurationError("Cannot parse {}: {}".format(path, error))
    if not isinstance(blob, dict):
        raise ConfigurationError("{} must hold a mapping of sections".format(path))
    unknown = set(blob) - CONFIG_SECTIONS
    if unknown:
        raise ConfigurationError("Unknown config section(s) in {}: {}".format(path, sorted(unknown)))
    for section, values in blob.items():
        if values is not None and not isinstance(values, dict):
            raise ConfigurationError("Section {} in {} must be key: value pairs".format(section, path))
    return dict((section, values or {}) for section, values in blob.items())


def config_hash(blob):
    canonical = json.dumps(blob, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class RunConfig:
    def __init__(
        self,
        data=None,
        method=METHOD_LCDR,
        seeds=None,
        k=DEFAULT_K,
        train=None,
        recommender=None,
        threads=DEFAULT_THREADS,
    ):
        self.data = data
        self.method = method
        self.seeds = list(HEADLINE_SEEDS if seeds is None else seeds)
        self.k = k
        self.train = train or TrainConfig()
        self.recommender = recommender or RecConfig()
        self.threads = threads

    def validate(self):
        errors = []
        if self.method not in METHODS:
            errors.append("method must be one of {}, got {}".format(METHODS, self.method))
        if not self.seeds:
            errors.append("seeds must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            errors.append("seeds must be distinct")
        if self.k < 1:
            errors.append("k must be >= 1")
        if self.threads < 1:
            errors.append("threads must be >= 1")
        if self.data is None:
            errors.append("no dataset given (data.path or --data)")
        for error in errors:
            logging.error(error)
        if errors:
            raise ConfigurationError("; ".join(errors))
        if not os.path.isdir(self.data):
            raise FileNotFoundError("Dataset directory not found: {}".format(self.data))

    def to_dict(self):
        # seed is per run, not part of the stage-one config
        train = self.train.to_dict()
        train.pop("seed")
        return {
            "data": {"path": self.data},
            "train": train,
            "recommender": self.recommender.to_dict(),
            "run": {"method": self.method, "seeds": self.seeds, "k": self.k},
        }

    @property
    def hash(self):
        return config_hash(self.to_dict())

    @classmethod
    def from_sources(cls, sections=None, overrides=None):
        """File sections first, then non-None command-line overrides."""
        sections = sections or {}
        overrides = dict((key, value) for key, value in (overrides or {}).items() if value is not None)
        run = dict(sections.get("run", {}))
        data = dict(sections.get("data", {}))
        train = dict(sections.get("train", {}))
        unknown_run = set(run) - set(["method", "seeds", "k", "threads"])
        if unknown_run:
            raise ConfigurationError("Unknown run option(s): {}".format(sorted(unknown_run)))

        if "lambda" in overrides:
            train["lambda"] = overrides["lambda"]
        return cls(
            data=overrides.get("data", data.get("path")),
            method=overrides.get("method", run.get("method", METHOD_LCDR)),
            seeds=overrides.get("seeds", run.get("seeds")),
            k=overrides.get("k", run.get("k", DEFAULT_K)),
            train=TrainConfig.from_dict(train),
            recommender=RecConfig.from_dict(sections.get("recommender", {})),
            threads=overrides.get("threads", run.get("threads", DEFAULT_THREADS)),
        )

    def snapshot(self):
        blob = self.to_dict()
        blob["config_hash"] = self.hash
        return yaml.safe_dump(blob, default_flow_style=False, sort_keys=True)

    @classmethod
    def from_snapshot(cls, path):
        with open(path, "r") as fh:
            blob = yaml.safe_load(fh)
        blob.pop("config_hash", None)
        config = cls.from_sources(blob)
        return config
