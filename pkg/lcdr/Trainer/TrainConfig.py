import logging

from Trainer.globals import CONVERGENCE_TOL
from exceptions import ConfigurationError


class TrainConfig:
    """Stage-one hyperparameters. `lam` is the alignment weight (config key
    "lambda"); 0.9 suits Coat, 0.1 Yahoo!R3."""

    def __init__(
        self,
        latent_dim=4,
        hidden_dim=64,
        lr=1e-3,
        weight_decay=1e-5,
        lam=0.9,
        epochs=200,
        batch_size=256,
        patience=10,
        seed=0,
        val_metric="ndcg@5",
        tol=CONVERGENCE_TOL,
    ):
        self.latent_dim = latent_dim
        self.hidden_dim = hidden_dim
        self.lr = lr
        self.weight_decay = weight_decay
        self.lam = lam
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.seed = seed
        self.val_metric = val_metric
        self.tol = tol
        self.validate()

    def validate(self):
        errors = []
        if self.epochs < 1:
            errors.append("epochs must be >= 1, got {}".format(self.epochs))
        if self.batch_size < 1:
            errors.append("batch_size must be >= 1, got {}".format(self.batch_size))
        if self.latent_dim < 1 or self.hidden_dim < 1:
            errors.append("latent_dim and hidden_dim must be >= 1")
        if self.lr <= 0:
            errors.append("lr must be > 0, got {}".format(self.lr))
        if self.lam < 0:
            errors.append("lambda must be >= 0, got {}".format(self.lam))
        if self.patience < 1:
            errors.append("patience must be >= 1, got {}".format(self.patience))
        if self.val_metric != "ndcg@5":
            errors.append("val_metric must be ndcg@5, got {}".format(self.val_metric))
        for error in errors:
            logging.error(error)
        if errors:
            raise ConfigurationError("; ".join(errors))
        if self.lam > 1:
            logging.warning("lambda = {} is above the usual [0, 1] range".format(self.lam))

    def to_dict(self):
        return {
            "latent_dim": self.latent_dim,
            "hidden_dim": self.hidden_dim,
            "lr": self.lr,
            "weight_decay": self.weight_decay,
            "lambda": self.lam,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "patience": self.patience,
            "seed": self.seed,
            "val_metric": self.val_metric,
            "tol": self.tol,
        }

    @classmethod
    def from_dict(cls, values):
        values = dict(values or {})
        if "lambda" in values:
            values["lam"] = values.pop("lambda")
        unknown = set(values) - set(cls().to_dict()) - set(["lam"])
        if unknown:
            raise ConfigurationError("Unknown train option(s): {}".format(sorted(unknown)))
        return cls(**values)

    def replace(self, **changes):
        if "lam" in changes:
            changes["lambda"] = changes.pop("lam")
        values = self.to_dict()
        values.update(changes)
        return TrainConfig.from_dict(values)
