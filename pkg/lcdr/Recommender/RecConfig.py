import logging

from Metrics.globals import DEFAULT_K
from Recommender.globals import DEFAULT_D_MF, HEAD_INIT_NORMAL, HEAD_INIT_ZERO
from exceptions import ConfigurationError


class RecConfig:
    def __init__(
        self,
        d_mf=DEFAULT_D_MF,
        lr=1e-3,
        weight_decay=1e-5,
        epochs=100,
        batch_size=512,
        patience=10,
        k=DEFAULT_K,
        head_init=HEAD_INIT_NORMAL,
        freeze_head=False,
    ):
        self.d_mf = d_mf
        self.lr = lr
        self.weight_decay = weight_decay
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.k = k
        self.head_init = head_init
        self.freeze_head = freeze_head
        self.validate()

    def validate(self):
        errors = []
        if self.d_mf < 1:
            errors.append("d_mf must be >= 1")
        if self.lr <= 0:
            errors.append("lr must be > 0")
        if self.epochs < 0:
            errors.append("epochs must be >= 0")
        if self.batch_size < 1:
            errors.append("batch_size must be >= 1")
        if self.patience < 1:
            errors.append("patience must be >= 1")
        if self.k < 1:
            errors.append("k must be >= 1")
        if self.head_init not in (HEAD_INIT_NORMAL, HEAD_INIT_ZERO):
            errors.append("head_init must be normal or zero")
        for error in errors:
            logging.error("Recommender config: {}".format(error))
        if errors:
            raise ConfigurationError("; ".join(errors))

    def to_dict(self):
        return dict(
            (name, getattr(self, name))
            for name in (
                "d_mf", "lr", "weight_decay", "epochs", "batch_size",
                "patience", "k", "head_init", "freeze_head",
            )
        )

    @classmethod
    def from_dict(cls, values):
        values = dict(values or {})
        unknown = set(values) - set(cls().to_dict())
        if unknown:
            raise ConfigurationError("Unknown recommender option(s): {}".format(sorted(unknown)))
        return cls(**values)
