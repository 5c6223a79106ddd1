import logging

from DataIO.globals import DEFAULT_VAL_FRACTION
from SynthLab.globals import NUM_PROXY_CLASSES, MIN_CLASS_SPREAD
from exceptions import ConfigurationError


class SynthConfig:
    """Knobs of the synthetic confounded-data generator.

    proxy_noise is the probability that an observed proxy factor is replaced
    by an independent draw. exposure_sparsity is the target fraction of
    user-item pairs that end up exposed.
    """

    def __init__(
        self,
        num_users=1000,
        num_items=200,
        latent_dim_true=2,
        proxy_noise=0.0,
        exposure_sparsity=0.1,
        num_classes=NUM_PROXY_CLASSES,
        class_spread=3.0,
        latent_std=0.5,
        exposure_scale=1.5,
        preference_dim=4,
        confounder_strength=1.5,
        feedback_bias=0.0,
        unbiased_per_user=10,
        val_fraction=DEFAULT_VAL_FRACTION,
        seed=0,
    ):
        self.num_users = num_users
        self.num_items = num_items
        self.latent_dim_true = latent_dim_true
        self.proxy_noise = proxy_noise
        self.exposure_sparsity = exposure_sparsity
        self.num_classes = num_classes
        self.class_spread = class_spread
        self.latent_std = latent_std
        self.exposure_scale = exposure_scale
        self.preference_dim = preference_dim
        self.confounder_strength = confounder_strength
        self.feedback_bias = feedback_bias
        self.unbiased_per_user = unbiased_per_user
        self.val_fraction = val_fraction
        self.seed = seed
        self.validate()

    def validate(self):
        errors = []
        if not 0.0 <= self.proxy_noise <= 1.0:
            errors.append("proxy_noise must lie in [0, 1], got {}".format(self.proxy_noise))
        for name in ("num_users", "num_items", "latent_dim_true", "preference_dim"):
            if getattr(self, name) < 1:
                errors.append("{} must be >= 1".format(name))
        if self.num_classes < 2:
            errors.append("num_classes must be >= 2")
        if self.class_spread < MIN_CLASS_SPREAD:
            errors.append(
                "class_spread must be >= {} latent std devs".format(MIN_CLASS_SPREAD)
            )
        if self.latent_std <= 0:
            errors.append("latent_std must be > 0")
        if self.unbiased_per_user < 1:
            errors.append("unbiased_per_user must be >= 1")
        for error in errors:
            logging.error("Synth config: {}".format(error))
        if errors:
            raise ConfigurationError("; ".join(errors))

    def to_dict(self):
        return dict(vars(self))

    @classmethod
    def from_dict(cls, values):
        values = dict(values or {})
        unknown = set(values) - set(cls().to_dict())
        if unknown:
            raise ConfigurationError("Unknown synth option(s): {}".format(sorted(unknown)))
        return cls(**values)
