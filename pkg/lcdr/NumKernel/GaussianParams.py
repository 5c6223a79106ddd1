import numpy as np

from NumKernel.globals import LOG_VAR_MIN, LOG_VAR_MAX
from exceptions import ConfigurationError


class GaussianParams:
    """Diagonal Gaussian given by its mean and log-variance.

    Both arrays share a shape; the last axis runs over latent units, leading
    axes (if any) over batch rows. log_var is clamped on construction.
    """

    def __init__(self, mean, log_var):
        mean = np.asarray(mean, dtype=np.float64)
        log_var = np.asarray(log_var, dtype=np.float64)
        if mean.shape != log_var.shape:
            raise ConfigurationError(
                "GaussianParams mean shape {} != log_var shape {}".format(
                    mean.shape, log_var.shape
                )
            )
        self.mean = mean
        self.log_var = np.clip(log_var, LOG_VAR_MIN, LOG_VAR_MAX)

    @classmethod
    def from_output(cls, output):
        """Split a network output (mean ‖ log_var) into halves."""
        output = np.asarray(output, dtype=np.float64)
        if output.shape[-1] % 2 != 0:
            raise ConfigurationError(
                "Gaussian head needs an even width, got {}".format(output.shape[-1])
            )
        half = output.shape[-1] // 2
        return cls(output[..., :half], output[..., half:])

    @classmethod
    def standard(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape))

    @property
    def dim(self):
        return self.mean.shape[-1]

    @property
    def var(self):
        return np.exp(self.log_var)

    @property
    def std(self):
        return np.exp(0.5 * self.log_var)
