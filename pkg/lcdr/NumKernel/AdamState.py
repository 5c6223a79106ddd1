import numpy as np

from NumKernel.globals import ADAM_BETA1, ADAM_BETA2, ADAM_EPS
from exceptions import ConfigurationError


class AdamState:
    def __init__(
        self,
        lr=1e-3,
        beta1=ADAM_BETA1,
        beta2=ADAM_BETA2,
        eps=ADAM_EPS,
        weight_decay=0.0,
    ):
        if lr <= 0:
            raise ConfigurationError("Adam learning rate must be > 0, got {}".format(lr))
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.first_moment = {}
        self.second_moment = {}


def adam_step(params, grads, state):
    """One Adam update with decoupled weight decay, in place.

    params and grads are dicts of same-shaped arrays; parameters without a
    gradient entry are treated as frozen. Returns (params, state).
    """
    state.step_count += 1
    bias_correction1 = 1.0 - state.beta1 ** state.step_count
    bias_correction2 = 1.0 - state.beta2 ** state.step_count
    decay = 1.0 - state.lr * state.weight_decay

    for name, grad in grads.items():
        param = params[name]
        if grad.shape != param.shape:
            raise ConfigurationError(
                "Gradient shape {} != parameter shape {} for {}".format(
                    grad.shape, param.shape, name
                )
            )
        if name not in state.first_moment:
            state.first_moment[name] = np.zeros_like(param)
            state.second_moment[name] = np.zeros_like(param)
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * (grad * grad)

        if state.weight_decay:
            param *= decay
        param -= (state.lr / bias_correction1) * m / (
            np.sqrt(v / bias_correction2) + state.eps
        )
    return params, state
