import numpy as np

from NumKernel.globals import (
    PROB_CLIP_LOW,
    PROB_CLIP_HIGH,
    LOG_VAR_MIN,
    LOG_VAR_MAX,
    FINITE_DIFF_EPS,
)
from NumKernel.MlpParams import MlpParams
from exceptions import ConfigurationError, NumericalError


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    # exp of a non-positive argument never overflows
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def apply_activation(pre, activation):
    if activation == "tanh":
        return np.tanh(pre)
    if activation == "sigmoid":
        return sigmoid(pre)
    return pre


def activation_derivative(post, activation):
    # expressed through the layer output
    if activation == "tanh":
        return 1.0 - post * post
    if activation == "sigmoid":
        return post * (1.0 - post)
    return np.ones_like(post)


def init_mlp(sizes, activations, rng, scale=None):
    """Gaussian init; scale defaults to 1/sqrt(fan_in)."""
    if len(activations) != len(sizes) - 1:
        raise ConfigurationError(
            "init_mlp needs {} activations, got {}".format(
                len(sizes) - 1, len(activations)
            )
        )
    params = MlpParams()
    for fan_in, fan_out, activation in zip(sizes[:-1], sizes[1:], activations):
        std = scale if scale is not None else 1.0 / np.sqrt(max(fan_in, 1))
        weight = rng.normal(0.0, std, size=(fan_out, fan_in))
        params.add_layer(weight, np.zeros(fan_out), activation)
    return params


def mlp_forward(params, x, return_cache=False):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.input_dim:
        raise ConfigurationError(
            "mlp_forward input width {} != first layer width {}".format(
                x.shape[-1], params.input_dim
            )
        )
    cache = [x]
    h = x
    for weight, bias, activation in params.layers:
        h = apply_activation(h @ weight.T + bias, activation)
        cache.append(h)
    if return_cache:
        return h, cache
    return h


def mlp_backward(params, cache, d_output):
    """Reverse pass of mlp_forward.

    cache holds the layer inputs/outputs from mlp_forward(return_cache=True);
    d_output is the loss gradient w.r.t. the final (post-activation) output.
    Returns ([(d_weight, d_bias), ...], d_input).
    """
    grads = [None] * len(params.layers)
    delta = np.asarray(d_output, dtype=np.float64)
    for idx in range(len(params.layers) - 1, -1, -1):
        weight, _, activation = params.layers[idx]
        layer_in, layer_out = cache[idx], cache[idx + 1]
        d_pre = delta * activation_derivative(layer_out, activation)
        if d_pre.ndim == 1:
            d_weight = np.outer(d_pre, layer_in)
            d_bias = d_pre.copy()
        else:
            d_weight = d_pre.T @ layer_in
            d_bias = d_pre.sum(axis=0)
        grads[idx] = (d_weight, d_bias)
        delta = d_pre @ weight
    return grads, delta


def log_var_mask(raw_output):
    """1 where the log-variance half of a Gaussian head sits inside the clamp."""
    half = raw_output.shape[-1] // 2
    raw_log_var = raw_output[..., half:]
    return ((raw_log_var >= LOG_VAR_MIN) & (raw_log_var <= LOG_VAR_MAX)).astype(
        np.float64
    )


def gaussian_head_grad(d_mean, d_log_var, raw_output):
    """Gradient w.r.t. a raw (mean ‖ log_var) output, honouring the log_var clamp."""
    return np.concatenate([d_mean, d_log_var * log_var_mask(raw_output)], axis=-1)


def check_finite(name, *arrays):
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise NumericalError("Non-finite values in {}".format(name))


def gaussian_kl(q, p):
    """KL(q || p) between diagonal Gaussians, summed over the last axis."""
    if q.mean.shape[-1] != p.mean.shape[-1]:
        raise ConfigurationError(
            "gaussian_kl dimension mismatch: {} vs {}".format(
                q.mean.shape[-1], p.mean.shape[-1]
            )
        )
    check_finite("gaussian_kl inputs", q.mean, q.log_var, p.mean, p.log_var)
    diff = q.mean - p.mean
    terms = 0.5 * (p.log_var - q.log_var) + (
        np.exp(q.log_var) + diff * diff
    ) / (2.0 * np.exp(p.log_var)) - 0.5
    return terms.sum(axis=-1)


def gaussian_kl_grads(q, p):
    """Partials of gaussian_kl w.r.t. (q.mean, q.log_var, p.mean, p.log_var)."""
    var_q = np.exp(q.log_var)
    var_p = np.exp(p.log_var)
    diff = q.mean - p.mean
    d_q_mean = diff / var_p
    d_q_log_var = 0.5 * (var_q / var_p - 1.0)
    d_p_mean = -d_q_mean
    d_p_log_var = 0.5 - (var_q + diff * diff) / (2.0 * var_p)
    return d_q_mean, d_q_log_var, d_p_mean, d_p_log_var


def clip_probabilities(mu):
    return np.clip(mu, PROB_CLIP_LOW, PROB_CLIP_HIGH)


def bernoulli_loglik(a, mu):
    a = np.asarray(a, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if a.shape != mu.shape:
        raise ConfigurationError(
            "bernoulli_loglik shape mismatch: {} vs {}".format(a.shape, mu.shape)
        )
    mu = clip_probabilities(mu)
    return (a * np.log(mu) + (1.0 - a) * np.log1p(-mu)).sum(axis=-1)


def bernoulli_loglik_grad(a, mu):
    """d bernoulli_loglik / d mu, zero where the clip is active."""
    a = np.asarray(a, dtype=np.float64)
    clipped = clip_probabilities(mu)
    inside = (mu >= PROB_CLIP_LOW) & (mu <= PROB_CLIP_HIGH)
    return (a / clipped - (1.0 - a) / (1.0 - clipped)) * inside


def reparam_sample(g, noise):
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != g.mean.shape:
        raise ConfigurationError(
            "reparam_sample noise shape {} != {}".format(noise.shape, g.mean.shape)
        )
    return g.mean + np.exp(0.5 * g.log_var) * noise


def finite_diff_grad(loss_fn, params, eps=FINITE_DIFF_EPS):
    """Central-difference gradient of loss_fn(params).

    params is a scalar, an array or a dict of arrays. Coordinates are
    perturbed in place and restored, so loss_fn may also close over them.
    """
    if eps <= 0:
        raise ConfigurationError("finite_diff_grad needs eps > 0")
    if isinstance(params, dict):
        grads = {}
        for name, array in params.items():
            grads[name] = _central_differences(lambda: loss_fn(params), array, eps)
        return grads
    if np.ndim(params) == 0:
        x = float(params)
        return (loss_fn(x + eps) - loss_fn(x - eps)) / (2.0 * eps)
    array = np.asarray(params, dtype=np.float64)
    return _central_differences(lambda: loss_fn(array), array, eps)


def _central_differences(evaluate, array, eps):
    grad = np.zeros(array.shape, dtype=np.float64)
    for index in np.ndindex(*array.shape):
        original = array[index]
        array[index] = original + eps
        plus = evaluate()
        array[index] = original - eps
        minus = evaluate()
        array[index] = original
        grad[index] = (plus - minus) / (2.0 * eps)
    return grad


def parameter_norms(params):
    return dict((name, float(np.linalg.norm(array))) for name, array in params.items())
