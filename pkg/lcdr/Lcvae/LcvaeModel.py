import numpy as np

from NumKernel.globals import NORM_SMOOTHING
from NumKernel.GaussianParams import GaussianParams
from NumKernel.helpers import (
    init_mlp,
    clip_probabilities,
    mlp_forward,
    mlp_backward,
    gaussian_kl,
    gaussian_kl_grads,
    gaussian_head_grad,
    bernoulli_loglik,
    bernoulli_loglik_grad,
    reparam_sample,
)
from exceptions import ConfigurationError


class LcvaeModel:
    """Constrained VAE over exposure only: q(Z_lc|A), N(0, I) prior and a
    Bernoulli decoder. With lambda = 0 it is a plain VAE."""

    def __init__(self, num_items, latent_dim=4, hidden_dim=64, rng=None, encoder_net=None, decoder_net=None):
        self.num_items = num_items
        self.latent_dim = latent_dim
        self.hidden_dim = hidden_dim
        if encoder_net is None or decoder_net is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            encoder_net = encoder_net or init_mlp(
                [num_items, hidden_dim, 2 * latent_dim], ["tanh", "identity"], rng
            )
            decoder_net = decoder_net or init_mlp(
                [latent_dim, hidden_dim, num_items], ["tanh", "sigmoid"], rng
            )
        self.encoder_net = encoder_net
        self.decoder_net = decoder_net
        if self.encoder_net.output_dim != 2 * latent_dim:
            raise ConfigurationError("LCVAE encoder must emit 2 x latent_dim values")
        if self.decoder_net.output_dim != num_items:
            raise ConfigurationError("LCVAE decoder must emit one probability per item")

    def named_parameters(self):
        params = {}
        params.update(self.encoder_net.named_parameters("encoder."))
        params.update(self.decoder_net.named_parameters("decoder."))
        return params

    def networks(self):
        return {"encoder.": self.encoder_net, "decoder.": self.decoder_net}


def lcvae_encode(model, a):
    return GaussianParams.from_output(mlp_forward(model.encoder_net, a))


def lcvae_decode(model, z_lc):
    return clip_probabilities(mlp_forward(model.decoder_net, z_lc))


def alignment_penalty(z_lc, z):
    z_lc = np.asarray(z_lc, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z_lc.shape != z.shape:
        raise ConfigurationError(
            "alignment_penalty shape mismatch: {} vs {}".format(z_lc.shape, z.shape)
        )
    diff = z_lc - z
    return np.sqrt((diff * diff).sum(axis=-1) + NORM_SMOOTHING)


def _check_lambda(lam):
    if lam < 0:
        raise ConfigurationError("lambda must be >= 0, got {}".format(lam))


def lcvae_loss(model, a, z_from_ivae, lam, noise):
    """-recon + KL(q || N(0, I)) + lambda * ||Z_lc - Z||, per row.

    z_from_ivae is a constant here: nothing flows back into the iVAE.
    """
    _check_lambda(lam)
    posterior = lcvae_encode(model, a)
    z_lc = reparam_sample(posterior, noise)
    loss = -bernoulli_loglik(a, lcvae_decode(model, z_lc)) + gaussian_kl(
        posterior, GaussianParams.standard(posterior.mean.shape)
    )
    if lam != 0 and z_from_ivae is not None:
        loss = loss + lam * alignment_penalty(z_lc, z_from_ivae)
    return loss


def lcvae_loss_and_grads(model, a, z_from_ivae, lam, noise):
    """Batch-mean lcvae_loss with gradients w.r.t. LCVAE parameters only."""
    _check_lambda(lam)
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    noise = np.atleast_2d(np.asarray(noise, dtype=np.float64))
    batch = a.shape[0]

    enc_out, enc_cache = mlp_forward(model.encoder_net, a, return_cache=True)
    posterior = GaussianParams.from_output(enc_out)
    prior = GaussianParams.standard(posterior.mean.shape)
    std = np.exp(0.5 * posterior.log_var)
    z_lc = posterior.mean + std * noise
    mu, dec_cache = mlp_forward(model.decoder_net, z_lc, return_cache=True)

    recon = bernoulli_loglik(a, mu)
    kl = gaussian_kl(posterior, prior)
    per_row = kl - recon

    dec_grads, d_z = mlp_backward(
        model.decoder_net, dec_cache, -bernoulli_loglik_grad(a, mu) / batch
    )
    align_mean = 0.0
    if lam != 0 and z_from_ivae is not None:
        z_from_ivae = np.atleast_2d(z_from_ivae)
        align = alignment_penalty(z_lc, z_from_ivae)
        per_row = per_row + lam * align
        d_z = d_z + lam * (z_lc - z_from_ivae) / align[:, None] / batch
        align_mean = float(np.mean(align))

    d_q_mean, d_q_log_var, _, _ = gaussian_kl_grads(posterior, prior)
    d_enc_out = gaussian_head_grad(
        d_z + d_q_mean / batch,
        d_z * noise * 0.5 * std + d_q_log_var / batch,
        enc_out,
    )
    enc_grads, _ = mlp_backward(model.encoder_net, enc_cache, d_enc_out)

    grads = {}
    grads.update(model.encoder_net.named_gradients(enc_grads, "encoder."))
    grads.update(model.decoder_net.named_gradients(dec_grads, "decoder."))
    components = {
        "recon": float(np.mean(recon)),
        "kl": float(np.mean(kl)),
        "align": align_mean,
    }
    return float(np.mean(per_row)), grads, z_lc, components


def posterior_means(model, exposure):
    """Posterior means of q(Z_lc|A), one row per user."""
    return lcvae_encode(model, exposure).mean
