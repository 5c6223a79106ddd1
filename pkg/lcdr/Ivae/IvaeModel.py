import numpy as np

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


class IvaeModel:
    """Identifiable VAE: conditional prior p(Z|W), posterior q(Z|A,W) and a
    Bernoulli decoder p(A|Z) over the item axis."""

    def __init__(
        self,
        num_items,
        proxy_dim,
        latent_dim=4,
        hidden_dim=64,
        rng=None,
        prior_net=None,
        encoder_net=None,
        decoder_net=None,
    ):
        self.num_items = num_items
        self.proxy_dim = proxy_dim
        self.latent_dim = latent_dim
        self.hidden_dim = hidden_dim
        if prior_net is None or encoder_net is None or decoder_net is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            prior_net = prior_net or init_mlp(
                [proxy_dim, hidden_dim, 2 * latent_dim], ["tanh", "identity"], rng
            )
            encoder_net = encoder_net or init_mlp(
                [num_items + proxy_dim, hidden_dim, 2 * latent_dim],
                ["tanh", "identity"],
                rng,
            )
            decoder_net = decoder_net or init_mlp(
                [latent_dim, hidden_dim, num_items], ["tanh", "sigmoid"], rng
            )
        self.prior_net = prior_net
        self.encoder_net = encoder_net
        self.decoder_net = decoder_net
        self.validate()

    def validate(self):
        if self.decoder_net.output_dim != self.num_items:
            raise ConfigurationError(
                "iVAE decoder emits {} values for {} items".format(
                    self.decoder_net.output_dim, self.num_items
                )
            )
        for name, net in (("prior", self.prior_net), ("encoder", self.encoder_net)):
            if net.output_dim != 2 * self.latent_dim:
                raise ConfigurationError(
                    "iVAE {} emits {} values, expected 2 x latent_dim = {}".format(
                        name, net.output_dim, 2 * self.latent_dim
                    )
                )
        if self.encoder_net.input_dim != self.num_items + self.proxy_dim:
            raise ConfigurationError("iVAE encoder input must be items + proxies")

    def named_parameters(self):
        params = {}
        params.update(self.prior_net.named_parameters("prior."))
        params.update(self.encoder_net.named_parameters("encoder."))
        params.update(self.decoder_net.named_parameters("decoder."))
        return params

    def networks(self):
        return {"prior.": self.prior_net, "encoder.": self.encoder_net, "decoder.": self.decoder_net}


def ivae_prior(model, w):
    return GaussianParams.from_output(mlp_forward(model.prior_net, w))


def ivae_encode(model, a, w):
    # q(Z|A,W) sees the exposure row and the proxies side by side
    return GaussianParams.from_output(
        mlp_forward(model.encoder_net, np.concatenate([a, w], axis=-1))
    )


def ivae_decode(model, z):
    return clip_probabilities(mlp_forward(model.decoder_net, z))


def ivae_elbo(model, a, w, noise):
    """Single-sample ELBO: E_q[log p(A|Z)] - KL(q(Z|A,W) || p(Z|W))."""
    prior = ivae_prior(model, w)
    posterior = ivae_encode(model, a, w)
    z = reparam_sample(posterior, noise)
    return bernoulli_loglik(a, ivae_decode(model, z)) - gaussian_kl(posterior, prior)


def ivae_loss_and_grads(model, a, w, noise):
    """Batch loss -mean(ELBO) with analytic gradients.

    Returns (loss, grads, z, components); z is the reparameterised sample
    handed to the constrained branch.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    noise = np.atleast_2d(np.asarray(noise, dtype=np.float64))
    batch = a.shape[0]

    prior_out, prior_cache = mlp_forward(model.prior_net, w, return_cache=True)
    enc_out, enc_cache = mlp_forward(
        model.encoder_net, np.concatenate([a, w], axis=-1), return_cache=True
    )
    prior = GaussianParams.from_output(prior_out)
    posterior = GaussianParams.from_output(enc_out)
    std = np.exp(0.5 * posterior.log_var)
    z = posterior.mean + std * noise
    mu, dec_cache = mlp_forward(model.decoder_net, z, return_cache=True)

    recon = bernoulli_loglik(a, mu)
    kl = gaussian_kl(posterior, prior)
    loss = float(np.mean(kl - recon))

    dec_grads, d_z = mlp_backward(
        model.decoder_net, dec_cache, -bernoulli_loglik_grad(a, mu) / batch
    )
    d_q_mean, d_q_log_var, d_p_mean, d_p_log_var = gaussian_kl_grads(posterior, prior)
    d_enc_out = gaussian_head_grad(
        d_z + d_q_mean / batch,
        d_z * noise * 0.5 * std + d_q_log_var / batch,
        enc_out,
    )
    d_prior_out = gaussian_head_grad(d_p_mean / batch, d_p_log_var / batch, prior_out)
    enc_grads, _ = mlp_backward(model.encoder_net, enc_cache, d_enc_out)
    prior_grads, _ = mlp_backward(model.prior_net, prior_cache, d_prior_out)

    grads = {}
    grads.update(model.prior_net.named_gradients(prior_grads, "prior."))
    grads.update(model.encoder_net.named_gradients(enc_grads, "encoder."))
    grads.update(model.decoder_net.named_gradients(dec_grads, "decoder."))
    components = {"recon": float(np.mean(recon)), "kl": float(np.mean(kl))}
    return loss, grads, z, components


def posterior_means(model, exposure, proxies):
    """Posterior means of q(Z|A,W), one row per user."""
    return ivae_encode(model, exposure, proxies).mean
