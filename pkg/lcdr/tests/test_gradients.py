"""Analytic gradients of every training loss against central differences."""

import numpy as np
import pytest

from Ivae.IvaeModel import IvaeModel, ivae_elbo, ivae_loss_and_grads
from Lcvae.LcvaeModel import LcvaeModel, lcvae_loss, lcvae_loss_and_grads
from NumKernel.helpers import finite_diff_grad, sigmoid
from Recommender.MfParams import MfParams, ConfounderHead
from Recommender.recommender import lcdr_score, loss_and_grads

NUM_CONFIGS = 100
RTOL = 1e-4
ATOL = 1e-6


def _random_shape(rng):
    return {
        "items": int(rng.integers(2, 7)),
        "proxies": int(rng.integers(1, 4)),
        "latent": int(rng.integers(1, 4)),
        "hidden": int(rng.integers(2, 6)),
        "batch": int(rng.integers(1, 5)),
    }


def _assert_grads_close(analytic, numeric):
    assert set(analytic) == set(numeric)
    for name in numeric:
        np.testing.assert_allclose(analytic[name], numeric[name], rtol=RTOL, atol=ATOL, err_msg=name)


class TestIvaeGradients:
    @pytest.mark.parametrize("config_seed", range(NUM_CONFIGS))
    def test_matches_finite_differences(self, config_seed):
        rng = np.random.default_rng(config_seed)
        shape = _random_shape(rng)
        model = IvaeModel(
            shape["items"], shape["proxies"], latent_dim=shape["latent"], hidden_dim=shape["hidden"], rng=rng
        )
        a = (rng.random((shape["batch"], shape["items"])) < 0.4).astype(float)
        w = (rng.random((shape["batch"], shape["proxies"])) < 0.5).astype(float)
        noise = rng.standard_normal((shape["batch"], shape["latent"]))

        _, analytic, _, _ = ivae_loss_and_grads(model, a, w, noise)
        numeric = finite_diff_grad(
            lambda _: float(np.mean(-ivae_elbo(model, a, w, noise))), model.named_parameters()
        )
        _assert_grads_close(analytic, numeric)


class TestLcvaeGradients:
    @pytest.mark.parametrize("config_seed", range(NUM_CONFIGS))
    def test_matches_finite_differences(self, config_seed):
        rng = np.random.default_rng(1000 + config_seed)
        shape = _random_shape(rng)
        model = LcvaeModel(shape["items"], latent_dim=shape["latent"], hidden_dim=shape["hidden"], rng=rng)
        a = (rng.random((shape["batch"], shape["items"])) < 0.4).astype(float)
        z = rng.normal(size=(shape["batch"], shape["latent"]))
        noise = rng.standard_normal((shape["batch"], shape["latent"]))
        lam = float(rng.choice([0.0, 0.1, 0.9, 1.5]))

        _, analytic, _, _ = lcvae_loss_and_grads(model, a, z, lam, noise)
        numeric = finite_diff_grad(
            lambda _: float(np.mean(lcvae_loss(model, a, z, lam, noise))), model.named_parameters()
        )
        _assert_grads_close(analytic, numeric)

    def test_no_gradient_reaches_the_ivae(self):
        rng = np.random.default_rng(42)
        ivae = IvaeModel(5, 2, latent_dim=2, hidden_dim=3, rng=rng)
        lcvae = LcvaeModel(5, latent_dim=2, hidden_dim=3, rng=rng)
        a = (rng.random((4, 5)) < 0.5).astype(float)
        w = rng.random((4, 2))
        _, _, z, _ = ivae_loss_and_grads(ivae, a, w, rng.standard_normal((4, 2)))
        noise = rng.standard_normal((4, 2))

        _, grads, _, _ = lcvae_loss_and_grads(lcvae, a, z, 0.9, noise)
        assert set(grads) == set(lcvae.named_parameters())
        # z is a constant input: perturbing the iVAE leaves the constrained loss untouched
        numeric = finite_diff_grad(
            lambda _: float(np.mean(lcvae_loss(lcvae, a, z, 0.9, noise))), ivae.named_parameters()
        )
        for grad in numeric.values():
            assert np.all(grad == 0.0)


class TestRecommenderGradients:
    @staticmethod
    def _reference_loss(params, head, features, users, items, labels):
        scores = np.array(
            [lcdr_score(params, head, u, i, features[u]) for u, i in zip(users, items)]
        )
        p = sigmoid(scores)
        return float(-np.mean(labels * np.log(p) + (1 - labels) * np.log(1 - p)))

    @pytest.mark.parametrize("config_seed", range(NUM_CONFIGS))
    def test_matches_finite_differences(self, config_seed):
        rng = np.random.default_rng(2000 + config_seed)
        num_users, num_items = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        d_mf, feature_dim = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        params = MfParams(num_users, num_items, d_mf, rng=rng, init_std=0.5)
        params.b_u[:] = rng.normal(size=num_users)
        params.b_i[:] = rng.normal(size=num_items)
        params.global_bias[0] = rng.normal()
        head = ConfounderHead(feature_dim, num_items, d_mf, rng=rng, init_std=0.5)
        features = rng.normal(size=(num_users, feature_dim))
        n = int(rng.integers(1, 8))
        users = rng.integers(0, num_users, size=n)
        items = rng.integers(0, num_items, size=n)
        labels = (rng.random(n) < 0.5).astype(float)

        _, analytic = loss_and_grads(params, head, features, users, items, labels)
        trainable = params.named_parameters()
        trainable.update(head.named_parameters())
        numeric = finite_diff_grad(
            lambda _: self._reference_loss(params, head, features, users, items, labels), trainable
        )
        _assert_grads_close(analytic, numeric)
