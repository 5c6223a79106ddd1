import numpy as np

from Recommender.globals import DEFAULT_D_MF, EMBEDDING_INIT_STD


class MfParams:
    """P_u^T Q_i + b_u + b_i + global bias."""

    def __init__(self, num_users, num_items, d_mf=DEFAULT_D_MF, rng=None, init_std=EMBEDDING_INIT_STD):
        if rng is None:
            self.P = np.zeros((num_users, d_mf))
            self.Q = np.zeros((num_items, d_mf))
        else:
            self.P = rng.normal(0.0, init_std, size=(num_users, d_mf))
            self.Q = rng.normal(0.0, init_std, size=(num_items, d_mf))
        self.b_u = np.zeros(num_users)
        self.b_i = np.zeros(num_items)
        # one-element array so optimiser updates stay in place
        self.global_bias = np.zeros(1)

    @property
    def num_users(self):
        return self.P.shape[0]

    @property
    def num_items(self):
        return self.Q.shape[0]

    def named_parameters(self):
        return {
            "P": self.P,
            "Q": self.Q,
            "b_u": self.b_u,
            "b_i": self.b_i,
            "global_bias": self.global_bias,
        }

    def copy(self):
        clone = MfParams(self.num_users, self.num_items, self.P.shape[1])
        for name, array in self.named_parameters().items():
            clone.named_parameters()[name][...] = array
        return clone


class ConfounderHead:
    """Bilinear confounder channel (H z_u)^T Qc_i over a per-user feature table."""

    def __init__(self, feature_dim, num_items, d_mf=DEFAULT_D_MF, rng=None, init_std=EMBEDDING_INIT_STD):
        if rng is None:
            self.H = np.zeros((d_mf, feature_dim))
            self.Qc = np.zeros((num_items, d_mf))
        else:
            self.H = rng.normal(0.0, init_std, size=(d_mf, feature_dim))
            self.Qc = rng.normal(0.0, init_std, size=(num_items, d_mf))

    @property
    def feature_dim(self):
        return self.H.shape[1]

    def named_parameters(self):
        return {"head.H": self.H, "head.Qc": self.Qc}

    def copy(self):
        clone = ConfounderHead(self.H.shape[1], self.Qc.shape[0], self.H.shape[0])
        clone.H[...] = self.H
        clone.Qc[...] = self.Qc
        return clone
