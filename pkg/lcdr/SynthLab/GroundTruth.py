import numpy as np
import pandas as pd

from exceptions import ParseError


class GroundTruth:
    """True confounders z_true with clean and corrupted one-hot proxies."""

    def __init__(self, z_true, w_clean=None, w_observed=None, num_classes=None):
        self.z_true = np.asarray(z_true, dtype=np.float64)
        self.w_clean = w_clean
        self.w_observed = w_observed
        self.num_classes = num_classes

    @property
    def num_users(self):
        return self.z_true.shape[0]

    def classes(self, which="observed"):
        """Per-factor class index of each user, from the one-hot proxies."""
        onehot = self.w_observed if which == "observed" else self.w_clean
        blocks = onehot.reshape(self.num_users, -1, self.num_classes)
        return blocks.argmax(axis=2)


def write_ground_truth(gt, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for user, row in enumerate(gt.z_true):
            fh.write("{}\t{}\n".format(user, ",".join(repr(float(x)) for x in row)))


def read_ground_truth(path):
    frame = pd.read_csv(path, sep="\t", header=None, names=["user", "z"], dtype={"z": str})
    rows = []
    for line_number, (user, values) in enumerate(frame.itertuples(index=False), start=1):
        if user != line_number - 1:
            raise ParseError(path, line_number, "users must be listed 0, 1, 2, ...")
        try:
            rows.append([float(v) for v in values.split(",")])
        except (ValueError, AttributeError):
            raise ParseError(path, line_number, "malformed latent vector")
    return GroundTruth(np.array(rows, dtype=np.float64))
