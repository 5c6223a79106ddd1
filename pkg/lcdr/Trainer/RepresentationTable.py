import numpy as np

from exceptions import ConfigurationError, NumericalError


class RepresentationTable:
    """Per-user constrained representations Z_lc (posterior means), plus the
    iVAE means Z when they were extracted. Arrays are read-only."""

    def __init__(self, z_lc, z=None):
        self.z_lc = self._freeze(z_lc, "z_lc")
        self.z = self._freeze(z, "z") if z is not None else None
        if self.z is not None and self.z.shape[0] != self.z_lc.shape[0]:
            raise ConfigurationError("z and z_lc must cover the same users")

    @staticmethod
    def _freeze(array, name):
        array = np.array(array, dtype=np.float64, ndmin=2)
        if not np.all(np.isfinite(array)):
            raise NumericalError("Representation table {} has non-finite entries".format(name))
        array.setflags(write=False)
        return array

    @property
    def num_users(self):
        return self.z_lc.shape[0]

    @property
    def latent_dim(self):
        return self.z_lc.shape[1]

    def write_tsv(self, path, which="z_lc"):
        table = self.z_lc if which == "z_lc" else self.z
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for user, row in enumerate(table):
                fh.write("{}\t{}\n".format(user, ",".join(repr(float(x)) for x in row)))


def read_representation_tsv(path):
    rows = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            user, _, values = line.partition("\t")
            rows[int(user)] = [float(v) for v in values.split(",")]
    return np.array([rows[u] for u in range(len(rows))], dtype=np.float64)
