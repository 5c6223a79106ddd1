import numpy as np

from NumKernel.globals import ACTIVATIONS
from exceptions import ConfigurationError


class MlpParams:
    """Feed-forward network as an ordered list of (weight, bias, activation).

    weight has shape (out, in), so a layer computes act(x @ weight.T + bias).
    """

    def __init__(self, layers=None):
        self.layers = []
        for weight, bias, activation in layers or []:
            self.add_layer(weight, bias, activation)

    def add_layer(self, weight, bias, activation):
        weight = np.array(weight, dtype=np.float64, ndmin=2)
        bias = np.array(bias, dtype=np.float64, ndmin=1)
        if activation not in ACTIVATIONS:
            raise ConfigurationError("Unknown activation: {}".format(activation))
        if bias.shape != (weight.shape[0],):
            raise ConfigurationError(
                "Bias shape {} does not match weight rows {}".format(
                    bias.shape, weight.shape[0]
                )
            )
        if self.layers and self.layers[-1][0].shape[0] != weight.shape[1]:
            raise ConfigurationError(
                "Layer {} expects {} inputs but previous layer emits {}".format(
                    len(self.layers), weight.shape[1], self.layers[-1][0].shape[0]
                )
            )
        self.layers.append((weight, bias, activation))

    @property
    def input_dim(self):
        return self.layers[0][0].shape[1]

    @property
    def output_dim(self):
        return self.layers[-1][0].shape[0]

    def named_parameters(self, prefix=""):
        # arrays are returned by reference so optimisers update in place
        params = {}
        for idx, (weight, bias, _) in enumerate(self.layers):
            params["{}{}.weight".format(prefix, idx)] = weight
            params["{}{}.bias".format(prefix, idx)] = bias
        return params

    def named_gradients(self, layer_grads, prefix=""):
        grads = {}
        for idx, (d_weight, d_bias) in enumerate(layer_grads):
            grads["{}{}.weight".format(prefix, idx)] = d_weight
            grads["{}{}.bias".format(prefix, idx)] = d_bias
        return grads

    def activations(self):
        return [activation for _, _, activation in self.layers]

    def copy(self):
        return MlpParams(
            [(w.copy(), b.copy(), act) for w, b, act in self.layers]
        )

    def __repr__(self):
        shapes = " -> ".join(
            "{}x{}:{}".format(w.shape[1], w.shape[0], act) for w, _, act in self.layers
        )
        return "MlpParams({})".format(shapes)
