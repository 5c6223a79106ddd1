# CONSTANT VALUES

# decoder probabilities are clipped before taking logs
PROB_CLIP_EPS = 1e-7
PROB_CLIP_LOW = PROB_CLIP_EPS
PROB_CLIP_HIGH = 1.0 - PROB_CLIP_EPS

LOG_VAR_MIN = -10.0
LOG_VAR_MAX = 10.0

# smoothing under the square root of the alignment norm
NORM_SMOOTHING = 1e-12

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

FINITE_DIFF_EPS = 1e-4

ACTIVATIONS = set(["tanh", "sigmoid", "identity"])

CHECKPOINT_FORMAT_VERSION = 1
