# CONSTANT VALUES

DEFAULT_K = 5
# headline tables average these seeds
HEADLINE_SEEDS = list(range(10))
# reported when a zero-variance paired difference has a non-zero mean
DEGENERATE_P_VALUE = 0.0
# scoring wall time per evaluated (user, item) pair, in milliseconds
INFERENCE_FIELD = "inference_ms_per_sample"
INFERENCE_LABEL = "Inference ms/sample"
