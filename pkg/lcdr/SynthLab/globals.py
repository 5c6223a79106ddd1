# CONSTANT VALUES

NUM_PROXY_CLASSES = 8
# class means are at least this many latent std devs apart
MIN_CLASS_SPREAD = 2.0

# independent generator streams, in this order
SYNTH_STREAMS = [
    "classes",
    "corruption",
    "latent",
    "exposure_weights",
    "exposure",
    "feedback_weights",
    "feedback",
    "unbiased",
]

CALIBRATION_BRACKET = (-50.0, 50.0)

# alignment scores are rounded here so a perfect fit reports exactly 1
ALIGNMENT_DECIMALS = 12
