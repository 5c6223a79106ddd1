# CONSTANT VALUES

LOG_DIR = "logs"
LOG_FORMAT = "%(asctime)s %(name)-12s %(lineno)-8s %(levelname)-8s %(message)s"
CONSOLE_FORMAT = "%(name)-12s: %(levelname)-8s %(message)s"
DATE_FORMAT = "%Y-%m-%d-%H-%M-%S"

CONFIG_SECTIONS = set(["data", "train", "recommender", "run", "synth"])

# run directory layout
CONFIG_SNAPSHOT = "config.snapshot"
CHECKPOINT_DIR = "checkpoints"
RUN_LOG_DIR = "logs"
METRICS_DIR = "metrics"
REPORT_FILE = "report.csv"
SEED_METRICS_FILE = "seed_{}.json"
SEED_CHECKPOINT_DIR = "seed_{}"
SEED_LOG_FILE = "seed_{}.jsonl"
SEED_DIAGNOSTICS_FILE = "seed_{}.diagnostics.json"
EVAL_FILE = "eval_{}.json"
SWEEP_FILE = "sweep.csv"
GROUND_TRUTH_FILE = "ground_truth.tsv"

IVAE_CHECKPOINT = "ivae.json"
LCVAE_CHECKPOINT = "lcvae.json"
RECOMMENDER_CHECKPOINT = "recommender.json"
FEATURES_FILE = "features.tsv"

SWEEP_PARAMS = set(["lambda"])
DEFAULT_THREADS = 1
