# CONSTANT VALUES

ORIGIN_BIASED = "biased"
ORIGIN_UNBIASED = "unbiased"
ORIGINS = set([ORIGIN_BIASED, ORIGIN_UNBIASED])

SPLIT_TRAIN = "train"
SPLIT_VAL = "val"
SPLIT_TEST = "test"
SPLITS = set([SPLIT_TRAIN, SPLIT_VAL, SPLIT_TEST])

FORMATS = set(["coat", "triples", "kuairand"])

VALUE_SCALE_RATING = "rating"
VALUE_SCALE_CLICK = "click"

# ratings >= 4 are positive on Coat and Yahoo!R3; KuaiRand uses is_click = 1
DEFAULT_RATING_THRESHOLD = 4.0
DEFAULT_VAL_FRACTION = 0.3

CANONICAL_COLUMNS = ["user", "item", "value", "origin", "split"]
CANONICAL_DATASET_FILE = "dataset.tsv"
CANONICAL_PROXIES_FILE = "proxies.tsv"
MANIFEST_FILE = "manifest.json"

# Coat raw layout: 290 x 300 rating matrices, 0 = unobserved
COAT_BIASED_FILE = "train.ascii"
COAT_UNBIASED_FILE = "test.ascii"
COAT_USER_FEATURE_FILES = [
    "user_item_features/user_features.ascii",
    "user_features.ascii",
]

# Yahoo!R3 ships 1-indexed "user item rating" triples
TRIPLES_BIASED_FILES = ["ydata-ymusic-rating-study-v1-train.txt", "train.txt"]
TRIPLES_UNBIASED_FILES = ["ydata-ymusic-rating-study-v1-test.txt", "test.txt"]
TRIPLES_USER_FEATURE_FILES = ["user_features.tsv"]
