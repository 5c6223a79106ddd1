# CONSTANT VALUES

DEFAULT_D_MF = 32
EMBEDDING_INIT_STD = 0.01

HEAD_INIT_NORMAL = "normal"
HEAD_INIT_ZERO = "zero"

SCORE_EXPORT_COLUMNS = ["user", "item", "score"]
