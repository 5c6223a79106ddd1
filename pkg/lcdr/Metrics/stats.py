import numpy as np
from scipy import stats

from Metrics.globals import DEGENERATE_P_VALUE
from exceptions import ConfigurationError


def paired_t_test(runs_a, runs_b):
    """Two-sided paired t-test p-value over per-seed values."""
    runs_a = np.asarray(runs_a, dtype=np.float64)
    runs_b = np.asarray(runs_b, dtype=np.float64)
    if runs_a.shape != runs_b.shape or runs_a.ndim != 1:
        raise ConfigurationError("paired_t_test needs two equal-length 1-D samples")
    if runs_a.size < 2:
        raise ConfigurationError("paired_t_test needs at least 2 pairs")
    diffs = runs_a - runs_b
    if np.all(diffs == diffs[0]):
        # zero variance: no evidence if the shift is zero, certainty otherwise
        return 1.0 if diffs[0] == 0 else DEGENERATE_P_VALUE
    return float(stats.ttest_rel(runs_a, runs_b).pvalue)
