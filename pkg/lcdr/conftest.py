import sys
import os

# Packages are imported from the source root, as the scripts do
CURRENT_DIR = os.path.dirname(os.path.realpath(__file__))
if CURRENT_DIR not in sys.path:
    sys.path.insert(0, CURRENT_DIR)

import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run desk-scale reproduction tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale reproduction test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def build_toy_dataset(num_users=20, num_items=10, seed=0):
    """Two user groups with disjoint exposure halves; labels follow the group."""
    from DataIO.globals import ORIGIN_BIASED, ORIGIN_UNBIASED
    from DataIO.helpers import build_records
    from DataIO.InteractionDataset import InteractionDataset
    from DataIO.protocol import binarize, split

    rng = np.random.default_rng(seed)
    group = np.arange(num_users) % 2
    half = num_items // 2
    users, items, values, origins = [], [], [], []
    for u in range(num_users):
        own = np.arange(half) + half * group[u]
        shown = rng.choice(own, size=max(1, half - 1), replace=False)
        for i in shown:
            users.append(u)
            items.append(int(i))
            values.append(5.0 if rng.random() < 0.8 else 1.0)
            origins.append(ORIGIN_BIASED)
        for i in rng.choice(num_items, size=3, replace=False):
            users.append(u)
            items.append(int(i))
            values.append(5.0 if (i >= half) == bool(group[u]) else 1.0)
            origins.append(ORIGIN_UNBIASED)
    records, _ = build_records(users, items, values, origins)
    proxies = np.eye(2)[group]
    dataset = InteractionDataset(
        num_users=num_users,
        num_items=num_items,
        records=records,
        proxies=proxies,
        proxy_columns=["group=0", "group=1"],
    )
    return split(binarize(dataset), 0.3, seed)


@pytest.fixture
def toy_dataset():
    return build_toy_dataset()
