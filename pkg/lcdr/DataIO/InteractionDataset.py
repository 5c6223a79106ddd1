import numpy as np
import pandas as pd

from DataIO.globals import (
    ORIGIN_BIASED,
    ORIGIN_UNBIASED,
    SPLIT_TRAIN,
    DEFAULT_RATING_THRESHOLD,
    VALUE_SCALE_RATING,
)
from exceptions import ConfigurationError


class InteractionRecord:
    def __init__(self, user=0, item=0, value=0.0, label=0, origin=ORIGIN_BIASED, split=SPLIT_TRAIN):
        self.user = user
        self.item = item
        self.value = value
        self.label = label
        self.origin = origin
        self.split = split


class InteractionDataset:
    """User-item feedback records with origin/split tags and user proxies.

    records is a DataFrame with columns user, item, value, label, origin,
    split. proxies is a (num_users x width) array whose rows are the per-user
    proxy vectors W; proxy_columns names its columns.
    """

    def __init__(
        self,
        num_users=0,
        num_items=0,
        records=None,
        proxies=None,
        proxy_columns=None,
        rating_threshold=DEFAULT_RATING_THRESHOLD,
        value_scale=VALUE_SCALE_RATING,
        report=None,
    ):
        self.num_users = int(num_users)
        self.num_items = int(num_items)
        if records is None:
            records = pd.DataFrame(
                {
                    "user": pd.Series([], dtype=np.int64),
                    "item": pd.Series([], dtype=np.int64),
                    "value": pd.Series([], dtype=np.float64),
                    "label": pd.Series([], dtype=np.int64),
                    "origin": pd.Series([], dtype=object),
                    "split": pd.Series([], dtype=object),
                }
            )
        self.records = records.reset_index(drop=True)
        if proxies is None:
            proxies = np.zeros((self.num_users, 0))
        self.proxies = np.asarray(proxies, dtype=np.float64)
        self.proxy_columns = list(proxy_columns) if proxy_columns is not None else [
            "f{}".format(i) for i in range(self.proxies.shape[1])
        ]
        self.rating_threshold = rating_threshold
        self.value_scale = value_scale
        self.report = report or {"duplicates": 0, "unknown_categories": 0}
        self.validate()

    def validate(self):
        records = self.records
        if len(records) and (
            records["user"].min() < 0 or records["user"].max() >= self.num_users
        ):
            raise ConfigurationError(
                "User ids must lie in [0, {})".format(self.num_users)
            )
        if len(records) and (
            records["item"].min() < 0 or records["item"].max() >= self.num_items
        ):
            raise ConfigurationError(
                "Item ids must lie in [0, {})".format(self.num_items)
            )
        if self.proxies.shape[0] != self.num_users:
            raise ConfigurationError(
                "Proxy table has {} rows for {} users".format(
                    self.proxies.shape[0], self.num_users
                )
            )

    def copy(self, records=None):
        return InteractionDataset(
            num_users=self.num_users,
            num_items=self.num_items,
            records=self.records.copy() if records is None else records,
            proxies=self.proxies.copy(),
            proxy_columns=self.proxy_columns,
            rating_threshold=self.rating_threshold,
            value_scale=self.value_scale,
            report=dict(self.report),
        )

    @property
    def proxy_width(self):
        return self.proxies.shape[1]

    def biased(self):
        return self.records[self.records["origin"] == ORIGIN_BIASED]

    def unbiased(self):
        return self.records[self.records["origin"] == ORIGIN_UNBIASED]

    def in_split(self, split):
        return self.records[self.records["split"] == split]

    def iter_records(self):
        for row in self.records.itertuples(index=False):
            yield InteractionRecord(
                user=row.user,
                item=row.item,
                value=row.value,
                label=row.label,
                origin=row.origin,
                split=row.split,
            )

    def counts(self):
        counts = {
            "num_users": self.num_users,
            "num_items": self.num_items,
            "biased": int((self.records["origin"] == ORIGIN_BIASED).sum()),
            "unbiased": int((self.records["origin"] == ORIGIN_UNBIASED).sum()),
            "proxy_width": self.proxy_width,
        }
        for split, size in self.records["split"].value_counts().items():
            counts[split] = int(size)
        return counts

    def equals(self, other):
        return (
            self.num_users == other.num_users
            and self.num_items == other.num_items
            and self.records.reset_index(drop=True).equals(
                other.records.reset_index(drop=True)
            )
            and np.array_equal(self.proxies, other.proxies)
        )
