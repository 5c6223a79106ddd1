import json

import numpy as np
import pandas as pd

from Metrics.globals import DEFAULT_K, INFERENCE_FIELD, INFERENCE_LABEL
from Metrics.stats import paired_t_test
from exceptions import ConfigurationError

METRIC_NAMES = ["ndcg", "recall"]


class MetricsReport:
    """Per-seed NDCG@k / Recall@k entries for one method on one dataset."""

    def __init__(self, method="", dataset="", k=DEFAULT_K, per_seed=None):
        self.method = method
        self.dataset = dataset
        self.k = k
        self.per_seed = list(per_seed or [])

    def add(self, seed, entry):
        row = {"seed": int(seed)}
        for name in METRIC_NAMES:
            value = float(entry[name])
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError("{} = {} outside [0, 1]".format(name, value))
            row[name] = value
        row["users_evaluated"] = int(entry.get("users_evaluated", 0))
        row["users_skipped"] = int(entry.get("users_skipped", 0))
        if INFERENCE_FIELD in entry:
            row[INFERENCE_FIELD] = float(entry[INFERENCE_FIELD])
        self.per_seed.append(row)
        self.per_seed.sort(key=lambda r: r["seed"])

    @property
    def seeds(self):
        return [row["seed"] for row in self.per_seed]

    def values(self, name):
        return np.array([row[name] for row in self.per_seed], dtype=np.float64)

    @property
    def mean(self):
        return dict((name, float(np.mean(self.values(name)))) for name in METRIC_NAMES)

    @property
    def std(self):
        ddof = 1 if len(self.per_seed) > 1 else 0
        return dict(
            (name, float(np.std(self.values(name), ddof=ddof))) for name in METRIC_NAMES
        )

    @property
    def inference_ms_per_sample(self):
        """Mean scoring time per pair, or None unless every seed recorded it."""
        if not self.per_seed or any(INFERENCE_FIELD not in row for row in self.per_seed):
            return None
        return float(np.mean(self.values(INFERENCE_FIELD)))

    @property
    def users_evaluated(self):
        return sum(row["users_evaluated"] for row in self.per_seed)

    @property
    def users_skipped(self):
        return sum(row["users_skipped"] for row in self.per_seed)

    def p_values_against(self, baseline):
        if self.seeds != baseline.seeds:
            raise ConfigurationError(
                "Seed sets differ between {} {} and {} {}".format(
                    self.method, self.seeds, baseline.method, baseline.seeds
                )
            )
        return dict(
            (name, paired_t_test(self.values(name), baseline.values(name)))
            for name in METRIC_NAMES
        )

    def to_dict(self, baseline=None):
        blob = {
            "method": self.method,
            "dataset": self.dataset,
            "k": self.k,
            "per_seed": self.per_seed,
            "mean": self.mean,
            "std": self.std,
            "users_evaluated": self.users_evaluated,
            "users_skipped": self.users_skipped,
        }
        if self.inference_ms_per_sample is not None:
            blob[INFERENCE_FIELD] = self.inference_ms_per_sample
        if baseline is not None:
            blob["p_value_vs_baseline"] = self.p_values_against(baseline)
        return blob

    def to_json(self, path, baseline=None):
        with open(path, "w") as fh:
            json.dump(self.to_dict(baseline), fh, indent=2, sort_keys=True)

    def to_csv(self, path, extra=None):
        frame = pd.DataFrame(self.per_seed)
        frame.insert(0, "method", self.method)
        for column, value in (extra or {}).items():
            frame[column] = value
        frame.to_csv(path, index=False)

    @classmethod
    def from_runs(cls, runs, dataset="", split="test"):
        """Collect run_method results (one per seed) for a single method."""
        runs = list(runs)
        if not runs:
            raise ConfigurationError("No runs to report")
        methods = set(run["method"] for run in runs)
        if len(methods) != 1:
            raise ConfigurationError("Runs mix methods: {}".format(sorted(methods)))
        report = cls(method=runs[0]["method"], dataset=dataset, k=runs[0][split]["k"])
        for run in runs:
            report.add(run["seed"], run[split])
        return report

    @classmethod
    def from_dict(cls, blob):
        return cls(
            method=blob.get("method", ""),
            dataset=blob.get("dataset", ""),
            k=blob.get("k", DEFAULT_K),
            per_seed=blob.get("per_seed", []),
        )


def report_table(reports, baseline=None):
    """Rows of mean ± std per method, with p-values against a baseline."""
    rows = []
    for report in reports:
        k = report.k
        row = {"method": report.method, "dataset": report.dataset, "seeds": len(report.per_seed)}
        for name in METRIC_NAMES:
            label = "{}@{}".format(name.upper(), k)
            row[label] = report.mean[name]
            row[label + " std"] = report.std[name]
            if baseline is not None and report is not baseline:
                row[label + " p"] = report.p_values_against(baseline)[name]
        if report.inference_ms_per_sample is not None:
            row[INFERENCE_LABEL] = report.inference_ms_per_sample
        rows.append(row)
    return pd.DataFrame(rows)


def render_markdown(table):
    lines = []
    metric_labels = [
        c for c in table.columns if "@" in c and not c.endswith((" std", " p"))
    ]
    has_p = any(c.endswith(" p") for c in table.columns)
    header = ["Method"] + metric_labels + (["p ({})".format(m) for m in metric_labels] if has_p else [])
    has_inference = INFERENCE_LABEL in table.columns
    if has_inference:
        header.append(INFERENCE_LABEL)
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    for _, row in table.iterrows():
        cells = [str(row["method"])]
        for label in metric_labels:
            cells.append("{:.4f} ± {:.4f}".format(row[label], row[label + " std"]))
        if has_p:
            for label in metric_labels:
                p = row.get(label + " p")
                cells.append("-" if p is None or pd.isna(p) else "{:.3g}".format(p))
        if has_inference:
            value = row[INFERENCE_LABEL]
            cells.append("-" if pd.isna(value) else "{:.4g}".format(value))
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
