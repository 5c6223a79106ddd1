import itertools
import json
import math
import time

import numpy as np
import pandas as pd
import pytest

from DataIO.globals import ORIGIN_UNBIASED, SPLIT_TEST
from DataIO.InteractionDataset import InteractionDataset
from Metrics.MetricsReport import MetricsReport, report_table, render_markdown
from Metrics.ranking import ndcg_at_k, recall_at_k, rank_items, evaluate
from Metrics.stats import paired_t_test
from exceptions import ConfigurationError, EvaluationError


def split_dataset(rows, num_items):
    """rows: (user, item, label) triples, all in the test split."""
    frame = pd.DataFrame(
        {
            "user": pd.Series([r[0] for r in rows], dtype=np.int64),
            "item": pd.Series([r[1] for r in rows], dtype=np.int64),
            "value": pd.Series([float(r[2]) for r in rows], dtype=np.float64),
            "label": pd.Series([r[2] for r in rows], dtype=np.int64),
            "origin": pd.Series([ORIGIN_UNBIASED] * len(rows), dtype=object),
            "split": pd.Series([SPLIT_TEST] * len(rows), dtype=object),
        }
    )
    num_users = max(r[0] for r in rows) + 1
    return InteractionDataset(num_users=num_users, num_items=num_items, records=frame)


def brute_force(ranking, relevant, k):
    dcg = sum(1.0 / math.log2(pos + 2) for pos, item in enumerate(ranking[:k]) if item in relevant)
    ideal = sum(1.0 / math.log2(pos + 2) for pos in range(min(k, len(relevant))))
    hits = len(set(ranking[:k]) & relevant)
    return dcg / ideal, hits / float(len(relevant))


class TestNdcg:
    def test_first_rank(self):
        assert ndcg_at_k([7, 1, 2], {7}, 5) == 1.0

    def test_third_rank(self):
        assert ndcg_at_k([1, 2, 7, 3, 4], {7}, 5) == pytest.approx(0.5)

    def test_two_relevant_on_top(self):
        assert ndcg_at_k([4, 9, 1], {4, 9}, 5) == pytest.approx(1.0)

    def test_empty_relevant(self):
        assert ndcg_at_k([1, 2], set(), 5) == 0.0

    def test_more_relevant_than_k(self):
        ranking = list(range(8))
        assert ndcg_at_k(ranking, set(range(7)), 5) == pytest.approx(1.0)
        assert recall_at_k(ranking, set(range(5)), 5) == 1.0

    def test_invalid_k(self):
        with pytest.raises(ConfigurationError):
            ndcg_at_k([1], {1}, 0)


class TestRecall:
    def test_all_in_top_k(self):
        assert recall_at_k([3, 1, 2, 5, 4], {1, 2}, 5) == 1.0

    def test_one_of_four(self):
        assert recall_at_k([1, 2, 3, 4, 5, 6, 7, 8], {3, 6, 7, 8}, 5) == 0.25

    def test_none_in_top_k(self):
        assert recall_at_k([1, 2, 3, 4, 5, 6], {6}, 5) == 0.0


class TestRankItems:
    def test_descending_with_item_tie_break(self):
        assert rank_items([5, 2, 9, 1], [0.3, 0.7, 0.3, 0.1]) == [2, 5, 9, 1]


class TestEvaluate:
    def test_perfect_model(self):
        rows = [(0, 0, 1), (0, 1, 0), (0, 2, 1), (1, 1, 1), (1, 3, 0)]
        dataset = split_dataset(rows, 4)
        labels = dict(((u, i), l) for u, i, l in rows)
        result = evaluate(
            lambda us, its: np.array([labels[(u, i)] for u, i in zip(us, its)], dtype=float),
            dataset,
            SPLIT_TEST,
            5,
        )
        assert result["ndcg"] == 1.0
        assert result["recall"] == 1.0

    def test_scoring_time_is_reported_per_pair(self):
        rows = [(u, i, int((u + i) % 2 == 0)) for u in range(4) for i in range(5)]
        dataset = split_dataset(rows, 5)
        calls = []

        def slow_scores(us, its):
            calls.append(len(us))
            time.sleep(0.02)
            return np.zeros(len(us))

        result = evaluate(slow_scores, dataset, SPLIT_TEST, 5)
        assert calls == [20]
        # 20 ms spread over 20 pairs
        assert result["inference_ms_per_sample"] >= 1.0

    def test_users_without_positives_skipped(self):
        dataset = split_dataset([(0, 0, 1), (1, 0, 0), (1, 1, 0), (2, 1, 1)], 2)
        result = evaluate(lambda us, its: np.zeros(len(us)), dataset, SPLIT_TEST, 5)
        assert result["users_evaluated"] == 2
        assert result["users_skipped"] == 1

    def test_one_positive_among_ten_over_every_position(self):
        rows = []
        for user in range(10):
            for item in range(10):
                rows.append((user, item, int(item == user)))
        dataset = split_dataset(rows, 10)
        # items ranked by id, so user u finds its positive at position u + 1
        score = lambda us, its: -its.astype(float)
        result = evaluate(score, dataset, SPLIT_TEST, 5)
        expected = np.mean([1.0 / math.log2(p + 1) if p <= 5 else 0.0 for p in range(1, 11)])
        assert result["ndcg"] == pytest.approx(expected, rel=1e-12)
        assert result["recall"] == pytest.approx(0.5)

    def test_empty_split(self):
        dataset = split_dataset([(0, 0, 1)], 1)
        with pytest.raises(EvaluationError):
            evaluate(lambda us, its: np.zeros(len(us)), dataset, "val", 5)

    def test_unknown_split(self):
        dataset = split_dataset([(0, 0, 1)], 1)
        with pytest.raises(ConfigurationError):
            evaluate(lambda us, its: np.zeros(len(us)), dataset, "holdout", 5)

    @pytest.mark.parametrize("n", range(1, 7))
    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_exhaustive_against_brute_force(self, n, k):
        patterns = [
            frozenset(s)
            for size in range(1, n + 1)
            for s in (itertools.combinations(range(n), size) if n <= 4 else [tuple(range(size))])
        ]
        rows, expected_ndcg, expected_recall = [], [], []
        user = 0
        for relevant in patterns:
            for ranking in itertools.permutations(range(n)):
                for position, item in enumerate(ranking):
                    rows.append((user, item, int(item in relevant), -position))
                ndcg, recall = brute_force(list(ranking), relevant, k)
                assert ndcg_at_k(list(ranking), relevant, k) == pytest.approx(ndcg, rel=1e-12)
                assert recall_at_k(list(ranking), relevant, k) == recall
                expected_ndcg.append(ndcg)
                expected_recall.append(recall)
                user += 1
        scores = dict(((u, i), s) for u, i, _, s in rows)
        dataset = split_dataset([r[:3] for r in rows], n)
        result = evaluate(
            lambda us, its: np.array([scores[(u, i)] for u, i in zip(us, its)], dtype=float),
            dataset,
            SPLIT_TEST,
            k,
        )
        assert result["users_evaluated"] == user
        assert result["ndcg"] == pytest.approx(np.mean(expected_ndcg), rel=1e-12)
        assert result["recall"] == pytest.approx(np.mean(expected_recall), rel=1e-12)


class TestPairedTTest:
    def test_identical_samples(self):
        assert paired_t_test([0.5, 0.6, 0.7], [0.5, 0.6, 0.7]) == 1.0

    def test_constant_positive_shift(self):
        assert paired_t_test([2.0, 3.0, 4.0, 5.0], [1.0, 2.0, 3.0, 4.0]) < 1e-12

    def test_textbook_sample(self):
        # differences 1..5: t = 3 / sqrt(2.5 / 5), four degrees of freedom
        a = [11.0, 13.0, 15.0, 17.0, 19.0]
        b = [10.0, 11.0, 12.0, 13.0, 14.0]
        t = 3.0 / math.sqrt(2.5 / 5.0)
        x = t / math.sqrt(1.0 + t * t / 4.0)
        cdf = 0.5 + 0.375 * x * (1.0 - (t * t / 4.0) / (3.0 * (1.0 + t * t / 4.0)))
        assert paired_t_test(a, b) == pytest.approx(2.0 * (1.0 - cdf), abs=1e-6)

    def test_symmetric_in_order(self):
        a, b = [0.61, 0.58, 0.60, 0.63], [0.55, 0.57, 0.52, 0.56]
        assert paired_t_test(a, b) == pytest.approx(paired_t_test(b, a))

    @pytest.mark.parametrize("a, b", [([0.1], [0.2]), ([0.1, 0.2], [0.1])])
    def test_bad_samples(self, a, b):
        with pytest.raises(ConfigurationError):
            paired_t_test(a, b)


def sample_report(method, ndcgs, recalls, seeds=None):
    report = MetricsReport(method=method, dataset="coat", k=5)
    for seed, ndcg, recall in zip(seeds or range(len(ndcgs)), ndcgs, recalls):
        report.add(seed, {"ndcg": ndcg, "recall": recall, "users_evaluated": 10, "users_skipped": 1})
    return report


class TestMetricsReport:
    def test_mean_and_std(self):
        report = sample_report("lcdr", [0.5, 0.7], [0.4, 0.6])
        assert report.mean["ndcg"] == pytest.approx(0.6)
        assert report.std["ndcg"] == pytest.approx(math.sqrt(0.02))
        assert report.users_evaluated == 20
        assert report.users_skipped == 2

    def test_inference_time_is_averaged_over_seeds(self):
        report = MetricsReport(method="lcdr", dataset="coat", k=5)
        for seed, ms in ((0, 0.02), (1, 0.04)):
            report.add(seed, {"ndcg": 0.5, "recall": 0.5, "inference_ms_per_sample": ms})
        assert report.inference_ms_per_sample == pytest.approx(0.03)
        assert report.to_dict()["inference_ms_per_sample"] == pytest.approx(0.03)
        assert sample_report("mf", [0.5], [0.5]).inference_ms_per_sample is None

    def test_seeds_sorted(self):
        report = sample_report("lcdr", [0.5, 0.7, 0.6], [0.4, 0.6, 0.5], seeds=[2, 0, 1])
        assert report.seeds == [0, 1, 2]

    def test_out_of_range_metric(self):
        with pytest.raises(ConfigurationError):
            sample_report("lcdr", [1.2], [0.4])

    def test_json_layout(self, tmp_path):
        lcdr = sample_report("lcdr", [0.6, 0.62, 0.59], [0.58, 0.6, 0.57])
        mf = sample_report("mf", [0.55, 0.53, 0.56], [0.5, 0.52, 0.49])
        path = str(tmp_path / "report.json")
        lcdr.to_json(path, baseline=mf)
        with open(path) as fh:
            blob = json.load(fh)
        assert set(["method", "dataset", "k", "per_seed", "mean", "std", "p_value_vs_baseline"]) <= set(blob)
        assert MetricsReport.from_dict(blob).values("ndcg").tolist() == [0.6, 0.62, 0.59]

    def test_csv_mirror(self, tmp_path):
        path = str(tmp_path / "report.csv")
        sample_report("lcdr", [0.5, 0.7], [0.4, 0.6]).to_csv(path, extra={"config_hash": "abc"})
        frame = pd.read_csv(path)
        assert frame["method"].tolist() == ["lcdr", "lcdr"]
        assert frame["config_hash"].tolist() == ["abc", "abc"]

    def test_mismatched_seeds(self):
        with pytest.raises(ConfigurationError):
            sample_report("a", [0.5, 0.6], [0.5, 0.6]).p_values_against(
                sample_report("b", [0.5, 0.6], [0.5, 0.6], seeds=[3, 4])
            )

    def test_from_runs(self):
        runs = [
            {"method": "mf", "seed": s, "test": {"ndcg": 0.5, "recall": 0.4, "k": 5}, "val": {}}
            for s in (1, 0)
        ]
        report = MetricsReport.from_runs(runs, dataset="coat")
        assert report.seeds == [0, 1]
        assert report.k == 5

    def test_from_runs_rejects_mixed_methods(self):
        runs = [
            {"method": m, "seed": 0, "test": {"ndcg": 0.5, "recall": 0.4, "k": 5}}
            for m in ("mf", "lcdr")
        ]
        with pytest.raises(ConfigurationError):
            MetricsReport.from_runs(runs)
        with pytest.raises(ConfigurationError):
            MetricsReport.from_runs([])


class TestReportTable:
    def test_p_values_against_baseline(self):
        lcdr = sample_report("lcdr", [0.60, 0.61, 0.60], [0.58, 0.6, 0.57])
        mf = sample_report("mf", [0.55, 0.56, 0.56], [0.5, 0.52, 0.49])
        table = report_table([mf, lcdr], baseline=mf)
        assert pd.isna(table.loc[0, "NDCG@5 p"])
        assert table.loc[1, "NDCG@5 p"] < 0.05

    def test_identical_runs_have_p_one(self):
        first = sample_report("mf", [0.55, 0.53, 0.56], [0.5, 0.52, 0.49])
        second = sample_report("mf", [0.55, 0.53, 0.56], [0.5, 0.52, 0.49])
        table = report_table([second], baseline=first)
        assert table.loc[0, "NDCG@5 p"] == 1.0

    def test_markdown_without_baseline(self):
        markdown = render_markdown(report_table([sample_report("lcdr", [0.5, 0.7], [0.4, 0.6])]))
        lines = markdown.strip().splitlines()
        assert lines[0] == "| Method | NDCG@5 | RECALL@5 |"
        assert lines[2] == "| lcdr | 0.6000 ± 0.1414 | 0.5000 ± 0.1414 |"

    def test_markdown_with_baseline(self):
        lcdr = sample_report("lcdr", [0.6, 0.62, 0.59], [0.58, 0.6, 0.57])
        mf = sample_report("mf", [0.55, 0.53, 0.56], [0.5, 0.52, 0.49])
        lines = render_markdown(report_table([mf, lcdr], baseline=mf)).strip().splitlines()
        assert lines[0].endswith("| p (NDCG@5) | p (RECALL@5) |")
        assert lines[2].endswith("| - | - |")

    def test_inference_column(self):
        report = MetricsReport(method="lcdr", dataset="coat", k=5)
        report.add(0, {"ndcg": 0.5, "recall": 0.4, "inference_ms_per_sample": 0.0125})
        table = report_table([report])
        assert table.loc[0, "Inference ms/sample"] == pytest.approx(0.0125)
        lines = render_markdown(table).strip().splitlines()
        assert lines[0] == "| Method | NDCG@5 | RECALL@5 | Inference ms/sample |"
        assert lines[2].endswith("| 0.0125 |")
        assert "Inference ms/sample" not in report_table([sample_report("mf", [0.5], [0.5])]).columns
