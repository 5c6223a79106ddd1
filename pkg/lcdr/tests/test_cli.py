import json
import os

import numpy as np
import pandas as pd
import pytest

from Cli.cli import main
from Cli.commands import cmd_report, load_run
from Cli.helpers import load_stage_one, parse_seeds, parse_values, prepare_output_dir
from Cli.RunConfig import RunConfig, load_config_file
from DataIO.canonical import read_canonical
from DataIO.protocol import build_exposure
from Lcvae.LcvaeModel import posterior_means
from Trainer.RepresentationTable import read_representation_tsv
from exceptions import ConfigurationError, NumericalError, OutputConflictError

CONFIG = """\
train:
  latent_dim: 2
  hidden_dim: 8
  lr: 0.01
  epochs: 3
  batch_size: 32
  lambda: 0.9

recommender:
  d_mf: 4
  lr: 0.01
  epochs: 3
  batch_size: 128

run:
  seeds: [0, 1]
  k: 5

synth:
  num_items: 20
  unbiased_per_user: 5
"""


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with open("lcdr.yaml", "w") as fh:
        fh.write(CONFIG)
    assert main(["simulate", "--config", "lcdr.yaml", "--users", "60", "--seed", "0", "--out", "data"]) == 0
    return tmp_path


def train(method, out, *extra):
    return main(["train", "--config", "lcdr.yaml", "--data", "data", "--method", method, "--out", out] + list(extra))


class TestHelpers:
    @pytest.mark.parametrize("text, seeds", [("0-3", [0, 1, 2, 3]), ("0,2,4", [0, 2, 4]), ("7", [7]), ("0-1,5", [0, 1, 5])])
    def test_parse_seeds(self, text, seeds):
        assert parse_seeds(text) == seeds

    def test_bad_seed_list(self):
        with pytest.raises(ConfigurationError):
            parse_seeds("a-b")

    def test_parse_values(self):
        assert parse_values("0,0.1,0.9") == [0.0, 0.1, 0.9]

    def test_prepare_output_dir(self, tmp_path):
        target = str(tmp_path / "run")
        prepare_output_dir(target)
        open(os.path.join(target, "x"), "w").close()
        with pytest.raises(OutputConflictError):
            prepare_output_dir(target)
        prepare_output_dir(target, force=True)
        assert os.listdir(target) == []

    def test_unknown_config_section(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("training:\n  epochs: 3\n")
        with pytest.raises(ConfigurationError):
            load_config_file(str(path))

    def test_command_line_overrides_file(self):
        sections = {"train": {"lambda": 0.9}, "run": {"method": "mf", "seeds": [0, 1]}}
        config = RunConfig.from_sources(sections, {"lambda": 0.1, "seeds": [3], "method": None})
        assert config.train.lam == 0.1
        assert config.seeds == [3]
        assert config.method == "mf"

    def test_hash_ignores_run_seed(self):
        config = RunConfig(data="x")
        other = RunConfig(data="x", train=config.train.replace(seed=9))
        assert config.hash == other.hash


class TestSimulateAndIngest:
    def test_simulate_writes_canonical_files(self, workspace):
        for name in ("dataset.tsv", "proxies.tsv", "manifest.json", "ground_truth.tsv"):
            assert os.path.isfile(os.path.join("data", name))
        dataset, manifest = read_canonical("data")
        assert (dataset.num_users, dataset.num_items) == (60, 20)
        assert manifest["synth"]["num_users"] == 60
        assert "config_hash" in manifest

    def test_simulate_refuses_to_overwrite(self, workspace):
        assert main(["simulate", "--config", "lcdr.yaml", "--out", "data"]) == 4
        assert main(["simulate", "--config", "lcdr.yaml", "--users", "60", "--out", "data", "--force"]) == 0

    def test_ingest_is_deterministic(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        with open("ratings.txt", "w") as fh:
            fh.write("1 1 5\n1 2 2\n2 1 4\n1 3 5 unbiased\n2 2 1 unbiased\n2 3 4 unbiased\n")
        assert main(["ingest", "--format", "triples", "--input", "ratings.txt", "--out", "a"]) == 0
        assert main(["ingest", "--format", "triples", "--input", "ratings.txt", "--out", "b"]) == 0
        with open(os.path.join("a", "manifest.json")) as fh:
            first = json.load(fh)
        with open(os.path.join("b", "manifest.json")) as fh:
            second = json.load(fh)
        assert first["checksums"] == second["checksums"]
        assert first["counts"]["biased"] == 3

    def test_missing_input_is_exit_two(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["ingest", "--format", "coat", "--input", "nowhere", "--out", "c"]) == 2

    def test_missing_out(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["simulate"]) == 2


class TestTrainEvalReport:
    def test_train_writes_run_directory(self, workspace):
        assert train("lcdr", "run") == 0
        for seed in (0, 1):
            assert os.path.isfile(os.path.join("run", "metrics", "seed_{}.json".format(seed)))
            for name in ("ivae.json", "lcvae.json", "recommender.json", "features.tsv"):
                assert os.path.isfile(os.path.join("run", "checkpoints", "seed_{}".format(seed), name))
            with open(os.path.join("run", "logs", "seed_{}.jsonl".format(seed))) as fh:
                entries = [json.loads(line) for line in fh]
            assert [e["stage"] for e in entries] == ["one"] * 3 + ["two"] * 3
            with open(os.path.join("run", "metrics", "seed_{}.json".format(seed))) as fh:
                metrics = json.load(fh)
            assert metrics["inference_ms_per_sample"] > 0.0
            assert metrics["inference_ms_per_sample"] == metrics["test"]["inference_ms_per_sample"]
        report = pd.read_csv(os.path.join("run", "report.csv"))
        assert report["seed"].tolist() == [0, 1]
        assert (report["inference_ms_per_sample"] > 0.0).all()
        assert report["config_hash"].nunique() == 1
        assert os.path.isfile(os.path.join("run", "config.snapshot"))

    def test_existing_run_needs_force(self, workspace):
        assert train("mf", "run") == 0
        assert train("mf", "run") == 4
        assert train("mf", "run", "--force") == 0

    def test_missing_config_is_exit_two(self, workspace):
        assert main(["train", "--config", "nope.yaml", "--data", "data", "--out", "run"]) == 2

    def test_missing_dataset_is_exit_two(self, workspace):
        assert main(["train", "--config", "lcdr.yaml", "--data", "nodata", "--out", "run"]) == 2

    def test_eval_reproduces_training_scores(self, workspace):
        assert train("lcdr", "run") == 0
        assert main(["eval", "--run", "run"]) == 0
        with open(os.path.join("run", "metrics", "eval_test.json")) as fh:
            evaluated = json.load(fh)
        trained = load_run("run")
        assert [row["seed"] for row in evaluated["per_seed"]] == [0, 1]
        for row, expected in zip(evaluated["per_seed"], trained.values("ndcg")):
            assert row["ndcg"] == pytest.approx(expected, abs=1e-12)

    def test_stage_one_checkpoint_round_trip(self, workspace):
        assert train("lcdr", "run") == 0
        checkpoint_dir = os.path.join("run", "checkpoints", "seed_0")
        lcvae, config = load_stage_one(os.path.join(checkpoint_dir, "lcvae.json"))
        assert config["lambda"] == 0.9
        dataset, _ = read_canonical("data")
        means = posterior_means(lcvae, build_exposure(dataset))
        np.testing.assert_allclose(means, read_representation_tsv(os.path.join(checkpoint_dir, "features.tsv")), rtol=1e-12)
        ivae, _ = load_stage_one(os.path.join(checkpoint_dir, "ivae.json"))
        assert ivae.proxy_dim == dataset.proxy_width

    def test_report_against_baseline(self, workspace):
        assert train("lcdr", "run_lcdr") == 0
        assert train("mf", "run_mf") == 0
        code = main(["report", "--runs", "run_mf", "run_lcdr", "--baseline", "run_mf", "--out", "table.csv"])
        assert code == 0
        table = pd.read_csv("table.csv")
        assert table["method"].tolist() == ["mf", "lcdr"]
        assert "NDCG@5 p" in table.columns
        assert os.path.isfile("table.md")

    def test_identical_runs_have_p_one(self, workspace):
        assert train("mf", "run") == 0
        table, _ = cmd_report(["run", "run"], baseline_run="run")
        assert table.loc[1, "NDCG@5 p"] == 1.0

    def test_single_run_has_no_p_column(self, workspace):
        assert train("mf", "run") == 0
        table, markdown = cmd_report(["run"])
        assert not any(column.endswith(" p") for column in table.columns)
        assert "p (" not in markdown

    def test_report_rejects_different_seed_sets(self, workspace):
        assert train("mf", "run_a") == 0
        assert train("mf", "run_b", "--seeds", "0") == 0
        with pytest.raises(ConfigurationError) as info:
            cmd_report(["run_a", "run_b"], baseline_run="run_a")
        assert "run_b" in str(info.value)

    def test_numerical_abort_writes_diagnostics(self, workspace, monkeypatch):
        def diverge(*args, **kwargs):
            raise NumericalError("loss diverged", diagnostics={"epoch": 2, "batch": 0})

        monkeypatch.setattr("Cli.commands.run_method", diverge)
        assert train("lcdr", "run", "--seeds", "4") == 3
        with open(os.path.join("run", "logs", "seed_4.diagnostics.json")) as fh:
            diagnostics = json.load(fh)
        assert diagnostics["epoch"] == 2
        assert diagnostics["seed"] == 4

    def test_threads_give_the_same_metrics(self, workspace):
        assert train("mf", "serial") == 0
        assert train("mf", "parallel", "--threads", "2") == 0
        assert load_run("serial").values("ndcg").tolist() == load_run("parallel").values("ndcg").tolist()


class TestSweep:
    def test_one_row_per_value(self, workspace):
        code = main(
            ["sweep", "--config", "lcdr.yaml", "--data", "data", "--seeds", "0", "--values", "0,0.5", "--out", "sweep"]
        )
        assert code == 0
        table = pd.read_csv(os.path.join("sweep", "sweep.csv"))
        assert table["value"].tolist() == [0.0, 0.5]
        assert table["config_hash"].nunique() == 2

    def test_repeated_values_rejected(self, workspace):
        code = main(
            ["sweep", "--config", "lcdr.yaml", "--data", "data", "--values", "0.5,0.5", "--out", "sweep"]
        )
        assert code == 2
