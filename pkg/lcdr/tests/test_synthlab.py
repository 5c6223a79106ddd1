import numpy as np
import pytest

from DataIO.protocol import build_exposure
from SynthLab.GroundTruth import GroundTruth, write_ground_truth, read_ground_truth
from SynthLab.SynthConfig import SynthConfig
from SynthLab.synthlab import generate, alignment_score, calibrate_offset, class_means
from exceptions import CalibrationError, ConfigurationError, ParseError


def small_config(**changes):
    values = dict(num_users=300, num_items=40, unbiased_per_user=5, seed=11)
    values.update(changes)
    return SynthConfig(**values)


class TestGenerate:
    def test_same_seed_same_dataset(self):
        first, truth_a = generate(small_config())
        second, truth_b = generate(small_config())
        assert first.equals(second)
        np.testing.assert_array_equal(truth_a.z_true, truth_b.z_true)

    def test_different_seed_different_dataset(self):
        first, _ = generate(small_config())
        second, _ = generate(small_config(seed=12))
        assert not first.equals(second)

    def test_noise_free_proxies(self):
        dataset, truth = generate(small_config(proxy_noise=0.0))
        np.testing.assert_array_equal(truth.w_observed, truth.w_clean)
        np.testing.assert_array_equal(dataset.proxies, truth.w_observed)

    def test_latents_do_not_depend_on_proxy_noise(self):
        _, clean = generate(small_config(proxy_noise=0.0))
        _, noisy = generate(small_config(proxy_noise=0.5))
        np.testing.assert_array_equal(clean.z_true, noisy.z_true)
        np.testing.assert_array_equal(clean.w_clean, noisy.w_clean)

    def test_partial_noise_keeps_most_factors(self):
        _, truth = generate(small_config(num_users=2000, proxy_noise=0.25))
        kept = np.mean(truth.classes("observed") == truth.classes("clean"))
        # a resampled factor still lands on its own class 1/8 of the time
        assert kept == pytest.approx(0.75 + 0.25 / 8, abs=0.03)

    def test_full_noise_decorrelates_proxies(self):
        num_users = 2000
        _, truth = generate(small_config(num_users=num_users, proxy_noise=1.0))
        observed = truth.classes("observed")
        for dim in range(truth.z_true.shape[1]):
            corr = np.corrcoef(observed[:, dim], truth.z_true[:, dim])[0, 1]
            assert abs(corr) < 3.0 / np.sqrt(num_users)

    def test_clean_proxies_track_latents(self):
        _, truth = generate(small_config(num_users=1000))
        corr = np.corrcoef(truth.classes("clean")[:, 0], truth.z_true[:, 0])[0, 1]
        assert corr > 0.9

    def test_one_hot_layout(self):
        dataset, truth = generate(small_config())
        assert dataset.proxy_width == 2 * 8
        np.testing.assert_array_equal(dataset.proxies.reshape(300, 2, 8).sum(axis=2), 1.0)

    def test_exposure_hits_sparsity_target(self):
        dataset, _ = generate(small_config(num_users=1000, exposure_sparsity=0.1))
        assert build_exposure(dataset).mean() == pytest.approx(0.1, abs=0.01)

    def test_unbiased_records_per_user(self):
        dataset, _ = generate(small_config())
        counts = dataset.unbiased().groupby("user").size()
        assert (counts == 5).all()
        assert len(dataset.in_split("val")) == int(np.floor(0.3 * 1500 + 0.5))

    def test_class_means_are_spread(self):
        means = class_means(small_config())
        np.testing.assert_allclose(np.diff(means), 3.0 * 0.5)
        assert means.mean() == pytest.approx(0.0)

    def test_invalid_config(self):
        with pytest.raises(ConfigurationError):
            SynthConfig(proxy_noise=1.5)
        with pytest.raises(ConfigurationError):
            SynthConfig(class_spread=1.0)
        with pytest.raises(ConfigurationError):
            SynthConfig.from_dict({"users": 10})


class TestCalibration:
    def test_hits_target(self):
        logits = np.random.default_rng(42).normal(size=500)
        offset = calibrate_offset(logits, 0.2)
        assert np.mean(1.0 / (1.0 + np.exp(-(logits + offset)))) == pytest.approx(0.2, abs=1e-9)

    @pytest.mark.parametrize("target", [0.0, 1.0, 1.2])
    def test_unreachable_target(self, target):
        with pytest.raises(CalibrationError):
            calibrate_offset(np.zeros(10), target)

    def test_generate_reports_unreachable_sparsity(self):
        with pytest.raises(CalibrationError):
            generate(small_config(exposure_sparsity=1.0))


class TestAlignmentScore:
    def test_identity(self):
        z = np.random.default_rng(42).normal(size=(200, 2))
        assert alignment_score(z, z) == 1.0

    def test_scaled_and_shifted(self):
        z = np.random.default_rng(42).normal(size=(200, 2))
        assert alignment_score(2.0 * z + 3.0, z) == 1.0

    def test_invertible_linear_map(self):
        rng = np.random.default_rng(42)
        z = rng.normal(size=(200, 3))
        mixing = np.array([[1.0, 2.0, 0.0], [0.5, -1.0, 3.0], [0.0, 1.0, 1.0]])
        assert alignment_score(z @ mixing.T + rng.normal(size=3), z) == 1.0

    def test_independent_noise(self):
        rng = np.random.default_rng(42)
        assert alignment_score(rng.normal(size=(500, 2)), rng.normal(size=(500, 2))) < 0.1

    def test_rank_deficient_uses_pseudo_inverse(self, caplog):
        z = np.random.default_rng(42).normal(size=(100, 1))
        recovered = np.hstack([z, 2.0 * z])
        assert alignment_score(recovered, z) == pytest.approx(1.0)
        assert "rank deficient" in caplog.text

    def test_user_count_mismatch(self):
        with pytest.raises(ConfigurationError):
            alignment_score(np.zeros((3, 2)), np.zeros((4, 2)))

    def test_range(self):
        rng = np.random.default_rng(7)
        z = rng.normal(size=(50, 2))
        score = alignment_score(z[:, :1] + 0.5 * rng.normal(size=(50, 1)), z)
        assert 0.0 <= score <= 1.0


class TestGroundTruthFile:
    def test_round_trip(self, tmp_path):
        z = np.random.default_rng(42).normal(size=(6, 2))
        path = str(tmp_path / "ground_truth.tsv")
        write_ground_truth(GroundTruth(z), path)
        np.testing.assert_array_equal(read_ground_truth(path).z_true, z)

    def test_out_of_order_users(self, tmp_path):
        path = tmp_path / "ground_truth.tsv"
        path.write_text("0\t0.1,0.2\n2\t0.3,0.4\n")
        with pytest.raises(ParseError) as info:
            read_ground_truth(str(path))
        assert info.value.line_number == 2

    def test_malformed_vector(self, tmp_path):
        path = tmp_path / "ground_truth.tsv"
        path.write_text("0\t0.1,abc\n")
        with pytest.raises(ParseError):
            read_ground_truth(str(path))
