import numpy as np
import numpy.testing as npt
import pytest

from asfdnn.data import (
    Dataset,
    encode_features,
    generate_dataset,
    grid_points,
    load_dataset,
    load_sigma_rows,
    save_dataset,
    save_sigma_rows,
)


class TestGenerateDataset:
    def test_exact_mode_features_are_scaled_moments(self):
        ds = generate_dataset(5, 16, snapshot_count=None, seed=0)
        assert ds.noise_power == 0.0
        feats = encode_features(ds.sigma)
        # first feature is sigma_0 / sigma_0 = 1, padding stays zero
        npt.assert_allclose(feats[:, 0], 1.0)
        npt.assert_allclose(feats[:, 31:], 0.0)
        row = ds.sigma[0] / ds.sigma[0, 0].real
        npt.assert_allclose(feats[0, :16], row.real, atol=1e-15)
        npt.assert_allclose(feats[0, 16:31], row[1:].imag, atol=1e-15)

    def test_deterministic(self):
        a = generate_dataset(4, 32, snapshot_count=64, seed=7)
        b = generate_dataset(4, 32, snapshot_count=64, seed=7)
        npt.assert_array_equal(a.sigma, b.sigma)
        npt.assert_array_equal(a.labels, b.labels)
        npt.assert_array_equal(a.k_values, b.k_values)

    def test_labels_unit_sum_nonnegative(self):
        ds = generate_dataset(20, 32, snapshot_count=None, seed=1)
        assert np.all(ds.labels >= 0)
        npt.assert_allclose(ds.labels.sum(axis=1), 1.0, atol=1e-9)

    def test_single_cluster_label_support(self):
        ds = generate_dataset(10, 32, snapshot_count=None, seed=2, k_choices=(1,))
        for label in ds.labels:
            nz = np.flatnonzero(label)
            width_cells = nz.max() - nz.min() + 1
            # widths <= 0.3 cover at most ceil(0.3/(2/128)) + 1 = 21 cells
            assert width_cells <= 21

    def test_cluster_count_matches_label_components(self):
        from asfdnn.metrics import connected_components

        ds = generate_dataset(30, 64, snapshot_count=None, seed=3)
        for label, k in zip(ds.labels, ds.k_values):
            assert connected_components(label) == k

    def test_rejects_oversized_feature_length(self):
        with pytest.raises(ValueError):
            generate_dataset(1, 65, snapshot_count=None, seed=0)

    def test_noisy_mode_perturbs_moments(self):
        exact = generate_dataset(3, 32, snapshot_count=None, seed=11)
        noisy = generate_dataset(3, 32, snapshot_count=64, snr_db=20.0, seed=11)
        assert not np.allclose(exact.sigma, noisy.sigma)
        # same scenarios, so labels agree
        npt.assert_array_equal(exact.labels, noisy.labels)


class TestEncodeFeatures:
    def test_scaling_invariance(self):
        rng = np.random.default_rng(0)
        sigma = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        sigma[0] = 2.0
        npt.assert_allclose(
            encode_features(sigma), encode_features(5.0 * sigma), atol=1e-14
        )

    def test_rejects_nonpositive_sigma0(self):
        with pytest.raises(ValueError):
            encode_features(np.array([0.0 + 0j, 1.0]))

    def test_rejects_too_long(self):
        with pytest.raises(ValueError):
            encode_features(np.ones(80, dtype=complex), grid_size=128)


class TestFiles:
    def test_dataset_round_trip_bit_exact(self, tmp_path):
        ds = generate_dataset(6, 16, snapshot_count=32, seed=4)
        save_dataset(ds, tmp_path / "ds")
        loaded = load_dataset(tmp_path / "ds")
        npt.assert_array_equal(loaded.sigma, ds.sigma)
        npt.assert_array_equal(loaded.labels, ds.labels)
        npt.assert_array_equal(loaded.k_values, ds.k_values)
        assert loaded.array_size == 16
        assert loaded.snapshot_count == 32
        assert loaded.noise_power == ds.noise_power

    def test_sigma_rows_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        sigma = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
        save_sigma_rows(sigma, {"M": 8, "T": 10, "N0": 0.1, "seed": 0}, tmp_path / "s.csv")
        loaded, meta = load_sigma_rows(tmp_path / "s.csv")
        npt.assert_array_equal(loaded, sigma)
        assert meta["rows"] == 3


class TestGridPoints:
    def test_matches_convention(self):
        pts = grid_points(4)
        npt.assert_allclose(pts, [-1.0, -0.5, 0.0, 0.5])
