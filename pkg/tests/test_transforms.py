"""Mel filterbank, DCT, PCA, wavelet packet tree, and Teager energy."""

import numpy as np
import pytest

from spoofguard.transforms import (
    WaveletPacketTree,
    apply_dct,
    build_mel_filterbank,
    hz_to_mel,
    mel_band_weights,
    mel_to_hz,
    pca_apply,
    pca_fit,
    tke,
    wpt_decompose,
    wpt_decompose_batch,
    wpt_reconstruct,
)


class TestMelScale:
    def test_known_value(self):
        assert hz_to_mel(700.0) == pytest.approx(2595.0 * np.log10(2.0))

    def test_zero_maps_to_zero(self):
        assert hz_to_mel(0.0) == 0.0
        assert mel_to_hz(0.0) == 0.0

    def test_round_trip(self):
        f = np.linspace(0, 8000, 123)
        np.testing.assert_allclose(mel_to_hz(hz_to_mel(f)), f, atol=1e-9)

    def test_monotone(self):
        m = hz_to_mel(np.linspace(0, 8000, 1000))
        assert np.all(np.diff(m) > 0)


class TestMelBandWeights:
    def test_triangle_vertices(self):
        """Weight is 1 at each band center and 0 at its outer boundaries."""
        n = 24
        bounds = mel_to_hz(np.linspace(0, hz_to_mel(8000.0), n + 2))
        w_at_centers = mel_band_weights(n, bounds[1:-1], 8000.0)
        np.testing.assert_allclose(np.diag(w_at_centers), 1.0, atol=1e-12)
        w_at_bounds = mel_band_weights(n, bounds, 8000.0)
        for b in range(n):
            assert w_at_bounds[b, b] == pytest.approx(0.0, abs=1e-12)
            assert w_at_bounds[b, b + 2] == pytest.approx(0.0, abs=1e-12)

    def test_boundaries_equally_spaced_in_mel(self):
        """Nonzero support of band b spans mel boundaries [b, b+2]."""
        n = 24
        bounds = mel_to_hz(np.linspace(0, hz_to_mel(8000.0), n + 2))
        grid = np.linspace(1.0, 7999.0, 4001)
        w = mel_band_weights(n, grid, 8000.0)
        for b in range(n):
            nz = grid[w[b] > 1e-9]
            assert nz.min() >= bounds[b] - 2.5
            assert nz.max() <= bounds[b + 2] + 2.5

    def test_values_bounded(self):
        w = mel_band_weights(24, np.linspace(0, 8000, 500), 8000.0)
        assert np.all(w >= 0.0) and np.all(w <= 1.0 + 1e-12)


class TestBuildMelFilterbank:
    def test_shape_and_support(self):
        fb = build_mel_filterbank()
        assert fb.weights.shape == (24, 129)
        assert fb.n_filters == 24
        assert np.all(fb.weights.sum(axis=1) > 0)

    def test_center_freqs_are_interior_boundaries(self):
        fb = build_mel_filterbank()
        bounds = mel_to_hz(np.linspace(0, hz_to_mel(8000.0), 26))
        np.testing.assert_allclose(fb.center_freqs, bounds[1:-1], atol=1e-9)

    def test_too_few_bins_rejected(self):
        """With almost no bins some triangles would have empty support."""
        with pytest.raises(ValueError):
            build_mel_filterbank(n_filters=24, n_bins=12, f_max=8000.0)


class TestDct:
    def test_gram_matrix_is_identity(self):
        g = apply_dct(np.eye(32))
        np.testing.assert_allclose(g @ g.T, np.eye(32), atol=1e-10)

    def test_matches_cosine_sum_oracle(self):
        """Orthonormal type-II DCT assembled from its defining sum."""
        rng = np.random.default_rng(0)
        x = rng.standard_normal(24)
        n = 24
        expect = np.empty(n)
        for k in range(n):
            s = np.sum(x * np.cos(np.pi * k * (2 * np.arange(n) + 1) / (2 * n)))
            scale = np.sqrt(1.0 / n) if k == 0 else np.sqrt(2.0 / n)
            expect[k] = scale * s
        np.testing.assert_allclose(apply_dct(x), expect, atol=1e-12)

    def test_last_axis_on_matrices(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((5, 24))
        rows = np.stack([apply_dct(x[i]) for i in range(5)])
        np.testing.assert_allclose(apply_dct(x), rows, atol=1e-12)


class TestPca:
    def test_matches_eigendecomposition_oracle(self):
        """SVD route equals brute-force covariance eigenvectors."""
        rng = np.random.default_rng(2)
        data = rng.standard_normal((50, 8)) @ rng.standard_normal((8, 8))
        k = 5
        m = pca_fit(data, k)
        centered = data - data.mean(axis=0)
        cov = centered.T @ centered / (data.shape[0] - 1)
        evals, evecs = np.linalg.eigh(cov)
        evals, evecs = evals[::-1], evecs[:, ::-1]
        np.testing.assert_allclose(m.eigenvalues, evals[:k], rtol=1e-10)
        p_fit = m.basis @ m.basis.T
        p_eig = evecs[:, :k] @ evecs[:, :k].T
        assert np.abs(p_fit - p_eig).max() < 1e-8

    def test_projected_variance_equals_eigenvalues(self):
        rng = np.random.default_rng(3)
        data = rng.standard_normal((200, 6)) * np.array([5, 4, 3, 2, 1, 0.5])
        m = pca_fit(data, 4)
        z = pca_apply(m, data)
        np.testing.assert_allclose(z.var(axis=0, ddof=1), m.eigenvalues,
                                   rtol=1e-10)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-10)

    def test_sign_convention_deterministic(self):
        """First nonzero entry of every basis column is positive."""
        rng = np.random.default_rng(4)
        m = pca_fit(rng.standard_normal((40, 7)), 7)
        for j in range(7):
            col = m.basis[:, j]
            nz = col[np.abs(col) > 1e-12]
            assert nz[0] > 0

    def test_apply_matches_direct_formula(self):
        rng = np.random.default_rng(5)
        data = rng.standard_normal((30, 5))
        m = pca_fit(data, 3)
        x = rng.standard_normal((9, 5))
        np.testing.assert_allclose(pca_apply(m, x), (x - m.mean) @ m.basis,
                                   atol=1e-12)

    def test_vector_input(self):
        rng = np.random.default_rng(6)
        data = rng.standard_normal((30, 5))
        m = pca_fit(data, 3)
        v = rng.standard_normal(5)
        np.testing.assert_allclose(pca_apply(m, v),
                                   pca_apply(m, v[None, :])[0], atol=1e-12)

    def test_errors(self):
        rng = np.random.default_rng(7)
        with pytest.raises(ValueError):
            pca_fit(rng.standard_normal(10), 2)  # not 2-D
        with pytest.raises(ValueError):
            pca_fit(rng.standard_normal((1, 4)), 2)  # too few rows
        with pytest.raises(ValueError):
            pca_fit(rng.standard_normal((10, 4)), 5)  # k > dim
        bad = rng.standard_normal((10, 4))
        bad[3, 2] = np.nan
        with pytest.raises(ValueError):
            pca_fit(bad, 2)


class TestWaveletPacketTree:
    def test_filter_pair_orthonormality(self):
        """Scaling filter has sqrt(2) sum and shift-2 orthonormality,
        and the wavelet filter is its alternating-sign reverse."""
        t = WaveletPacketTree()
        h = t.low_pass
        assert h.sum() == pytest.approx(np.sqrt(2.0), abs=1e-12)
        for k in range(4):
            ip = np.sum(h[2 * k:] * h[:len(h) - 2 * k])
            np.testing.assert_allclose(ip, 1.0 if k == 0 else 0.0, atol=1e-12)
        g = t.high_pass
        np.testing.assert_allclose(
            g, [(-1.0) ** n * h[7 - n] for n in range(8)], atol=0)

    def test_leaf_order_is_permutation(self):
        t = WaveletPacketTree()
        assert sorted(t.leaf_order) == list(range(64))
        assert sorted(t.gather_map) == list(range(64))

    def test_energy_conservation(self):
        rng = np.random.default_rng(8)
        t = WaveletPacketTree()
        frames = rng.standard_normal((100, 256))
        leaves = wpt_decompose_batch(frames, t)
        assert leaves.shape == (100, 64, 4)
        e_in = np.sum(frames ** 2, axis=1)
        e_out = np.sum(leaves ** 2, axis=(1, 2))
        np.testing.assert_allclose(e_out, e_in, rtol=1e-10)

    def test_round_trip_reconstruction(self):
        rng = np.random.default_rng(9)
        t = WaveletPacketTree()
        frames = rng.standard_normal((20, 256))
        leaves = wpt_decompose_batch(frames, t)
        back = np.stack([wpt_reconstruct(leaves[i], t) for i in range(20)])
        np.testing.assert_allclose(back, frames, atol=1e-10)

    def test_single_frame_matches_batch(self):
        # Tolerance, not bit equality: the vectorized kernel's matmul may
        # block differently for batch sizes 1 and 3.
        rng = np.random.default_rng(10)
        t = WaveletPacketTree()
        frames = rng.standard_normal((3, 256))
        batch = wpt_decompose_batch(frames, t)
        for i in range(3):
            np.testing.assert_allclose(wpt_decompose(frames[i], t),
                                       batch[i], rtol=0, atol=1e-12)

    def test_leaves_ordered_by_frequency(self):
        """A tone centered in subband j concentrates energy at leaf j.

        With depth 6 over an 8 kHz bandwidth each leaf covers 125 Hz, so
        the tone at (j + 0.5) * 125 Hz must put its strongest leaf at j
        (up to one neighbor for filter leakage at band edges)."""
        t = WaveletPacketTree()
        n = 256
        time = np.arange(n) / 16000.0
        hits = 0
        for j in range(4, 60, 5):
            f = (j + 0.5) * 125.0
            frame = np.sin(2 * np.pi * f * time)
            energy = (wpt_decompose(frame, t) ** 2).sum(axis=1)
            if abs(int(np.argmax(energy)) - j) <= 1:
                hits += 1
        assert hits == len(range(4, 60, 5))

    def test_low_and_high_split(self):
        """DC lands in leaf 0; Nyquist-adjacent energy lands in the top leaf."""
        t = WaveletPacketTree()
        dc = np.ones(256)
        e_dc = (wpt_decompose(dc, t) ** 2).sum(axis=1)
        assert np.argmax(e_dc) == 0
        nyq = np.cos(np.pi * np.arange(256))
        e_nyq = (wpt_decompose(nyq, t) ** 2).sum(axis=1)
        assert np.argmax(e_nyq) == 63

    def test_length_validation(self):
        t = WaveletPacketTree()
        with pytest.raises(ValueError):
            wpt_decompose(np.zeros(255), t)
        with pytest.raises(ValueError):
            wpt_decompose(np.zeros(32), t)  # < 2**depth


class TestTeagerEnergy:
    def test_constant_is_exactly_zero(self):
        out = tke(np.full(64, 3.7))
        assert out.shape == (62,)
        np.testing.assert_array_equal(out, 0.0)

    def test_ramp_is_exactly_squared_slope(self):
        n = np.arange(64, dtype=np.float64)
        np.testing.assert_array_equal(tke(2.0 * n + 5.0), 4.0)
        np.testing.assert_array_equal(tke(n), 1.0)

    def test_sinusoid_identity(self):
        """For s[t] = A sin(Omega t + phi) the operator returns
        A^2 sin^2(Omega) at every interior point."""
        a, omega = 0.7, 0.3
        t = np.arange(200)
        s = a * np.sin(omega * t + 1.1)
        np.testing.assert_allclose(tke(s), a * a * np.sin(omega) ** 2,
                                   atol=1e-9)

    def test_last_axis_semantics(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((5, 7, 16))
        out = tke(x)
        assert out.shape == (5, 7, 14)
        np.testing.assert_array_equal(out[2, 3], tke(x[2, 3]))

    def test_too_short(self):
        with pytest.raises(ValueError):
            tke(np.zeros(2))
