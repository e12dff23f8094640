import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fasura.aoa import build_dictionary
from fasura.config import SystemConfig
from fasura.ppce import (
    candidate_gaps,
    gap_objective,
    gap_objective_curve,
    regularized_solve,
    select_gap,
    vandermonde,
)

from conftest import crandn
from oracles import frobenius_gap_objective, ridge_by_powell


def random_response(rng, n_obs=10, n_paths=4, gap=None):
    gap = gap or int(rng.integers(1, 11))
    return vandermonde(rng.uniform(0, np.pi, n_paths), gap, n_obs, 100, 4.5)


class TestVandermonde:
    def test_broadside_all_ones(self):
        v = vandermonde([np.pi / 2] * 4, 3, 10, 100, 4.5)
        np.testing.assert_allclose(v.matrix, np.ones((10, 4)), atol=1e-14)
        assert np.linalg.matrix_rank(v.matrix) == 1

    def test_first_row_ones(self, rng):
        for _ in range(10):
            v = random_response(rng)
            np.testing.assert_allclose(v.matrix[0], 1.0)
            np.testing.assert_allclose(np.abs(v.matrix), 1.0)

    def test_full_ports_match_dictionary(self, rng):
        d = build_dictionary(np.arange(1, 101), 100, 4.5, 100)
        idx = rng.choice(100, 4, replace=False)
        v = vandermonde(d.grid[idx], 1, 100, 100, 4.5)
        np.testing.assert_allclose(v.matrix, np.sqrt(100) * d.atoms[:, idx], atol=1e-12)

    def test_overflow_rejected(self):
        with pytest.raises(ValueError, match="overflow"):
            vandermonde([1.0, 2.0], 12, 10, 100, 4.5)

    def test_too_few_ports_rejected(self):
        with pytest.raises(ValueError):
            vandermonde([0.1, 0.2, 0.3, 0.4], 1, 3, 100, 4.5)


class TestRegularizedSolve:
    def test_identity_response(self):
        s = regularized_solve(np.eye(2), np.array([2.0, 0.0]), 1.0)
        np.testing.assert_allclose(s, [1.0, 0.0], atol=1e-14)

    def test_shrinkage_limit(self, rng):
        v = random_response(rng)
        g = crandn(rng, 10)
        gamma = 1e9
        s = regularized_solve(v, g, gamma)
        assert np.linalg.norm(s) <= np.linalg.norm(v.matrix.conj().T @ g) / gamma

    def test_matches_numerical_minimizer(self, rng):
        v = random_response(rng)
        g = crandn(rng, 10)
        np.testing.assert_allclose(regularized_solve(v, g, 1.0), ridge_by_powell(v.matrix, g, 1.0), atol=1e-8)

    def test_gamma_zero_is_least_squares(self, rng):
        v = random_response(rng, gap=10)
        g = crandn(rng, 10)
        ls = np.linalg.lstsq(v.matrix, g, rcond=None)[0]
        np.testing.assert_allclose(regularized_solve(v, g, 0.0), ls, atol=1e-9)

    def test_noiseless_gamma_zero_recovers_gains(self, rng):
        v = random_response(rng, gap=10)
        sigma = crandn(rng, 4)
        np.testing.assert_allclose(regularized_solve(v, v.matrix @ sigma, 0.0), sigma, atol=1e-9)

    def test_deviation_identity(self, rng):
        # sigma_hat - sigma = P (g_tilde - g) - gamma (W^H W + gamma I)^{-1} sigma
        v = random_response(rng, gap=8)
        w, gamma = v.matrix, 0.7
        sigma = crandn(rng, 4)
        noise = 0.3 * crandn(rng, 10)
        hat = regularized_solve(v, w @ sigma + noise, gamma)
        inv = np.linalg.inv(w.conj().T @ w + gamma * np.eye(4))
        expected = inv @ w.conj().T @ noise - gamma * inv @ sigma
        np.testing.assert_allclose(hat - sigma, expected, atol=1e-10)


class TestGapObjective:
    def test_single_broadside_path(self):
        v = vandermonde([np.pi / 2], 1, 10, 100, 4.5)
        assert gap_objective(v, 0.0) == pytest.approx(0.1, rel=1e-12)

    def test_large_gamma_limit(self, rng):
        v = random_response(rng)
        assert gap_objective(v, 1e12) < 1e-20

    def test_matches_frobenius_assembly(self, rng):
        for _ in range(20):
            v = random_response(rng)
            assert gap_objective(v, 1.0) == pytest.approx(frobenius_gap_objective(v.matrix, 1.0), rel=1e-10)

    def test_rank_deficient_gamma_zero_rejected(self):
        v = vandermonde([np.pi / 2] * 3, 2, 10, 100, 4.5)
        with pytest.raises(ValueError, match="rank"):
            gap_objective(v, 0.0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), gamma=st.floats(0.01, 10))
    def test_unitary_invariance(self, seed, gamma):
        rng = np.random.default_rng(seed)
        v = random_response(rng)
        q, _ = np.linalg.qr(crandn(rng, 10, 10))
        assert gap_objective(q @ v.matrix, gamma) == pytest.approx(gap_objective(v, gamma), rel=1e-9)

    def test_expected_noise_gain(self, rng):
        v = random_response(rng, gap=10)
        w, gamma, var = v.matrix, 1.0, 0.4
        p = np.linalg.solve(w.conj().T @ w + gamma * np.eye(4), w.conj().T)
        noise = np.sqrt(var) * crandn(rng, 10, 10_000)
        empirical = np.mean(np.sum(np.abs(p @ noise) ** 2, axis=0))
        assert empirical == pytest.approx(var * gap_objective(v, gamma), rel=0.02)


class TestGapSelection:
    def test_candidate_set(self):
        assert candidate_gaps(100, 10) == list(range(1, 11))

    def test_candidate_set_non_divisible(self):
        # floor((N-1)/(N_obs-1)) when M does not divide N
        assert candidate_gaps(95, 10) == list(range(1, 11))
        assert candidate_gaps(50, 7) == list(range(1, 9))

    def test_single_port_tie_breaks_to_one(self, rng):
        cfg = SystemConfig(mode="ppce", rf_chains=1, num_scatterers=0, gap=1)
        gaps, curve = gap_objective_curve(cfg, 1.0, 20, rng)
        np.testing.assert_allclose(curve, 0.25)
        assert select_gap(cfg, 1.0, 20, rng) == 1

    def test_curve_deterministic(self):
        cfg = SystemConfig(mode="ppce")
        a = gap_objective_curve(cfg, 1.0, 50, np.random.default_rng(3))
        b = gap_objective_curve(cfg, 1.0, 50, np.random.default_rng(3))
        assert a[0] == b[0]
        np.testing.assert_array_equal(a[1], b[1])

    @pytest.mark.parametrize("aperture", [4.5, 10.0])
    def test_reference_setup_curve_reported(self, aperture, capsys):
        cfg = SystemConfig(mode="ppce", aperture_wavelengths=aperture)
        gaps, curve = gap_objective_curve(cfg, 1.0, 1000, np.random.default_rng(0))
        best = select_gap(cfg, 1.0, 1000, np.random.default_rng(0))
        with capsys.disabled():
            print(f"\nW={aperture} gap objective (gamma=1):", " ".join(f"{g}:{c:.4f}" for g, c in zip(gaps, curve)))
            print(f"W={aperture} selected gap: {best}")
        assert gaps == list(range(1, 11))
        assert np.all(np.isfinite(curve)) and best in gaps
