import math

import pytest

from fasura.aoa import aoa_grid
from fasura.channel import ChannelRealization
from fasura.config import SystemConfig, ebn0_to_noise_variance
from fasura.sim import aggregate, run_monte_carlo, run_trial, trial_rng

from conftest import crandn

# Two grid-aligned paths whose dictionary support is certified for greedy recovery.
CERTIFIED_PAIR = [37, 62]


def noiseless_cfg(**kw):
    base = dict(
        num_devices=1, num_scatterers=1, total_pilot_duration=160, pilot_bits=4,
        codebook_kind="subsampled_dft", ebn0_db=math.inf, ka_known=True,
    )
    base.update(kw)
    return SystemConfig(**base)


def grid_aligned_device(rng, grid_size=100):
    return ChannelRealization.from_paths(crandn(rng, 2), aoa_grid(grid_size)[CERTIFIED_PAIR])


class TestNoiseVariance:
    @pytest.mark.parametrize("ebn0, expected", [(0.0, 20.0), (10.0, 2.0), (math.inf, 0.0)])
    def test_conversion(self, ebn0, expected):
        cfg = SystemConfig(pilot_bits=10, total_pilot_duration=200, per_symbol_energy=1.0, ebn0_db=ebn0)
        assert ebn0_to_noise_variance(cfg) == pytest.approx(expected, rel=1e-12)

    def test_default_setup(self):
        assert ebn0_to_noise_variance(SystemConfig()) == pytest.approx(25.0)


class TestRunTrial:
    @pytest.mark.parametrize("pattern", ["vicinity", "interval"])
    def test_noiseless_apce_exact(self, pattern, rng):
        cfg = noiseless_cfg(activation_pattern=pattern)
        rep = run_trial(cfg, rng, realizations=[grid_aligned_device(rng)])
        s = rep.score
        assert s.ad_error(cfg.ka_known) == 0 and s.false_alarms == 0
        assert s.channel_nmse < 1e-9
        assert s.channel_nmse_refined < 1e-9
        assert s.aoa_nmse == 0

    def test_noiseless_estimated_count(self, rng):
        # With orthogonal pilots and no noise the power-based count is exact
        # whenever the channel energy matches its average.
        cfg = noiseless_cfg(ka_known=False)
        reals = [ChannelRealization.from_paths([1.0, 0.0], aoa_grid(100)[CERTIFIED_PAIR])]
        rep = run_trial(cfg, rng, realizations=reals)
        assert rep.score.ka_estimate == 1
        assert rep.score.channel_nmse < 1e-9

    def test_noiseless_ppce_oracle_aoa_exact(self, rng):
        cfg = noiseless_cfg(mode="ppce", total_pilot_duration=16, gamma=0.0, oracle_aoa=True)
        rep = run_trial(cfg, rng, realizations=[grid_aligned_device(rng)])
        assert rep.score.channel_nmse < 1e-9
        assert rep.score.channel_nmse_refined < 1e-9
        assert rep.selected_gap == cfg.gap

    def test_empty_system(self, rng):
        cfg = SystemConfig(num_devices=0, ka_known=True)
        rep = run_trial(cfg, rng)
        assert rep.detected_support == [] and rep.true_support == []
        assert rep.score.channel_nmse is None and rep.score.aoa_nmse is None
        assert rep.score.num_matched == 0

    @pytest.mark.parametrize("mode", ["apce", "ppce", "ula"])
    def test_ka_known_detects_exactly_ka(self, mode):
        cfg = SystemConfig(mode=mode, ka_known=True)
        for t in range(10):
            rep = run_trial(cfg, trial_rng(5, 0, t), t)
            assert len(rep.detected_support) == cfg.num_devices
            assert rep.score.false_alarms == rep.score.missed_detections

    @pytest.mark.parametrize("mode, chunks, length", [("apce", 10, 20), ("ppce", 1, 200), ("ula", 1, 200)])
    def test_layout_metadata(self, mode, chunks, length):
        rep = run_trial(SystemConfig(mode=mode), trial_rng(0, 0, 0))
        assert (rep.num_chunks, rep.chunk_length) == (chunks, length)
        assert rep.noise_variance == pytest.approx(25.0)

    def test_same_stream_same_result(self):
        a = run_trial(SystemConfig(), trial_rng(9, 1, 2), 2)
        b = run_trial(SystemConfig(), trial_rng(9, 1, 2), 2)
        assert a == b


class TestMonteCarlo:
    def test_single_trial_row_equals_score(self):
        cfg = SystemConfig(seed=4)
        (row,) = run_monte_carlo(cfg, [0.0], 1)
        s = run_trial(cfg.replace(ebn0_db=0.0), trial_rng(4, 0, 0)).score
        assert row.trials == 1
        assert row.ch_nmse == pytest.approx(s.channel_nmse, rel=1e-12)
        assert row.ch_nmse_refined == pytest.approx(s.channel_nmse_refined, rel=1e-12)
        assert row.ka_est_mean == s.ka_estimate
        if s.aoa_nmse is not None:
            assert row.aoa_nmse == pytest.approx(s.aoa_nmse, rel=1e-12)

    def test_parallelism_independent(self):
        cfg = SystemConfig(mode="ppce", seed=11)
        serial = run_monte_carlo(cfg, [-5.0, 5.0], 6, parallelism=1)
        parallel = run_monte_carlo(cfg, [-5.0, 5.0], 6, parallelism=8)
        assert [r.csv_values() for r in serial] == [r.csv_values() for r in parallel]

    @pytest.mark.parametrize("ebn0", [-5.0, 0.0, 12.5])
    def test_sigma2_bookkeeping(self, ebn0):
        (row,) = run_monte_carlo(SystemConfig(), [ebn0], 2)
        assert row.sigma2 == ebn0_to_noise_variance(SystemConfig(ebn0_db=ebn0))

    def test_excluded_trials_reported(self):
        (row,) = run_monte_carlo(SystemConfig(num_devices=0, ka_known=True), [0.0], 3)
        assert row.excluded_trials == 3 and math.isnan(row.ch_nmse)

    def test_nmse_improves_with_snr(self):
        low, high = run_monte_carlo(SystemConfig(seed=2), [0.0, 10.0], 200)
        assert high.ch_nmse < low.ch_nmse

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            run_monte_carlo(SystemConfig(), [0.0], 0)
        with pytest.raises(ValueError):
            run_monte_carlo(SystemConfig(), [0.0], 1, parallelism=0)

    def test_aggregate_is_order_free(self):
        cfg = SystemConfig()
        reps = [run_trial(cfg, trial_rng(0, 0, t), t) for t in range(5)]
        assert aggregate(cfg, reps).csv_values() == aggregate(cfg, reps[::-1]).csv_values()
