"""End-to-end trials and the deterministic Monte Carlo runner."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .aoa import build_dictionary, estimate_aoa, refine_channel
from .channel import ChannelRealization, channel_vector, draw_channel_realization, steering_matrix
from .codebook import Codebook, assign_pilots, build_codebook, frame_geometry, synthesize_frame
from .config import Mode, SystemConfig, ebn0_to_noise_variance
from .metrics import TrialScore, ad_errors, aoa_terms, nmse_terms
from .ppce import regularized_solve, vandermonde
from .recovery import estimate_active_count, somp

__all__ = [
    "EstimationReport",
    "ResultRow",
    "ebn0_to_noise_variance",
    "run_monte_carlo",
    "run_trial",
    "trial_rng",
]


@dataclass
class EstimationReport:
    trial_index: int
    score: TrialScore
    noise_variance: float
    selected_gap: int | None
    num_chunks: int
    chunk_length: int
    observed_port_indices: tuple[tuple[int, ...], ...]
    true_support: list[int] = field(default_factory=list)
    detected_support: list[int] = field(default_factory=list)


def run_trial(
    cfg: SystemConfig,
    rng: np.random.Generator,
    trial_index: int = 0,
    *,
    realizations: Sequence[ChannelRealization] | None = None,
    codebook: Codebook | None = None,
    pilot_indices: Sequence[int] | None = None,
) -> EstimationReport:
    """Simulate and score one pilot frame.

    ``realizations``, ``codebook`` and ``pilot_indices`` replace the random
    draws when given, which pins a scenario for diagnostics.
    """
    if realizations is None:
        realizations = [draw_channel_realization(cfg, rng) for _ in range(cfg.num_devices)]
    if codebook is None:
        codebook = build_codebook(cfg.codebook_kind, cfg.pilot_length, cfg.pilot_bits, cfg.per_symbol_energy, rng)
    if pilot_indices is None:
        pilot_indices = assign_pilots(len(realizations), cfg.pilot_bits, cfg.collision_policy, rng)
    pilot_indices = [int(i) for i in pilot_indices]

    frame = synthesize_frame(cfg.mode, codebook, pilot_indices, realizations, cfg, rng)
    ka_est = estimate_active_count(frame, cfg)
    k_use = len(realizations) if cfg.ka_known else ka_est
    res = somp(frame.samples, codebook.matrix, k_use)

    geom, _ = frame_geometry(cfg)
    true_full = [channel_vector(r, geom) for r in realizations]
    owners: dict[int, list[int]] = {}
    for k, col in enumerate(pilot_indices):
        owners.setdefault(col, []).append(k)

    detected = [int(i) for i in res.support]
    missed, false_alarms = ad_errors(owners, detected)
    score = TrialScore(
        missed_detections=missed,
        false_alarms=false_alarms,
        ka_estimate=ka_est,
        num_active=len(owners),
    )

    obs_ports = np.sort(frame.port_order)
    est_dict = build_dictionary(obs_ports, geom.num_ports, geom.aperture_wavelengths, cfg.aoa_grid_size)
    full_ports = np.arange(1, geom.num_ports + 1)
    full_dict = build_dictionary(full_ports, geom.num_ports, geom.aperture_wavelengths, cfg.aoa_grid_size)
    num_paths = cfg.paths_per_device

    raw_true, raw_est, ref_true, ref_est, aoa_true, aoa_est = [], [], [], [], [], []
    for row, col in enumerate(detected):
        devices = owners.get(col)
        if not devices:
            continue
        g_true = sum(true_full[k] for k in devices)
        g_obs = frame.to_port_order(res.channel_estimates[row])
        raw_true.append(g_true[obs_ports - 1])
        raw_est.append(g_obs)

        est = estimate_aoa(g_obs, est_dict, num_paths)
        if cfg.mode is Mode.PPCE:
            aoas = realizations[devices[0]].aoas if cfg.oracle_aoa else est.aoas
            v = vandermonde(aoas, cfg.gap, len(obs_ports), cfg.num_ports, cfg.aperture_wavelengths)
            path_gains = regularized_solve(v, g_obs, cfg.gamma)
            refined = steering_matrix(geom.positions(), aoas) @ path_gains
        else:
            refined = refine_channel(full_dict, est)
        ref_true.append(g_true)
        ref_est.append(refined)

        if len(devices) == 1 and num_paths == cfg.num_scatterers + 1:
            aoa_true.append(realizations[devices[0]].aoas)
            aoa_est.append(est.aoas)

    score.num_matched = len(raw_true)
    if raw_true:
        score.ch_err, score.ch_ref = nmse_terms(raw_true, raw_est)
        score.refined_err, score.refined_ref = nmse_terms(ref_true, ref_est)
        score.channel_nmse = score.ch_err / score.ch_ref
        score.channel_nmse_refined = score.refined_err / score.refined_ref
    if aoa_true:
        score.aoa_err, score.aoa_ref = aoa_terms(aoa_true, aoa_est)
        score.aoa_nmse = score.aoa_err / score.aoa_ref

    return EstimationReport(
        trial_index=trial_index,
        score=score,
        noise_variance=frame.noise_variance,
        selected_gap=cfg.gap if cfg.mode is Mode.PPCE else None,
        num_chunks=frame.num_chunks,
        chunk_length=frame.chunk_length,
        observed_port_indices=frame.observed_port_indices,
        true_support=sorted(owners),
        detected_support=detected,
    )


def trial_rng(seed: int, sweep_index: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one (sweep point, trial) pair."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(sweep_index, trial_index)))


@dataclass
class ResultRow:
    """Aggregated scores at one sweep point; NMSEs are pooled ratio-of-sums."""

    mode: str
    ebn0_db: float
    trials: int
    excluded_trials: int
    sigma2: float
    ad_md_rate: float
    ad_fa_rate: float
    ka_est_mean: float
    ch_nmse: float
    ch_nmse_refined: float
    aoa_nmse: float
    gap: int | None
    gamma: float
    seed: int
    ch_nmse_se: float = math.nan
    ch_nmse_refined_se: float = math.nan
    aoa_nmse_se: float = math.nan
    ka_abs_err_mean: float = math.nan
    reports: list[EstimationReport] = field(default_factory=list, repr=False)

    CSV_COLUMNS = (
        "mode", "ebn0_db", "trials", "excluded_trials", "sigma2", "ad_md_rate", "ad_fa_rate",
        "ka_est_mean", "ch_nmse", "ch_nmse_refined", "aoa_nmse", "gap", "gamma", "seed",
    )

    def csv_values(self) -> list:
        return [getattr(self, c) for c in self.CSV_COLUMNS]


def _pooled_ratio(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    """Ratio of sums and its delta-method standard error."""
    if num.size == 0 or den.sum() <= 0:
        return math.nan, math.nan
    ratio = float(num.sum() / den.sum())
    n = num.size
    if n < 2:
        return ratio, math.nan
    resid = num - ratio * den
    se = math.sqrt(float(np.sum(resid**2)) / (n * (n - 1))) / float(den.mean())
    return ratio, se


def aggregate(cfg: SystemConfig, reports: Sequence[EstimationReport]) -> ResultRow:
    reports = sorted(reports, key=lambda r: r.trial_index)
    scores = [r.score for r in reports]
    active = sum(s.num_active for s in scores)
    kept = [s for s in scores if s.num_matched > 0]

    def pooled(err: str, ref: str) -> tuple[float, float]:
        return _pooled_ratio(
            np.array([getattr(s, err) for s in kept], dtype=float),
            np.array([getattr(s, ref) for s in kept], dtype=float),
        )

    ch, ch_se = pooled("ch_err", "ch_ref")
    refd, refd_se = pooled("refined_err", "refined_ref")
    with_aoa = [s for s in kept if s.aoa_ref > 0]
    aoa, aoa_se = _pooled_ratio(
        np.array([s.aoa_err for s in with_aoa], dtype=float),
        np.array([s.aoa_ref for s in with_aoa], dtype=float),
    )
    ka = np.array([s.ka_estimate for s in scores], dtype=float)
    ka_err = np.array([abs(s.ka_estimate - s.num_active) for s in scores], dtype=float)
    return ResultRow(
        mode=cfg.mode.value,
        ebn0_db=float(cfg.ebn0_db),
        trials=len(reports),
        excluded_trials=len(scores) - len(kept),
        sigma2=ebn0_to_noise_variance(cfg),
        ad_md_rate=sum(s.missed_detections for s in scores) / active if active else math.nan,
        ad_fa_rate=sum(s.false_alarms for s in scores) / active if active else math.nan,
        ka_est_mean=float(ka.mean()) if ka.size else math.nan,
        ch_nmse=ch,
        ch_nmse_refined=refd,
        aoa_nmse=aoa,
        gap=cfg.gap if cfg.mode is Mode.PPCE else None,
        gamma=float(cfg.gamma),
        seed=cfg.seed,
        ch_nmse_se=ch_se,
        ch_nmse_refined_se=refd_se,
        aoa_nmse_se=aoa_se,
        ka_abs_err_mean=float(ka_err.mean()) if ka_err.size else math.nan,
        reports=list(reports),
    )


def _run_task(task: tuple[SystemConfig, int, int]) -> EstimationReport:
    cfg, sweep_index, trial_index = task
    return run_trial(cfg, trial_rng(cfg.seed, sweep_index, trial_index), trial_index)


def run_monte_carlo(
    cfg: SystemConfig,
    sweep: Sequence[float],
    trials: int,
    parallelism: int = 1,
) -> list[ResultRow]:
    """Run ``trials`` trials at each E_b/N_0 in ``sweep``.

    Trial ``t`` at sweep point ``i`` draws from ``trial_rng(cfg.seed, i, t)``
    and aggregation runs in trial order, so results do not depend on
    ``parallelism``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    point_cfgs = [cfg.replace(ebn0_db=float(e)) for e in sweep]
    tasks = [(pc, i, t) for i, pc in enumerate(point_cfgs) for t in range(trials)]
    if parallelism == 1:
        reports = [_run_task(task) for task in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * parallelism))
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            reports = list(pool.map(_run_task, tasks, chunksize=chunk))
    return [aggregate(pc, reports[i * trials:(i + 1) * trials]) for i, pc in enumerate(point_cfgs)]
