"""Activity-detection and estimation-quality scores."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_MATCHED_PATHS = 6


@dataclass
class TrialScore:
    """Scores of one trial.

    NMSE fields are ``None`` when no device was correctly detected. The
    ``*_err`` / ``*_ref`` sums are the numerator and denominator behind each
    ratio, kept so trials can be pooled as ratio-of-sums.
    """

    missed_detections: int = 0
    false_alarms: int = 0
    channel_nmse: float | None = None
    channel_nmse_refined: float | None = None
    aoa_nmse: float | None = None
    ka_estimate: int = 0
    num_active: int = 0
    num_matched: int = 0
    ch_err: float = 0.0
    ch_ref: float = 0.0
    refined_err: float = 0.0
    refined_ref: float = 0.0
    aoa_err: float = 0.0
    aoa_ref: float = 0.0

    def ad_error(self, ka_known: bool) -> int:
        return self.missed_detections if ka_known else self.missed_detections + self.false_alarms


def ad_errors(true_support: Iterable[int], detected_support: Iterable[int], ka_known: bool = False) -> tuple[int, int]:
    """Missed detections and false alarms between two supports.

    ``ka_known`` does not change the counts; it only selects which of them the
    AD error metric adds up (see :meth:`TrialScore.ad_error`).
    """
    true_set = set(int(i) for i in true_support)
    det_set = set(int(i) for i in detected_support)
    return len(true_set - det_set), len(det_set - true_set)


def ad_error(true_support, detected_support, ka_known: bool) -> int:
    missed, false_alarms = ad_errors(true_support, detected_support)
    return missed if ka_known else missed + false_alarms


def nmse_terms(true_channels: Sequence[np.ndarray], est_channels: Sequence[np.ndarray]) -> tuple[float, float]:
    """(sum ||g - g_hat||^2, sum ||g||^2) over matched devices."""
    if len(true_channels) != len(est_channels):
        raise ValueError("need one estimate per true channel")
    err = ref = 0.0
    for g, g_hat in zip(true_channels, est_channels):
        g = np.asarray(g)
        g_hat = np.asarray(g_hat)
        if g.shape != g_hat.shape:
            raise ValueError(f"length mismatch: {g.shape} vs {g_hat.shape}")
        err += float(np.sum(np.abs(g - g_hat) ** 2))
        ref += float(np.sum(np.abs(g) ** 2))
    return err, ref


def channel_nmse(true_channels: Sequence[np.ndarray], est_channels: Sequence[np.ndarray]) -> float | None:
    """Ratio-of-sums NMSE; ``None`` for an empty match set."""
    if len(true_channels) == 0:
        return None
    err, ref = nmse_terms(true_channels, est_channels)
    return err / ref


def match_aoas(true_aoas: Sequence[float], est_aoas: Sequence[float]) -> np.ndarray:
    """Ordering of ``est_aoas`` minimizing total absolute error against ``true_aoas``."""
    t = np.asarray(true_aoas, dtype=float)
    e = np.asarray(est_aoas, dtype=float)
    if t.shape != e.shape:
        raise ValueError(f"AoA list length mismatch: {t.size} vs {e.size}")
    if t.size > MAX_MATCHED_PATHS:
        raise ValueError(f"exhaustive matching limited to {MAX_MATCHED_PATHS} paths")
    best, best_perm = np.inf, None
    for perm in itertools.permutations(range(t.size)):
        cost = np.abs(t - e[list(perm)]).sum()
        if cost < best:
            best, best_perm = cost, perm
    return np.asarray(best_perm if best_perm is not None else (), dtype=int)


def aoa_terms(true_aoas: Sequence[Sequence[float]], est_aoas: Sequence[Sequence[float]]) -> tuple[float, float]:
    if len(true_aoas) != len(est_aoas):
        raise ValueError("need one AoA list per device")
    err = ref = 0.0
    for t, e in zip(true_aoas, est_aoas):
        t = np.asarray(t, dtype=float)
        e = np.asarray(e, dtype=float)
        perm = match_aoas(t, e)
        err += float(np.abs(t - e[perm]).sum())
        ref += float(np.abs(t).sum())
    return err, ref


def aoa_nmse(true_aoas: Sequence[Sequence[float]], est_aoas: Sequence[Sequence[float]]) -> float | None:
    """Sum |theta - theta_hat| / sum |theta| after optimal per-device pairing."""
    if len(true_aoas) == 0:
        return None
    err, ref = aoa_terms(true_aoas, est_aoas)
    return err / ref
