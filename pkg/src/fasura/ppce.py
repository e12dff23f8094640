"""Partial-ports estimation: Vandermonde responses, ridge path-gain estimator
and index-gap selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import SystemConfig


@dataclass(frozen=True)
class VandermondeResponse:
    matrix: np.ndarray
    gap: int
    aoas: np.ndarray


def vandermonde(
    aoas: Sequence[float],
    gap: int,
    num_observed: int,
    num_ports: int,
    aperture_wavelengths: float,
) -> VandermondeResponse:
    """Responses of ports 1, 1+gap, ... to each path angle.

    Row ``r`` (1-based), column ``j`` is
    ``exp(-j 2 pi (r-1) gap W cos(theta_j) / (N-1))``.
    """
    aoas = np.asarray(aoas, dtype=float).reshape(-1)
    if num_observed < len(aoas):
        raise ValueError(f"need at least {len(aoas)} observed ports, got {num_observed}")
    if gap < 1 or 1 + (num_observed - 1) * gap > num_ports:
        raise ValueError(f"ports overflow: 1+({num_observed}-1)*{gap} > {num_ports}")
    step = gap * aperture_wavelengths / (num_ports - 1) if num_ports > 1 else 0.0
    rows = np.arange(num_observed) * step
    matrix = np.exp(-2j * np.pi * np.outer(rows, np.cos(aoas)))
    return VandermondeResponse(matrix, int(gap), aoas)


def regularized_solve(V: VandermondeResponse | np.ndarray, g_obs: np.ndarray, gamma: float) -> np.ndarray:
    """Minimizer of ``||g - W s||^2 + gamma ||s||^2``.

    Solved as the stacked least-squares problem ``[W; sqrt(gamma) I] s = [g; 0]``
    which avoids forming ``W^H W``. With ``gamma = 0`` and a rank-deficient
    ``W`` the minimum-norm solution is returned.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    w = V.matrix if isinstance(V, VandermondeResponse) else np.asarray(V)
    g = np.asarray(g_obs, dtype=complex).reshape(-1)
    if g.size != w.shape[0]:
        raise ValueError(f"g has {g.size} entries, response has {w.shape[0]} rows")
    cols = w.shape[1]
    if gamma > 0:
        w = np.vstack([w, np.sqrt(gamma) * np.eye(cols)])
        g = np.concatenate([g, np.zeros(cols)])
    return np.linalg.lstsq(w, g, rcond=None)[0]


def gap_objective(V: VandermondeResponse | np.ndarray, gamma: float) -> float:
    """Noise gain of the ridge estimator, sum_i (s_i / (s_i^2 + gamma))^2."""
    w = V.matrix if isinstance(V, VandermondeResponse) else np.asarray(V)
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    s = np.linalg.svd(w, compute_uv=False)
    if gamma == 0:
        tol = max(w.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        if s.size < w.shape[1] or s.size == 0 or s[-1] <= tol:
            raise ValueError("rank-deficient response with gamma = 0: objective diverges")
    return float(np.sum((s / (s**2 + gamma)) ** 2))


def candidate_gaps(num_ports: int, rf_chains: int, num_observed: int | None = None) -> list[int]:
    """Exhaustive-search set {1, ..., N/M}.

    When M does not divide N the geometric bound floor((N-1)/(N_obs-1)) is
    used instead.
    """
    n_obs = rf_chains if num_observed is None else num_observed
    if num_ports % rf_chains == 0:
        top = num_ports // rf_chains
    elif n_obs > 1:
        top = (num_ports - 1) // (n_obs - 1)
    else:
        top = num_ports
    gaps = [d for d in range(1, top + 1) if 1 + (n_obs - 1) * d <= num_ports]
    if not gaps:
        raise ValueError("no feasible index gap")
    return gaps


def gap_objective_curve(
    cfg: SystemConfig,
    gamma: float,
    aoa_draws: int,
    rng: np.random.Generator,
) -> tuple[list[int], np.ndarray]:
    """Objective averaged over random AoA tuples for every candidate gap.

    The same ``aoa_draws`` tuples of L_s + 1 uniform angles are shared by all
    candidates.
    """
    if aoa_draws < 1:
        raise ValueError("aoa_draws must be >= 1")
    n_obs = cfg.rf_chains
    gaps = candidate_gaps(cfg.num_ports, cfg.rf_chains, n_obs)
    draws = rng.uniform(0.0, np.pi, size=(aoa_draws, cfg.num_scatterers + 1))
    means = np.empty(len(gaps))
    for j, gap in enumerate(gaps):
        total = 0.0
        for aoas in draws:
            v = vandermonde(aoas, gap, n_obs, cfg.num_ports, cfg.aperture_wavelengths)
            total += gap_objective(v, gamma)
        means[j] = total / aoa_draws
    return gaps, means


def select_gap(cfg: SystemConfig, gamma: float, aoa_draws: int, rng: np.random.Generator) -> int:
    gaps, means = gap_objective_curve(cfg, gamma, aoa_draws, rng)
    return gaps[int(np.argmin(means))]
