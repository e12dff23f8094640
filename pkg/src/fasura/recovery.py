"""Joint activity detection and channel estimation by SOMP."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebook import ReceivedFrame
from .config import SystemConfig


@dataclass(frozen=True)
class SompResult:
    """Output of :func:`somp`.

    Attributes:
        support: selected column indices (0-based) in selection order.
        channel_estimates: least-squares row estimates, one row per support
            entry, one column per measurement vector.
        residual_norm_history: Frobenius norm of the residual before the first
            selection and after each one.
    """

    support: np.ndarray
    channel_estimates: np.ndarray
    residual_norm_history: list[float]


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def estimate_active_count(frame: ReceivedFrame, cfg: SystemConfig) -> int:
    """Number of active devices inferred from received power.

    Inverts E||Y||_F^2 = N' L_p (K_a E_s Omega + sigma^2) with N' the number of
    columns of the frame, then rounds and clamps to the codebook size.
    """
    y = frame.samples
    rows, cols = y.shape
    if rows == 0 or cols == 0:
        return 0
    power = float(np.vdot(y, y).real)
    raw = (power / (cols * cfg.avg_energy) - frame.noise_variance * rows) / (cfg.per_symbol_energy * rows)
    return min(max(_round_half_away(raw), 0), 2**cfg.pilot_bits)


def somp(Y: np.ndarray, A: np.ndarray, k_max: int) -> SompResult:
    """Simultaneous orthogonal matching pursuit.

    Greedily picks the column of ``A`` whose normalized correlation with the
    residual, ``||R^H a_i|| / ||a_i||``, is largest (lowest index on ties),
    then re-projects ``Y`` onto the span of all selected columns. Runs for
    exactly ``k_max`` selections, capped at the number of rows of ``Y``.
    """
    Y = np.asarray(Y)
    if Y.ndim == 1:
        Y = Y[:, None]
    A = np.asarray(A)
    if A.shape[0] != Y.shape[0]:
        raise ValueError(f"row mismatch: Y has {Y.shape[0]}, A has {A.shape[0]}")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    n_rows, n_cols = A.shape
    k_max = min(k_max, n_rows, n_cols)

    col_norms = np.linalg.norm(A, axis=0)
    usable = col_norms > 0
    inv_norms = np.zeros_like(col_norms)
    inv_norms[usable] = 1.0 / col_norms[usable]

    R = Y.astype(complex)
    history = [float(np.linalg.norm(R))]
    support: list[int] = []
    coef = np.zeros((0, Y.shape[1]), dtype=complex)
    taken = np.zeros(n_cols, dtype=bool)
    for _ in range(k_max):
        scores = np.linalg.norm(A.conj().T @ R, axis=1) * inv_norms
        scores[taken] = -np.inf
        i = int(np.argmax(scores))
        support.append(i)
        taken[i] = True
        phi = A[:, support]
        coef = np.linalg.lstsq(phi, Y, rcond=None)[0]
        R = Y - phi @ coef
        history.append(float(np.linalg.norm(R)))
    return SompResult(np.array(support, dtype=int), coef, history)
