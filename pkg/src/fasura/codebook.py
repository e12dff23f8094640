"""Pilot codebook, pilot selection and received-frame synthesis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelRealization, PortGeometry, channel_vector
from .config import (
    ActivationPattern,
    CodebookKind,
    CollisionPolicy,
    Mode,
    SystemConfig,
    ebn0_to_noise_variance,
)


@dataclass(frozen=True)
class Codebook:
    """Common pilot matrix; each column has squared norm ``E_s * L_p``."""

    matrix: np.ndarray
    per_symbol_energy: float
    kind: CodebookKind

    @property
    def pilot_length(self) -> int:
        return self.matrix.shape[0]

    @property
    def size(self) -> int:
        return self.matrix.shape[1]


def _normalize_columns(a: np.ndarray, energy: float) -> np.ndarray:
    return a * (np.sqrt(energy) / np.linalg.norm(a, axis=0))


def build_codebook(
    kind: CodebookKind,
    pilot_length: int,
    pilot_bits: int,
    per_symbol_energy: float,
    rng: np.random.Generator,
) -> Codebook:
    kind = CodebookKind(kind)
    if pilot_length < 1 or pilot_bits < 1:
        raise ValueError("pilot_length and pilot_bits must be >= 1")
    size = 2**pilot_bits
    if kind is CodebookKind.GAUSSIAN:
        a = rng.standard_normal((pilot_length, size)) + 1j * rng.standard_normal((pilot_length, size))
    else:
        if pilot_length > size:
            raise ValueError(f"subsampled DFT needs pilot_length <= {size}, got {pilot_length}")
        rows = np.sort(rng.choice(size, size=pilot_length, replace=False))
        a = np.exp(-2j * np.pi * np.outer(rows, np.arange(size)) / size) / np.sqrt(size)
    a = _normalize_columns(a, per_symbol_energy * pilot_length)
    return Codebook(a, float(per_symbol_energy), kind)


def assign_pilots(
    num_devices: int,
    pilot_bits: int,
    policy: CollisionPolicy,
    rng: np.random.Generator,
) -> np.ndarray:
    """Zero-based codebook column chosen by each device."""
    size = 2**pilot_bits
    if CollisionPolicy(policy) is CollisionPolicy.DISTINCT:
        if num_devices > size:
            raise ValueError(f"{num_devices} devices cannot pick distinct pilots from {size}")
        return rng.choice(size, size=num_devices, replace=False)
    return rng.integers(0, size, size=num_devices)


@dataclass(frozen=True)
class ReceivedFrame:
    """Noisy pilot observation together with its chunk/port layout.

    For AP-CE ``samples`` is ``L_p x N``: the ``S`` chunks are stacked
    horizontally and chunk ``s`` occupies columns ``s*N_obs`` to
    ``(s+1)*N_obs - 1``. ``observed_port_indices[s]`` lists the 1-based ports
    behind those columns.
    """

    samples: np.ndarray
    mode: Mode
    chunk_length: int
    num_chunks: int
    observed_port_indices: tuple[tuple[int, ...], ...]
    noise_variance: float

    @property
    def port_order(self) -> np.ndarray:
        """1-based port index behind every column of ``samples``."""
        return np.concatenate([np.asarray(p, dtype=int) for p in self.observed_port_indices])

    def chunk(self, s: int) -> np.ndarray:
        """Samples of the ``s``-th chunk (0-based)."""
        width = len(self.observed_port_indices[s])
        return self.samples[:, s * width:(s + 1) * width]

    def to_port_order(self, columns: np.ndarray) -> np.ndarray:
        """Reorder trailing-axis column values so they follow ascending port index."""
        order = np.argsort(self.port_order, kind="stable")
        return np.asarray(columns)[..., order]


def apce_port_chunks(num_ports: int, per_chunk: int, pattern: ActivationPattern) -> list[np.ndarray]:
    """Ports activated in each AP-CE chunk.

    ``VICINITY`` observes consecutive blocks; ``INTERVAL`` observes every
    ``S``-th port starting from port ``s``.
    """
    if per_chunk < 1 or num_ports % per_chunk:
        raise ValueError(f"num_ports={num_ports} is not divisible by per_chunk={per_chunk}")
    num_chunks = num_ports // per_chunk
    ports = np.arange(1, num_ports + 1)
    if ActivationPattern(pattern) is ActivationPattern.VICINITY:
        return [ports[s * per_chunk:(s + 1) * per_chunk] for s in range(num_chunks)]
    return [ports[s::num_chunks] for s in range(num_chunks)]


def ppce_ports(num_ports: int, num_observed: int, gap: int) -> np.ndarray:
    """Ports 1, 1+gap, ..., 1+(num_observed-1)*gap."""
    last = 1 + (num_observed - 1) * gap
    if gap < 1 or last > num_ports:
        raise ValueError(f"port {last} exceeds num_ports={num_ports} (gap={gap})")
    return 1 + gap * np.arange(num_observed)


def frame_geometry(cfg: SystemConfig) -> tuple[PortGeometry, list[np.ndarray]]:
    """Physical geometry and per-chunk observed ports for ``cfg.mode``."""
    if cfg.mode is Mode.ULA:
        geom = PortGeometry.ula(cfg.rf_chains)
        return geom, [np.arange(1, cfg.rf_chains + 1)]
    geom = PortGeometry(cfg.num_ports, cfg.aperture_wavelengths)
    if cfg.mode is Mode.APCE:
        return geom, apce_port_chunks(cfg.num_ports, cfg.chunk_ports, cfg.activation_pattern)
    return geom, [ppce_ports(cfg.num_ports, cfg.rf_chains, cfg.gap)]


def complex_noise(shape, variance: float, rng: np.random.Generator) -> np.ndarray:
    return np.sqrt(variance / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_frame(
    mode: Mode,
    codebook: Codebook,
    pilot_indices: Sequence[int],
    channel_realizations: Sequence[ChannelRealization],
    cfg: SystemConfig,
    rng: np.random.Generator,
    noise_variance: float | None = None,
) -> ReceivedFrame:
    """Received pilot signal for every chunk of the activation schedule.

    Each chunk is ``sum_k x_k g_{k,s}^T + N_s`` with the same pilot ``x_k``
    reused across chunks. ``noise_variance`` defaults to the value implied by
    ``cfg.ebn0_db``.
    """
    mode = Mode(mode)
    if mode is not cfg.mode:
        cfg = cfg.replace(mode=mode)
    if len(pilot_indices) != len(channel_realizations):
        raise ValueError("need one pilot index per channel realization")
    if codebook.pilot_length != cfg.pilot_length:
        raise ValueError(
            f"codebook pilot length {codebook.pilot_length} != required {cfg.pilot_length}"
        )
    sigma2 = ebn0_to_noise_variance(cfg) if noise_variance is None else float(noise_variance)
    geom, chunks = frame_geometry(cfg)

    full = np.array([channel_vector(r, geom) for r in channel_realizations]).reshape(
        len(channel_realizations), geom.num_ports
    )
    x = codebook.matrix[:, np.asarray(pilot_indices, dtype=int)]
    blocks = []
    for ports in chunks:
        g_s = full[:, ports - 1]
        y_s = x @ g_s
        if sigma2 > 0:
            y_s = y_s + complex_noise(y_s.shape, sigma2, rng)
        blocks.append(y_s)
    return ReceivedFrame(
        samples=np.hstack(blocks),
        mode=mode,
        chunk_length=codebook.pilot_length,
        num_chunks=len(chunks),
        observed_port_indices=tuple(tuple(int(p) for p in ports) for ports in chunks),
        noise_variance=sigma2,
    )

