"""Geometric multipath channels for fluid-antenna ports and ULA elements.

Ports are indexed from 1 in every public function, the first port being the
phase reference. Each path contributes ``sigma * exp(-j 2 pi x_n cos(theta))``
where ``x_n`` is the port position in wavelengths.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import SystemConfig


class ArrayKind(str, enum.Enum):
    FAS = "fas"
    ULA = "ula"


@dataclass(frozen=True)
class ChannelRealization:
    """Path gains and angles of arrival for one device."""

    los_coefficient: complex
    los_aoa: float
    scatter_coefficients: np.ndarray
    scatter_aoas: np.ndarray
    los_phase: float

    @property
    def num_scatterers(self) -> int:
        return len(self.scatter_coefficients)

    @property
    def coefficients(self) -> np.ndarray:
        """LOS gain followed by the scatterer gains."""
        return np.concatenate([[self.los_coefficient], self.scatter_coefficients]).astype(complex)

    @property
    def aoas(self) -> np.ndarray:
        return np.concatenate([[self.los_aoa], self.scatter_aoas]).astype(float)

    @classmethod
    def from_paths(cls, coefficients: Sequence[complex], aoas: Sequence[float]) -> "ChannelRealization":
        """Build a realization from explicit paths; the first path is the LOS one."""
        coefficients = np.asarray(coefficients, dtype=complex)
        aoas = np.asarray(aoas, dtype=float)
        if coefficients.shape != aoas.shape or coefficients.ndim != 1 or len(aoas) == 0:
            raise ValueError("coefficients and aoas must be 1-D with equal nonzero length")
        return cls(
            los_coefficient=complex(coefficients[0]),
            los_aoa=float(aoas[0]),
            scatter_coefficients=coefficients[1:].copy(),
            scatter_aoas=aoas[1:].copy(),
            los_phase=float(np.angle(coefficients[0])),
        )


@dataclass(frozen=True)
class PortGeometry:
    """Receive aperture sampled at ``num_ports`` equally spaced positions.

    ULA geometries always use half-wavelength spacing; the aperture is forced
    to ``(num_ports - 1) / 2`` wavelengths.
    """

    num_ports: int
    aperture_wavelengths: float
    kind: ArrayKind = ArrayKind.FAS

    def __post_init__(self):
        if self.num_ports < 1:
            raise ValueError(f"num_ports must be >= 1, got {self.num_ports}")
        object.__setattr__(self, "kind", ArrayKind(self.kind))
        if self.kind is ArrayKind.ULA:
            object.__setattr__(self, "aperture_wavelengths", (self.num_ports - 1) / 2)
        elif self.aperture_wavelengths <= 0:
            raise ValueError(f"aperture must be positive, got {self.aperture_wavelengths}")

    @classmethod
    def ula(cls, num_elements: int) -> "PortGeometry":
        return cls(num_elements, (num_elements - 1) / 2, ArrayKind.ULA)

    @property
    def spacing(self) -> float:
        """Distance between adjacent ports, in wavelengths."""
        if self.kind is ArrayKind.ULA:
            return 0.5
        if self.num_ports == 1:
            return 0.0
        return self.aperture_wavelengths / (self.num_ports - 1)

    def positions(self, port_indices: Sequence[int] | None = None) -> np.ndarray:
        idx = np.arange(1, self.num_ports + 1) if port_indices is None else np.asarray(port_indices)
        return (idx - 1) * self.spacing


def steering_matrix(positions: np.ndarray, aoas: Sequence[float]) -> np.ndarray:
    """Unit-modulus port responses, one column per angle."""
    positions = np.asarray(positions, dtype=float)
    cos = np.cos(np.asarray(aoas, dtype=float))
    return np.exp(-2j * np.pi * np.outer(positions, cos))


def draw_channel_realization(cfg: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one device's Rician geometric channel.

    The LOS gain has power K*Omega/(K+1) with a uniform phase. Scatterer gains
    are complex Gaussian, rescaled so their total power is exactly
    Omega/(K+1). All angles are uniform on [0, pi).
    """
    L = cfg.num_scatterers
    K = cfg.rice_factor
    omega = cfg.avg_energy
    if L < 0 or K < 0 or omega <= 0:
        raise ValueError("need num_scatterers >= 0, rice_factor >= 0, avg_energy > 0")
    if L == 0 and K == 0:
        raise ValueError("no scatterers and zero Rice factor leave a zero-power channel")

    los_phase = rng.uniform(0.0, 2 * np.pi)
    los_aoa = rng.uniform(0.0, np.pi)
    los = np.sqrt(K * omega / (K + 1)) * np.exp(1j * los_phase)

    scatter_aoas = rng.uniform(0.0, np.pi, size=L)
    raw = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2)
    if L:
        raw *= np.sqrt(omega / (K + 1)) / np.linalg.norm(raw)
    return ChannelRealization(
        los_coefficient=complex(los),
        los_aoa=float(los_aoa),
        scatter_coefficients=raw,
        scatter_aoas=scatter_aoas,
        los_phase=float(los_phase),
    )


def channel_vector(realization: ChannelRealization, geom: PortGeometry) -> np.ndarray:
    """Channel seen at every port of ``geom``."""
    return steering_matrix(geom.positions(), realization.aoas) @ realization.coefficients


def select_ports(full_channel: np.ndarray, indices: Sequence[int]) -> np.ndarray:
    """Entries of ``full_channel`` at the given 1-based, increasing port indices."""
    full_channel = np.asarray(full_channel)
    idx = np.asarray(indices, dtype=int)
    n = len(full_channel)
    if idx.ndim != 1:
        raise ValueError("port indices must be a flat sequence")
    if idx.size and (idx.min() < 1 or idx.max() > n):
        bad = idx[(idx < 1) | (idx > n)]
        raise IndexError(f"port indices {bad.tolist()} outside [1, {n}]")
    if np.any(np.diff(idx) <= 0):
        raise ValueError("port indices must be strictly increasing")
    return full_channel[idx - 1]
