"""AoA grid dictionary, per-device AoA estimation and channel refinement."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .recovery import somp


@dataclass(frozen=True)
class AoaDictionary:
    """Port responses of a uniform AoA grid, normalized to unit-norm atoms.

    ``atoms`` has one row per entry of ``port_indices`` (1-based) and one
    column per grid angle.
    """

    atoms: np.ndarray
    grid: np.ndarray
    port_indices: np.ndarray
    num_ports: int
    aperture_wavelengths: float

    @property
    def num_observed(self) -> int:
        return len(self.port_indices)


@dataclass(frozen=True)
class AoaEstimate:
    """Selected grid atoms and their least-squares weights for one device."""

    aoa_indices: np.ndarray
    coefficients: np.ndarray
    grid: np.ndarray
    num_observed: int

    @property
    def aoas(self) -> np.ndarray:
        return self.grid[self.aoa_indices]


def aoa_grid(size: int) -> np.ndarray:
    """Midpoint grid pi*(i - 1/2)/size, i = 1..size."""
    return np.pi * (np.arange(1, size + 1) - 0.5) / size


def build_dictionary(
    port_indices: Sequence[int],
    num_ports: int,
    aperture_wavelengths: float,
    grid_size: int,
) -> AoaDictionary:
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    ports = tuple(int(p) for p in port_indices)
    return _cached_dictionary(ports, int(num_ports), float(aperture_wavelengths), int(grid_size))


@lru_cache(maxsize=64)
def _cached_dictionary(ports: tuple[int, ...], num_ports: int, aperture: float, grid_size: int) -> AoaDictionary:
    p = np.asarray(ports, dtype=int)
    if p.size == 0 or p.min() < 1 or p.max() > num_ports:
        raise ValueError(f"port indices must lie in [1, {num_ports}]")
    grid = aoa_grid(grid_size)
    spacing = aperture / (num_ports - 1) if num_ports > 1 else 0.0
    atoms = np.exp(-2j * np.pi * np.outer((p - 1) * spacing, np.cos(grid))) / np.sqrt(p.size)
    for arr in (atoms, grid, p):
        arr.setflags(write=False)
    return AoaDictionary(atoms, grid, p, num_ports, aperture)


def estimate_aoa(g_hat: np.ndarray, dictionary: AoaDictionary, num_paths: int) -> AoaEstimate:
    """Sparse fit of ``g_hat`` over the dictionary atoms with ``num_paths`` atoms."""
    g_hat = np.asarray(g_hat).reshape(-1)
    if g_hat.size != dictionary.num_observed:
        raise ValueError(f"vector has {g_hat.size} entries, dictionary has {dictionary.num_observed} rows")
    res = somp(g_hat, dictionary.atoms, num_paths)
    return AoaEstimate(res.support, res.channel_estimates[:, 0], dictionary.grid, dictionary.num_observed)


def refine_channel(full_dict: AoaDictionary, estimate: AoaEstimate) -> np.ndarray:
    """Rebuild the channel on ``full_dict``'s ports from an AoA estimate.

    Atom weights fitted on ``n`` observed ports equal the path gains times
    ``sqrt(n)``, so they are rescaled by ``sqrt(N_full / n)`` before being
    applied to the full-port atoms.
    """
    if full_dict.grid.shape != estimate.grid.shape or not np.array_equal(full_dict.grid, estimate.grid):
        raise ValueError("estimate was produced on a different AoA grid")
    scale = np.sqrt(full_dict.num_observed / estimate.num_observed)
    return full_dict.atoms[:, estimate.aoa_indices] @ estimate.coefficients * scale
