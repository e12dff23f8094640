"""Scenario configuration shared by every stage of the pipeline."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Any


class Mode(str, enum.Enum):
    APCE = "apce"
    PPCE = "ppce"
    ULA = "ula"


class ActivationPattern(str, enum.Enum):
    VICINITY = "vicinity"
    INTERVAL = "interval"


class CollisionPolicy(str, enum.Enum):
    DISTINCT = "distinct"
    IID = "iid"


class CodebookKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SUBSAMPLED_DFT = "subsampled_dft"


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


_ENUM_FIELDS = {
    "mode": Mode,
    "activation_pattern": ActivationPattern,
    "collision_policy": CollisionPolicy,
    "codebook_kind": CodebookKind,
}


@dataclass(frozen=True)
class SystemConfig:
    """All scenario parameters for one experiment.

    Defaults reproduce the reference operating point: five active devices,
    three scatterers plus LOS, 200 pilot channel uses, Rice factor 2, unit
    channel energy, a 100-point AoA grid and a 100-port fluid antenna behind
    10 RF chains. The aperture defaults to (M-1)/2 wavelengths so the fluid
    antenna and the half-wavelength ULA have the same physical length.
    """

    num_devices: int = 5
    num_scatterers: int = 3
    total_pilot_duration: int = 200
    rice_factor: float = 2.0
    avg_energy: float = 1.0
    aoa_grid_size: int = 100
    rf_chains: int = 10
    num_ports: int = 100
    aperture_wavelengths: float = 4.5
    pilot_bits: int = 8
    per_symbol_energy: float = 1.0
    ebn0_db: float = 0.0
    mode: Mode = Mode.APCE
    gap: int = 10
    gamma: float = 1.0
    ka_known: bool = False
    activation_pattern: ActivationPattern = ActivationPattern.VICINITY
    collision_policy: CollisionPolicy = CollisionPolicy.DISTINCT
    seed: int = 0
    codebook_kind: CodebookKind = CodebookKind.GAUSSIAN
    # Ports observed per AP-CE chunk; None means one per RF chain.
    ports_per_chunk: int | None = None
    # Paths searched per device during AoA estimation; None means L_s + 1.
    num_paths: int | None = None
    # Diagnostic: build the PP-CE Vandermonde response from the true AoAs.
    oracle_aoa: bool = False

    def __post_init__(self):
        for name, enum_type in _ENUM_FIELDS.items():
            value = getattr(self, name)
            if not isinstance(value, enum_type):
                try:
                    object.__setattr__(self, name, enum_type(str(value).lower()))
                except ValueError:
                    choices = ", ".join(m.value for m in enum_type)
                    raise ConfigError(name, f"{value!r} is not one of {choices}") from None
        self.validate()

    def validate(self) -> None:
        def need(cond: bool, key: str, msg: str):
            if not cond:
                raise ConfigError(key, msg)

        need(self.num_devices >= 0, "num_devices", "must be >= 0")
        need(self.num_scatterers >= 0, "num_scatterers", "must be >= 0")
        need(self.rice_factor >= 0, "rice_factor", "must be >= 0")
        need(
            self.num_scatterers > 0 or self.rice_factor > 0,
            "num_scatterers",
            "zero scatterers with rice_factor 0 gives an all-zero channel",
        )
        need(self.avg_energy > 0, "avg_energy", "must be > 0")
        need(self.aoa_grid_size >= 2, "aoa_grid_size", "must be >= 2")
        need(self.rf_chains >= 1, "rf_chains", "must be >= 1")
        need(self.num_ports >= self.rf_chains, "num_ports", "must be >= rf_chains")
        need(self.aperture_wavelengths > 0, "aperture_wavelengths", "must be > 0")
        need(self.pilot_bits >= 1, "pilot_bits", "must be >= 1")
        need(self.per_symbol_energy > 0, "per_symbol_energy", "must be > 0")
        need(not math.isnan(self.ebn0_db), "ebn0_db", "must not be NaN")
        need(self.gamma >= 0, "gamma", "must be >= 0")
        need(self.gap >= 1, "gap", "must be >= 1")
        need(self.total_pilot_duration >= 1, "total_pilot_duration", "must be >= 1")
        if self.num_paths is not None:
            need(self.num_paths >= 1, "num_paths", "must be >= 1")
        if self.collision_policy is CollisionPolicy.DISTINCT:
            need(
                self.num_devices <= 2**self.pilot_bits,
                "num_devices",
                "exceeds codebook size under distinct pilot assignment",
            )

        if self.mode is Mode.APCE:
            per_chunk = self.chunk_ports
            need(1 <= per_chunk <= self.rf_chains, "ports_per_chunk", "must lie in [1, rf_chains]")
            need(
                self.num_ports % per_chunk == 0,
                "ports_per_chunk",
                f"num_ports={self.num_ports} is not divisible by {per_chunk}",
            )
            need(
                self.total_pilot_duration % self.num_chunks == 0,
                "total_pilot_duration",
                f"not divisible into {self.num_chunks} chunks",
            )
        elif self.mode is Mode.PPCE:
            need(
                1 + (self.rf_chains - 1) * self.gap <= self.num_ports,
                "gap",
                f"observed ports overflow: 1+({self.rf_chains}-1)*{self.gap} > {self.num_ports}",
            )
            need(
                self.rf_chains >= self.paths_per_device,
                "rf_chains",
                f"{self.rf_chains} observed ports cannot resolve {self.paths_per_device} paths",
            )
        if self.codebook_kind is CodebookKind.SUBSAMPLED_DFT:
            need(
                self.pilot_length <= 2**self.pilot_bits,
                "codebook_kind",
                "subsampled DFT needs pilot length <= 2**pilot_bits",
            )

    @property
    def chunk_ports(self) -> int:
        return self.rf_chains if self.ports_per_chunk is None else self.ports_per_chunk

    @property
    def num_chunks(self) -> int:
        """S; only AP-CE splits the pilot duration."""
        if self.mode is Mode.APCE:
            return self.num_ports // self.chunk_ports
        return 1

    @property
    def pilot_length(self) -> int:
        """L_p, honoring T_p = S * L_p."""
        return self.total_pilot_duration // self.num_chunks

    @property
    def paths_per_device(self) -> int:
        return self.num_scatterers + 1 if self.num_paths is None else self.num_paths

    @property
    def ula_aperture(self) -> float:
        return (self.rf_chains - 1) / 2

    @property
    def noise_variance(self) -> float:
        return ebn0_to_noise_variance(self)

    def replace(self, **changes: Any) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.value if isinstance(value, enum.Enum) else value
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SystemConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        kwargs = {}
        for key, value in data.items():
            kwargs[key] = _coerce(key, known[key], value)
        return cls(**kwargs)


_INT_FIELDS = {
    "num_devices", "num_scatterers", "total_pilot_duration", "aoa_grid_size",
    "rf_chains", "num_ports", "pilot_bits", "gap", "seed",
}
_OPTIONAL_INT_FIELDS = {"ports_per_chunk", "num_paths"}
_BOOL_FIELDS = {"ka_known", "oracle_aoa"}
_FLOAT_FIELDS = {"rice_factor", "avg_energy", "aperture_wavelengths", "per_symbol_energy", "ebn0_db", "gamma"}


def _coerce(key: str, f: dataclasses.Field, value: Any) -> Any:
    """Convert JSON values and ``key=value`` override strings to field types."""
    try:
        if key in _BOOL_FIELDS:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if key in _OPTIONAL_INT_FIELDS:
            if value is None or str(value).strip().lower() in ("none", "null", ""):
                return None
            return _to_int(value)
        if key in _INT_FIELDS:
            return _to_int(value)
        if key in _FLOAT_FIELDS:
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot interpret {value!r}") from None
    return value


def _to_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(value)
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(value)
        return int(value)
    return int(str(value).strip())


def ebn0_to_noise_variance(cfg: SystemConfig) -> float:
    """Noise variance from E_b/N_0 = E_s T_p / (B_p sigma^2)."""
    ebn0 = 10.0 ** (cfg.ebn0_db / 10.0)
    return cfg.per_symbol_energy * cfg.total_pilot_duration / (cfg.pilot_bits * ebn0)
