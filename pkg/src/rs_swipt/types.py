"""Core scenario types: configuration, channels, precoders, results.

All powers and energies are carried in watts internally.  Decibel and
microwatt units exist only at the CLI / scenario-file boundary.

Every type here is an immutable value object after construction (arrays are
frozen), so instances can be shared freely between concurrent workers.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ScenarioError",
    "InfeasibleSplitError",
    "InfeasibleScenarioError",
    "SolverFailureError",
    "SystemConfig",
    "ChannelSet",
    "PrecoderSet",
    "CommonRateSplit",
    "StrategyKind",
    "Strategy",
    "PowerBreakdown",
    "RatePoint",
    "ValidationReport",
    "validate_scenario",
    "ensure_valid",
    "total_transmit_power",
]


class ScenarioError(ValueError):
    """A scenario violates a structural invariant (shapes, signs, finiteness)."""


class InfeasibleSplitError(ValueError):
    """A common-rate split exceeds the rate at which the shared stream is decodable."""


class InfeasibleScenarioError(RuntimeError):
    """The harvested-energy requirement cannot be met under the power budget."""


class SolverFailureError(RuntimeError):
    """Every optimization start aborted for numerical reasons."""


def _frozen_complex(value, shape=None) -> np.ndarray:
    a = np.array(value, dtype=np.complex128)
    if shape is not None:
        a = a.reshape(shape)
    a.setflags(write=False)
    return a


def _frozen_float(value) -> np.ndarray:
    a = np.array(value, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters of the broadcast channel.

    num_tx_antennas: transmit antennas at the base station
    num_irs:         single-antenna information receivers (K)
    num_ers:         single-antenna energy receivers (J)
    total_power:     transmit power budget, watts
    noise_power_ir:  noise variance at each information receiver, watts
    rate_weights:    K positive weights on the per-receiver rates
    harvest_efficiency: energy-harvester efficiency in [0, 1]
    energy_threshold:   minimum total harvested energy, watts
    """

    num_tx_antennas: int
    num_irs: int
    num_ers: int
    total_power: float
    noise_power_ir: float
    rate_weights: tuple[float, ...]
    harvest_efficiency: float = 1.0
    energy_threshold: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "rate_weights", tuple(float(u) for u in self.rate_weights)
        )


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Complex downlink channel vectors, one row per receiver.

    ir_channels: (K, N_t) channels to the information receivers
    er_channels: (J, N_t) channels to the energy receivers
    """

    ir_channels: np.ndarray
    er_channels: np.ndarray

    def __post_init__(self):
        ir = np.atleast_2d(np.asarray(self.ir_channels, dtype=np.complex128))
        er = np.asarray(self.er_channels, dtype=np.complex128)
        if er.size == 0:
            er = er.reshape(0, ir.shape[1] if ir.size else 0)
        else:
            er = np.atleast_2d(er)
        object.__setattr__(self, "ir_channels", _frozen_complex(ir))
        object.__setattr__(self, "er_channels", _frozen_complex(er))

    @property
    def num_irs(self) -> int:
        return self.ir_channels.shape[0]

    @property
    def num_ers(self) -> int:
        return self.er_channels.shape[0]


@dataclass(frozen=True, eq=False)
class PrecoderSet:
    """Transmit beamformers: one shared stream, K private streams, J energy beams.

    common:  (N_t,) precoder of the stream decoded by every information receiver
    private: (K, N_t) per-receiver private precoders
    energy:  (J, N_t) dedicated energy-beam precoders
    """

    common: np.ndarray
    private: np.ndarray
    energy: np.ndarray

    def __post_init__(self):
        common = np.asarray(self.common, dtype=np.complex128).reshape(-1)
        n_t = common.shape[0]
        private = np.asarray(self.private, dtype=np.complex128)
        private = private.reshape(-1, n_t) if private.size else private.reshape(0, n_t)
        energy = np.asarray(self.energy, dtype=np.complex128)
        energy = energy.reshape(-1, n_t) if energy.size else energy.reshape(0, n_t)
        object.__setattr__(self, "common", _frozen_complex(common))
        object.__setattr__(self, "private", _frozen_complex(private))
        object.__setattr__(self, "energy", _frozen_complex(energy))

    @property
    def n_t(self) -> int:
        return self.common.shape[0]

    @property
    def num_private(self) -> int:
        return self.private.shape[0]

    @property
    def num_energy(self) -> int:
        return self.energy.shape[0]

    def scaled(self, factor: float) -> "PrecoderSet":
        return PrecoderSet(
            common=self.common * factor,
            private=self.private * factor,
            energy=self.energy * factor,
        )

    def breakdown(self) -> "PowerBreakdown":
        return PowerBreakdown(
            common=float(np.sum(np.abs(self.common) ** 2)),
            private=tuple(float(np.sum(np.abs(row) ** 2)) for row in self.private),
            energy=float(np.sum(np.abs(self.energy) ** 2)),
        )


def total_transmit_power(precoders: PrecoderSet) -> float:
    """Total radiated power: squared norms of all precoders summed, watts."""
    return float(
        np.sum(np.abs(precoders.common) ** 2)
        + np.sum(np.abs(precoders.private) ** 2)
        + np.sum(np.abs(precoders.energy) ** 2)
    )


@dataclass(frozen=True)
class CommonRateSplit:
    """Per-receiver shares of the shared stream's rate, bits/s/Hz, all >= 0."""

    portions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "portions", tuple(float(c) for c in self.portions))

    @property
    def total(self) -> float:
        return float(sum(self.portions))

    @classmethod
    def zeros(cls, k: int) -> "CommonRateSplit":
        return cls(portions=(0.0,) * k)


class StrategyKind(str, Enum):
    RS = "RS"
    MULP = "MULP"
    SCSIC = "SCSIC"


@dataclass(frozen=True)
class Strategy:
    """Transmission strategy selector.

    RS uses the full split-message machinery.  MULP pins the shared-stream
    precoder to zero (every receiver treats all other streams as noise).
    SCSIC (two receivers only) routes one receiver's whole message over the
    shared stream and zeroes that receiver's private precoder;
    scsic_decoding_order = (first_decoded, last_decoded), where the first
    entry is the receiver whose message rides the shared stream.
    """

    kind: StrategyKind
    scsic_decoding_order: tuple[int, int] | None = None

    @classmethod
    def rs(cls) -> "Strategy":
        return cls(kind=StrategyKind.RS)

    @classmethod
    def mulp(cls) -> "Strategy":
        return cls(kind=StrategyKind.MULP)

    @classmethod
    def scsic(cls, decoding_order: tuple[int, int] | None = (0, 1)) -> "Strategy":
        order = None if decoding_order is None else tuple(decoding_order)
        return cls(kind=StrategyKind.SCSIC, scsic_decoding_order=order)

    def validate(self, num_irs: int) -> None:
        if self.kind is StrategyKind.SCSIC:
            if num_irs != 2:
                raise ScenarioError("SCSIC is defined for exactly 2 information receivers")
            order = self.scsic_decoding_order
            if order is not None and sorted(order) != [0, 1]:
                raise ScenarioError(f"invalid SCSIC decoding order {order!r}")


@dataclass(frozen=True)
class PowerBreakdown:
    """Radiated power per precoder group, watts."""

    common: float
    private: tuple[float, ...]
    energy: float

    @property
    def total(self) -> float:
        return self.common + sum(self.private) + self.energy


@dataclass(frozen=True, eq=False)
class RatePoint:
    """A converged operating point of one strategy on one scenario.

    wsr is the weighted sum of per-receiver total rates (common share plus
    private rate), harvested_energy_total sums over all energy receivers.
    """

    wsr: float
    per_ir_total_rates: tuple[float, ...]
    common_rate_split: CommonRateSplit
    harvested_energy_total: float
    power_breakdown: PowerBreakdown
    iterations_outer: int
    converged: bool
    precoders: PrecoderSet
    ledger: "ConvergenceLedger | None" = None


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def validate_scenario(config: SystemConfig, channels: ChannelSet) -> ValidationReport:
    """Check every structural invariant of (config, channels); never raises."""
    v: list[str] = []
    if config.num_tx_antennas < 1:
        v.append(f"num_tx_antennas must be >= 1, got {config.num_tx_antennas}")
    if config.num_irs < 1:
        v.append(f"num_irs must be >= 1, got {config.num_irs}")
    if config.num_ers < 0:
        v.append(f"num_ers must be >= 0, got {config.num_ers}")
    if not (config.total_power > 0):
        v.append(f"total_power must be > 0 W, got {config.total_power}")
    if not (config.noise_power_ir > 0):
        v.append(f"noise_power_ir must be > 0 W, got {config.noise_power_ir}")
    if not (0.0 <= config.harvest_efficiency <= 1.0):
        v.append(f"harvest_efficiency must lie in [0, 1], got {config.harvest_efficiency}")
    if not (config.energy_threshold >= 0):
        v.append(f"energy_threshold must be >= 0 W, got {config.energy_threshold}")
    if len(config.rate_weights) != config.num_irs:
        v.append(
            f"rate_weights has {len(config.rate_weights)} entries, expected {config.num_irs}"
        )
    if any(not (u > 0) for u in config.rate_weights):
        v.append(f"rate_weights must all be > 0, got {config.rate_weights}")

    ir, er = channels.ir_channels, channels.er_channels
    if ir.shape != (config.num_irs, config.num_tx_antennas):
        v.append(
            f"ir_channels shape {ir.shape} does not match "
            f"(num_irs, num_tx_antennas) = ({config.num_irs}, {config.num_tx_antennas})"
        )
    if er.shape != (config.num_ers, config.num_tx_antennas):
        v.append(
            f"er_channels shape {er.shape} does not match "
            f"(num_ers, num_tx_antennas) = ({config.num_ers}, {config.num_tx_antennas})"
        )
    if ir.size and not np.all(np.isfinite(ir)):
        v.append("ir_channels contain non-finite entries")
    if er.size and not np.all(np.isfinite(er)):
        v.append("er_channels contain non-finite entries")
    return ValidationReport(ok=not v, violations=tuple(v))


def ensure_valid(config: SystemConfig, channels: ChannelSet) -> None:
    """Raise ScenarioError listing every violated invariant, if any."""
    report = validate_scenario(config, channels)
    if not report.ok:
        raise ScenarioError("; ".join(report.violations))
