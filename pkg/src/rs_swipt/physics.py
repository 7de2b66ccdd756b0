"""Closed-form physical-layer quantities: SINRs, rates, harvested energy,
and the weighted-sum-rate objective.

Rate and SINR evaluation uses noise-normalized IR channels h_k / sigma, so
the "+1" noise floor in every SINR denominator is exact.  Harvested-energy
evaluation uses the raw, unscaled ER channels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import (
    ChannelSet,
    CommonRateSplit,
    InfeasibleSplitError,
    PrecoderSet,
    SystemConfig,
)

__all__ = [
    "RateReport",
    "effective_ir_channels",
    "sinr_common",
    "sinr_private",
    "achievable_rates",
    "harvested_energy",
    "total_harvested_energy",
    "max_harvestable_energy",
    "weighted_sum_rate",
]


@dataclass(frozen=True)
class RateReport:
    """Per-receiver rates of the shared and private streams, bits/s/Hz."""

    common_rates: tuple[float, ...]
    private_rates: tuple[float, ...]
    common_rate_bound: float  # min over common_rates; decodability limit


def effective_ir_channels(config: SystemConfig, channels: ChannelSet) -> np.ndarray:
    """IR channels scaled to unit noise variance, (K, N_t)."""
    return channels.ir_channels / np.sqrt(config.noise_power_ir)


def _gains(h: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """|h^H v|^2 for each row v of `vectors`."""
    if vectors.size == 0:
        return np.zeros(0)
    return np.abs(vectors @ h.conj()) ** 2


def sinr_common(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet, ir_index: int
) -> float:
    """SINR of the shared stream at one IR; every private stream interferes,
    energy beams do not (their waveforms are known and cancelled)."""
    h = effective_ir_channels(config, channels)[ir_index]
    signal = float(np.abs(h.conj() @ precoders.common) ** 2)
    interference = float(np.sum(_gains(h, precoders.private)))
    return signal / (interference + 1.0)


def sinr_private(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet, ir_index: int
) -> float:
    """SINR of the intended private stream after the shared stream is removed;
    other private streams are treated as noise."""
    h = effective_ir_channels(config, channels)[ir_index]
    gains = _gains(h, precoders.private)
    signal = float(gains[ir_index])
    interference = float(np.sum(gains) - gains[ir_index])
    return signal / (interference + 1.0)


def achievable_rates(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet
) -> RateReport:
    """log2(1 + SINR) for every stream at every IR."""
    k_range = range(config.num_irs)
    common = tuple(
        float(np.log2(1.0 + sinr_common(config, channels, precoders, k))) for k in k_range
    )
    private = tuple(
        float(np.log2(1.0 + sinr_private(config, channels, precoders, k))) for k in k_range
    )
    return RateReport(
        common_rates=common,
        private_rates=private,
        common_rate_bound=min(common),
    )


def harvested_energy(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet, er_index: int
) -> float:
    """Energy harvested at one ER, watts: efficiency times the total received
    power, information beams included."""
    g = channels.er_channels[er_index]
    received = (
        float(np.abs(g.conj() @ precoders.common) ** 2)
        + float(np.sum(_gains(g, precoders.private)))
        + float(np.sum(_gains(g, precoders.energy)))
    )
    return config.harvest_efficiency * received


def total_harvested_energy(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet
) -> float:
    return float(
        sum(harvested_energy(config, channels, precoders, j) for j in range(config.num_ers))
    )


def max_harvestable_energy(config: SystemConfig, channels: ChannelSet) -> float:
    """Largest total harvested energy any precoders within the power budget can
    deliver: efficiency * P_t * lambda_max(sum_j g_j g_j^H)."""
    if config.num_ers == 0:
        return 0.0
    gram = er_gram(channels)
    lam_max = float(np.linalg.eigvalsh(gram)[-1])
    return config.harvest_efficiency * config.total_power * lam_max


def er_gram(channels: ChannelSet) -> np.ndarray:
    """sum_j g_j g_j^H, (N_t, N_t); v^H gram v = sum_j |g_j^H v|^2."""
    g = channels.er_channels
    return g.T @ g.conj()


def weighted_sum_rate(
    config: SystemConfig,
    channels: ChannelSet,
    precoders: PrecoderSet,
    split: CommonRateSplit,
    tolerance: float = 1e-9,
) -> float:
    """sum_k u_k (C_k + R_k).  Raises if the split exceeds the decodable
    common rate by more than `tolerance`."""
    report = achievable_rates(config, channels, precoders)
    if split.total > report.common_rate_bound + tolerance:
        raise InfeasibleSplitError(
            f"common-rate split sums to {split.total:.6g} b/s/Hz, exceeding the "
            f"decodability bound {report.common_rate_bound:.6g}"
        )
    if any(c < -tolerance for c in split.portions):
        raise InfeasibleSplitError(f"negative common-rate portion in {split.portions}")
    return float(
        sum(
            u * (c + r)
            for u, c, r in zip(config.rate_weights, split.portions, report.private_rates)
        )
    )
