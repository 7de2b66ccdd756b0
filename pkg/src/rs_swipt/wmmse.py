"""Closed-form WMMSE machinery.

For each IR k and each stream (shared or private), with noise-normalized
channel h and precoder p:

    received power   T      (shared stream sees every information beam,
                             the private stream sees only private beams)
    MSE              eps(g) = |g|^2 T - 2 Re{g h^H p} + 1
    MMSE equalizer   g*     = p^H h / T
    minimized MSE    eps*   = (T - |h^H p|^2) / T
    weight update    w*     = 1 / eps*
    augmented WMSE   xi     = w eps - log2 w

At (g*, w*) the identity xi = 1 - log2(1 + SINR) holds exactly; that
identity (not unconstrained optimality of w*, which with base-2 logs sits
at 1/(eps ln 2)) is what lets rate maximization ride on weighted-MSE
minimization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .physics import effective_ir_channels
from .types import ChannelSet, PrecoderSet, SystemConfig

__all__ = [
    "EqualizerState",
    "WmseReport",
    "received_powers",
    "mse",
    "mmse_equalizers",
    "mmse_values",
    "optimal_weights",
    "mmse_state",
    "augmented_wmse",
    "wmse_report",
]


@dataclass(frozen=True, eq=False)
class EqualizerState:
    """Per-IR scalar equalizers and MSE weights for both streams."""

    common_equalizers: np.ndarray  # (K,) complex
    private_equalizers: np.ndarray  # (K,) complex
    common_weights: np.ndarray  # (K,) > 0
    private_weights: np.ndarray  # (K,) > 0

    def __post_init__(self):
        for name in ("common_equalizers", "private_equalizers"):
            a = np.asarray(getattr(self, name), dtype=np.complex128)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        for name in ("common_weights", "private_weights"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if np.any(a <= 0):
                raise ValueError(f"{name} must be strictly positive")
            a.setflags(write=False)
            object.__setattr__(self, name, a)


@dataclass(frozen=True, eq=False)
class WmseReport:
    """Received powers, minimized MSEs and augmented WMSEs per IR."""

    received_power_common: np.ndarray  # T for the shared stream, (K,)
    received_power_private: np.ndarray  # T for the private stream, (K,)
    mmse_common: np.ndarray
    mmse_private: np.ndarray
    augmented_common: np.ndarray
    augmented_private: np.ndarray


def received_powers(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet
) -> tuple[np.ndarray, np.ndarray]:
    """(T_common, T_private) per IR; both include the unit noise floor."""
    h = effective_ir_channels(config, channels)  # (K, N_t)
    private_gains = np.abs(h @ precoders.private.conj().T) ** 2  # (K, K)
    common_gain = np.abs(h @ precoders.common.conj()) ** 2  # (K,)
    t_private = np.sum(private_gains, axis=1) + 1.0
    t_common = t_private + common_gain
    return t_common, t_private


def _stream_terms(
    config: SystemConfig,
    channels: ChannelSet,
    precoders: PrecoderSet,
    ir_index: int,
    stream: str,
) -> tuple[float, complex]:
    """(received power T, complex signal inner product h^H p) for one stream."""
    h = effective_ir_channels(config, channels)[ir_index]
    t_common, t_private = received_powers(config, channels, precoders)
    if stream == "common":
        return float(t_common[ir_index]), complex(h.conj() @ precoders.common)
    if stream == "private":
        return float(t_private[ir_index]), complex(h.conj() @ precoders.private[ir_index])
    raise ValueError(f"stream must be 'common' or 'private', got {stream!r}")


def mse(
    config: SystemConfig,
    channels: ChannelSet,
    precoders: PrecoderSet,
    equalizer: complex,
    ir_index: int,
    stream: str,
) -> float:
    """MSE of one stream at one IR under an arbitrary scalar equalizer."""
    t, hp = _stream_terms(config, channels, precoders, ir_index, stream)
    g = complex(equalizer)
    return float(abs(g) ** 2 * t - 2.0 * (g * hp).real + 1.0)


def mmse_equalizers(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet
) -> tuple[np.ndarray, np.ndarray]:
    """Optimal scalar equalizers (common, private) per IR: g = p^H h / T."""
    h = effective_ir_channels(config, channels)
    t_common, t_private = received_powers(config, channels, precoders)
    sig_common = h.conj() @ precoders.common  # h_k^H p_c
    sig_private = np.einsum("kn,kn->k", h.conj(), precoders.private)  # h_k^H p_k
    return np.conj(sig_common) / t_common, np.conj(sig_private) / t_private


def mmse_values(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet
) -> tuple[np.ndarray, np.ndarray]:
    """Minimized MSEs (common, private) per IR, each in (0, 1]."""
    h = effective_ir_channels(config, channels)
    t_common, t_private = received_powers(config, channels, precoders)
    gain_common = np.abs(h.conj() @ precoders.common) ** 2
    gain_private = np.abs(np.einsum("kn,kn->k", h.conj(), precoders.private)) ** 2
    return (t_common - gain_common) / t_common, (t_private - gain_private) / t_private


def optimal_weights(mmse: np.ndarray) -> np.ndarray:
    """MSE weights w = 1 / eps (each >= 1), the choice under which the
    augmented WMSE equals 1 minus the stream rate exactly."""
    return 1.0 / np.asarray(mmse, dtype=np.float64)


def mmse_state(
    config: SystemConfig, channels: ChannelSet, precoders: PrecoderSet
) -> EqualizerState:
    """Equalizers and weights jointly optimal for the given precoders."""
    g_common, g_private = mmse_equalizers(config, channels, precoders)
    eps_common, eps_private = mmse_values(config, channels, precoders)
    return EqualizerState(
        common_equalizers=g_common,
        private_equalizers=g_private,
        common_weights=optimal_weights(eps_common),
        private_weights=optimal_weights(eps_private),
    )


def augmented_wmse(
    config: SystemConfig,
    channels: ChannelSet,
    precoders: PrecoderSet,
    state: EqualizerState,
    ir_index: int,
    stream: str,
) -> float:
    """xi = w * eps - log2(w) for the requested stream at one IR."""
    if stream == "common":
        g = state.common_equalizers[ir_index]
        w = float(state.common_weights[ir_index])
    elif stream == "private":
        g = state.private_equalizers[ir_index]
        w = float(state.private_weights[ir_index])
    else:
        raise ValueError(f"stream must be 'common' or 'private', got {stream!r}")
    if w <= 0:
        raise ValueError("MSE weight must be positive")
    eps = mse(config, channels, precoders, g, ir_index, stream)
    return float(w * eps - np.log2(w))


def wmse_report(
    config: SystemConfig,
    channels: ChannelSet,
    precoders: PrecoderSet,
    state: EqualizerState | None = None,
) -> WmseReport:
    """Received powers, MMSEs and augmented WMSEs; state defaults to the
    jointly-optimal one."""
    if state is None:
        state = mmse_state(config, channels, precoders)
    t_common, t_private = received_powers(config, channels, precoders)
    eps_common, eps_private = mmse_values(config, channels, precoders)
    k_range = range(config.num_irs)
    aug_c = np.array(
        [augmented_wmse(config, channels, precoders, state, k, "common") for k in k_range]
    )
    aug_p = np.array(
        [augmented_wmse(config, channels, precoders, state, k, "private") for k in k_range]
    )
    return WmseReport(
        received_power_common=t_common,
        received_power_private=t_private,
        mmse_common=eps_common,
        mmse_private=eps_private,
        augmented_common=aug_c,
        augmented_private=aug_p,
    )
