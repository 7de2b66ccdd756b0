"""Channel construction: deterministic phase-progression realizations and
seeded random ensembles.

The deterministic construction places receivers on a uniform linear array's
beamspace grid: a receiver at angle parameter a sees the vector
[1, e^{ja}, ..., e^{j(n_t-1)a}] (stored entrywise conjugated, one fixed
convention repo-wide), scaled by an amplitude path loss d^{-3/2}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import ChannelSet, ScenarioError

__all__ = [
    "DeterministicChannelSpec",
    "build_paper_channels",
    "build_random_channels",
]


@dataclass(frozen=True)
class DeterministicChannelSpec:
    """Two-IR / one-ER deterministic scenario geometry.

    ir_distance, er_distance: meters
    gamma: amplitude ratio of the second IR's channel relative to the first
    theta: angle parameter of the second IR, radians
    beta:  angle parameter of the ER, radians (beta = 0 puts the ER on top of
           IR-1, beta = theta aligns it with IR-2)
    """

    ir_distance: float = 10.0
    er_distance: float = 10.0
    gamma: float = 1.0
    theta: float = 0.0
    beta: float = 0.0
    path_loss_exponent_amplitude: float = 1.5


def phase_progression(angle: float, n_t: int) -> np.ndarray:
    """Conjugated uniform phase ramp [1, e^{-ja}, ..., e^{-j(n_t-1)a}]."""
    return np.exp(-1j * angle * np.arange(n_t))


def build_paper_channels(spec: DeterministicChannelSpec, n_t: int = 4) -> ChannelSet:
    """Deterministic 2-IR / 1-ER channels from the geometry in `spec`.

    IR-1 sees the all-ones vector, IR-2 a gamma-scaled ramp at angle theta,
    the ER a ramp at angle beta; each is scaled by distance^{-3/2}.
    """
    if spec.ir_distance <= 0 or spec.er_distance <= 0:
        raise ScenarioError("distances must be positive")
    if spec.gamma <= 0:
        raise ScenarioError("gamma must be positive")
    loss_ir = spec.ir_distance ** (-spec.path_loss_exponent_amplitude)
    loss_er = spec.er_distance ** (-spec.path_loss_exponent_amplitude)
    h1 = loss_ir * phase_progression(0.0, n_t)
    h2 = loss_ir * spec.gamma * phase_progression(spec.theta, n_t)
    g1 = loss_er * phase_progression(spec.beta, n_t)
    return ChannelSet(ir_channels=np.stack([h1, h2]), er_channels=g1.reshape(1, -1))


def build_random_channels(n_t: int, num_irs: int, num_ers: int, seed: int) -> ChannelSet:
    """I.i.d. unit-variance complex Gaussian channels, deterministic per seed.

    Streams come from numpy's PCG64 generator seeded with `seed`; IR rows are
    drawn before ER rows, real parts before imaginary parts.
    """
    rng = np.random.default_rng(seed)

    def draw(rows: int) -> np.ndarray:
        re = rng.standard_normal((rows, n_t))
        im = rng.standard_normal((rows, n_t))
        return (re + 1j * im) / np.sqrt(2.0)

    return ChannelSet(ir_channels=draw(num_irs), er_channels=draw(num_ers))
