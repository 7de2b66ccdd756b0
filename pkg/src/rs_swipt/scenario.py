"""Scenario files: the JSON schema consumed by the CLI and sweep scripts.

Top-level fields mirror SystemConfig; powers may be plain numbers (watts) or
strings with an explicit unit suffix ("10 dBm", "1 mW", "35 uW", "0.01 W").
The "channels" block selects one of three constructions:

    {"type": "paper", "gamma": 1.0, "theta": 1.396, "beta": 0.698,
     "d_h": 10.0, "d_g": 10.0}
    {"type": "random", "seed": 7}
    {"type": "explicit", "ir": [[[re, im], ...], ...], "er": [...]}

An optional "sweep" block sets grids: {"energy_grid_uw": [...],
"weight_exponents": [...]} (weights are 10**exponent for the second IR).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channels import (
    DeterministicChannelSpec,
    build_paper_channels,
    build_random_channels,
)
from .types import ChannelSet, ScenarioError, SystemConfig, ensure_valid

__all__ = ["Scenario", "parse_power", "load_scenario", "parse_scenario"]

_UNIT_SCALE = {"w": 1.0, "mw": 1e-3, "uw": 1e-6, "µw": 1e-6, "nw": 1e-9}


def parse_power(value) -> float:
    """Power in watts from a number (watts) or a suffixed string."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ScenarioError(f"cannot parse power value {value!r}")
    text = value.strip().lower().replace(" ", "")
    if text.endswith("dbm"):
        return 10.0 ** ((float(text[:-3]) - 30.0) / 10.0)
    for suffix in sorted(_UNIT_SCALE, key=len, reverse=True):
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * _UNIT_SCALE[suffix]
    try:
        return float(text)
    except ValueError as exc:
        raise ScenarioError(f"cannot parse power value {value!r}") from exc


@dataclass(frozen=True)
class Scenario:
    config: SystemConfig
    channels: ChannelSet
    energy_grid: tuple[float, ...] | None = None  # watts
    weight_grid: tuple[float, ...] | None = None


def _build_channels(block: dict, config: SystemConfig) -> ChannelSet:
    kind = block.get("type")
    if kind == "paper":
        if config.num_irs != 2 or config.num_ers != 1:
            raise ScenarioError(
                "the deterministic phase-ramp construction is a 2-IR / 1-ER "
                f"scenario; config has K={config.num_irs}, J={config.num_ers}"
            )
        spec = DeterministicChannelSpec(
            ir_distance=float(block.get("d_h", 10.0)),
            er_distance=float(block.get("d_g", 10.0)),
            gamma=float(block.get("gamma", 1.0)),
            theta=float(block.get("theta", 0.0)),
            beta=float(block.get("beta", 0.0)),
        )
        return build_paper_channels(spec, config.num_tx_antennas)
    if kind == "random":
        return build_random_channels(
            config.num_tx_antennas,
            config.num_irs,
            config.num_ers,
            seed=int(block.get("seed", 0)),
        )
    if kind == "explicit":
        def parse_matrix(rows, width):
            if not rows:
                return np.zeros((0, width), dtype=np.complex128)
            return np.array(
                [[complex(re, im) for re, im in row] for row in rows],
                dtype=np.complex128,
            )

        return ChannelSet(
            ir_channels=parse_matrix(block.get("ir", []), config.num_tx_antennas),
            er_channels=parse_matrix(block.get("er", []), config.num_tx_antennas),
        )
    raise ScenarioError(f"unknown channel type {kind!r}")


def parse_scenario(data: dict) -> Scenario:
    try:
        config = SystemConfig(
            num_tx_antennas=int(data["num_tx_antennas"]),
            num_irs=int(data["num_irs"]),
            num_ers=int(data["num_ers"]),
            total_power=parse_power(data["total_power"]),
            noise_power_ir=parse_power(data["noise_power_ir"]),
            rate_weights=tuple(float(u) for u in data["rate_weights"]),
            harvest_efficiency=float(data.get("harvest_efficiency", 1.0)),
            energy_threshold=parse_power(data.get("energy_threshold", 0.0)),
        )
    except KeyError as exc:
        raise ScenarioError(f"scenario file is missing required field {exc}") from exc
    if "channels" not in data:
        raise ScenarioError("scenario file is missing the 'channels' block")
    channels = _build_channels(data["channels"], config)
    ensure_valid(config, channels)

    sweep = data.get("sweep", {})
    energy_grid = None
    if "energy_grid_uw" in sweep:
        energy_grid = tuple(float(u) * 1e-6 for u in sweep["energy_grid_uw"])
    weight_grid = None
    if "weight_exponents" in sweep:
        weight_grid = tuple(float(10.0 ** float(x)) for x in sweep["weight_exponents"])
    return Scenario(
        config=config, channels=channels, energy_grid=energy_grid, weight_grid=weight_grid
    )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario(json.load(fh))
