"""Sweep engine: rate-energy tradeoff curves, two-receiver rate regions,
and single operating points with power-allocation tables.

Each grid point runs the full strategy suite; successive points warm-start
from the previous solutions (the solution at one grid value is a good start
at the neighboring value).  Infeasible points are carried as explicit rows,
never dropped.
"""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithms import AlgorithmConfig, ConvergenceLedger, run_strategy_suite
from .types import (
    ChannelSet,
    CommonRateSplit,
    InfeasibleScenarioError,
    PowerBreakdown,
    PrecoderSet,
    RatePoint,
    ScenarioError,
    SolverFailureError,
    StrategyKind,
    SystemConfig,
)

_log = logging.getLogger(__name__)

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "paper_weight_grid",
    "default_energy_grid",
    "run_tradeoff_sweep",
    "run_region_sweep",
    "run_point",
    "emit",
    "load_json_result",
    "format_power_table",
]

CSV_COLUMNS = [
    "sweep_kind",
    "coordinate",
    "strategy",
    "status",
    "wsr",
    "r1_tot",
    "r2_tot",
    "c1",
    "c2",
    "q_total_watts",
    "p_c",
    "p_1",
    "p_2",
    "p_er",
    "outer_iters",
    "wall_time_s",
]


def paper_weight_grid() -> tuple[float, ...]:
    """43 values of the second receiver's rate weight: 10^x for
    x in {-3} U {-1, -0.95, ..., 0.95, 1} U {3}."""
    exponents = [-3.0, *np.linspace(-1.0, 1.0, 41), 3.0]
    return tuple(float(10.0**x) for x in exponents)


def default_energy_grid() -> tuple[float, ...]:
    """Energy thresholds in watts covering 0 to just past the 2-IR/1-ER
    deterministic scenario's 40 uW harvestable maximum."""
    microwatts = [0, 5, 10, 15, 20, 25, 30, 32.5, 35, 37.5, 39, 39.75, 40, 41]
    return tuple(float(u) * 1e-6 for u in microwatts)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep request: scenario, strategies, and the grid to walk."""

    kind: str  # tradeoff | region | point
    config: SystemConfig
    channels: ChannelSet
    strategies: tuple[StrategyKind, ...] = (
        StrategyKind.RS,
        StrategyKind.MULP,
        StrategyKind.SCSIC,
    )
    energy_grid: tuple[float, ...] = ()  # watts, ascending (tradeoff)
    weight_grid: tuple[float, ...] = ()  # u_2 values, ascending (region)
    algorithm: AlgorithmConfig = field(default_factory=AlgorithmConfig)

    def validate(self) -> None:
        if self.kind not in ("tradeoff", "region", "point"):
            raise ScenarioError(f"unknown sweep kind {self.kind!r}")
        if self.kind == "tradeoff":
            if not self.energy_grid:
                raise ScenarioError("tradeoff sweep requires a non-empty energy_grid")
            if list(self.energy_grid) != sorted(self.energy_grid):
                raise ScenarioError("energy_grid must be sorted ascending")
        if self.kind == "region":
            if not self.weight_grid:
                raise ScenarioError("region sweep requires a non-empty weight_grid")
            if list(self.weight_grid) != sorted(self.weight_grid):
                raise ScenarioError("weight_grid must be sorted ascending")
            if self.config.num_irs != 2:
                raise ScenarioError("rate-region sweeps are defined for exactly 2 IRs")


@dataclass(frozen=True)
class SweepRow:
    coordinate: float
    strategy: str
    status: str  # optimal | infeasible | failed
    point: RatePoint | None = None
    message: str = ""
    wall_time: float = 0.0


@dataclass(frozen=True)
class SweepResult:
    kind: str
    rows: tuple[SweepRow, ...]

    @property
    def any_infeasible(self) -> bool:
        return any(r.status == "infeasible" for r in self.rows)


def _suite_rows(
    spec: SweepSpec,
    config: SystemConfig,
    coordinate: float,
    warm: dict[StrategyKind, PrecoderSet],
) -> list[SweepRow]:
    rows: list[SweepRow] = []
    tic = time.perf_counter()
    try:
        results = run_strategy_suite(
            config,
            spec.channels,
            spec.algorithm,
            strategies=spec.strategies,
            warm_starts=warm,
        )
    except InfeasibleScenarioError as exc:
        elapsed = time.perf_counter() - tic
        wanted = [k for k in spec.strategies if config.num_irs == 2 or k is not StrategyKind.SCSIC]
        return [
            SweepRow(
                coordinate=coordinate,
                strategy=kind.value,
                status="infeasible",
                message=str(exc),
                wall_time=elapsed / max(1, len(wanted)),
            )
            for kind in wanted
        ]
    except SolverFailureError as exc:
        elapsed = time.perf_counter() - tic
        wanted = [k for k in spec.strategies if config.num_irs == 2 or k is not StrategyKind.SCSIC]
        return [
            SweepRow(
                coordinate=coordinate,
                strategy=kind.value,
                status="failed",
                message=str(exc),
                wall_time=elapsed / max(1, len(wanted)),
            )
            for kind in wanted
        ]
    elapsed = time.perf_counter() - tic
    for kind, point in results.items():
        warm[kind] = point.precoders
        rows.append(
            SweepRow(
                coordinate=coordinate,
                strategy=kind.value,
                status="optimal",
                point=point,
                wall_time=elapsed / max(1, len(results)),
            )
        )
    return rows


def run_tradeoff_sweep(spec: SweepSpec) -> SweepResult:
    """Weighted sum rate versus the harvested-energy requirement; the grid is
    walked in ascending order with warm starts chained between points."""
    spec.validate()
    if spec.kind != "tradeoff":
        raise ScenarioError(f"expected a tradeoff spec, got {spec.kind!r}")
    warm: dict[StrategyKind, PrecoderSet] = {}
    rows: list[SweepRow] = []
    for threshold in spec.energy_grid:
        config = replace(spec.config, energy_threshold=float(threshold))
        rows.extend(_suite_rows(spec, config, float(threshold), warm))
    return SweepResult(kind="tradeoff", rows=tuple(rows))


def run_region_sweep(spec: SweepSpec) -> SweepResult:
    """Two-receiver rate-region boundary: the first receiver's weight is held
    at 1 while the second's sweeps the grid.

    Along the ascending grid the second receiver's total rate should be
    non-decreasing; a drop beyond 1e-3 bits marks an escape to a different
    local optimum and is logged, not raised."""
    spec.validate()
    if spec.kind != "region":
        raise ScenarioError(f"expected a region spec, got {spec.kind!r}")
    warm: dict[StrategyKind, PrecoderSet] = {}
    rows: list[SweepRow] = []
    previous_r2: dict[str, float] = {}
    for u2 in spec.weight_grid:
        config = replace(spec.config, rate_weights=(1.0, float(u2)))
        new_rows = _suite_rows(spec, config, float(u2), warm)
        for row in new_rows:
            if row.point is None:
                continue
            r2 = row.point.per_ir_total_rates[1]
            if row.strategy in previous_r2 and r2 < previous_r2[row.strategy] - 1e-3:
                _log.warning(
                    "region sweep: %s rate of receiver 2 dropped %.4g -> %.4g at "
                    "weight %.4g (local-optimum escape)",
                    row.strategy,
                    previous_r2[row.strategy],
                    r2,
                    u2,
                )
            previous_r2[row.strategy] = r2
        rows.extend(new_rows)
    return SweepResult(kind="region", rows=tuple(rows))


def run_point(spec: SweepSpec) -> SweepResult:
    """Single operating point at the configured energy threshold."""
    spec.validate()
    if spec.kind != "point":
        raise ScenarioError(f"expected a point spec, got {spec.kind!r}")
    rows = _suite_rows(spec, spec.config, float(spec.config.energy_threshold), {})
    return SweepResult(kind="point", rows=tuple(rows))


# ---------------------------------------------------------------------------
# Emission.


def _row_record(kind: str, row: SweepRow) -> dict:
    rec = {
        "sweep_kind": kind,
        "coordinate": row.coordinate,
        "strategy": row.strategy,
        "status": row.status,
        "wsr": "",
        "r1_tot": "",
        "r2_tot": "",
        "c1": "",
        "c2": "",
        "q_total_watts": "",
        "p_c": "",
        "p_1": "",
        "p_2": "",
        "p_er": "",
        "outer_iters": "",
        "wall_time_s": row.wall_time,
    }
    pt = row.point
    if pt is None:
        return rec
    rec["wsr"] = pt.wsr
    rates = pt.per_ir_total_rates
    split = pt.common_rate_split.portions
    private = pt.power_breakdown.private
    if len(rates) >= 1:
        rec["r1_tot"] = rates[0]
        rec["c1"] = split[0]
        rec["p_1"] = private[0]
    if len(rates) >= 2:
        rec["r2_tot"] = rates[1]
        rec["c2"] = split[1]
        rec["p_2"] = private[1]
    rec["q_total_watts"] = pt.harvested_energy_total
    rec["p_c"] = pt.power_breakdown.common
    rec["p_er"] = pt.power_breakdown.energy
    rec["outer_iters"] = pt.iterations_outer
    return rec


def _complex_rows(matrix: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.atleast_2d(matrix)]


def _point_to_json(pt: RatePoint) -> dict:
    ledger = pt.ledger
    return {
        "wsr": pt.wsr,
        "per_ir_total_rates": list(pt.per_ir_total_rates),
        "common_rate_split": list(pt.common_rate_split.portions),
        "harvested_energy_total": pt.harvested_energy_total,
        "power_breakdown": {
            "common": pt.power_breakdown.common,
            "private": list(pt.power_breakdown.private),
            "energy": pt.power_breakdown.energy,
        },
        "iterations_outer": pt.iterations_outer,
        "converged": pt.converged,
        "precoders": {
            "common": [[float(v.real), float(v.imag)] for v in pt.precoders.common],
            "private": _complex_rows(pt.precoders.private),
            "energy": _complex_rows(pt.precoders.energy),
        },
        "ledger": None
        if ledger is None
        else {
            "inner_traces": [list(t) for t in ledger.inner_traces],
            "outer_trace": list(ledger.outer_trace),
            "wall_time": ledger.wall_time,
        },
    }


def _point_from_json(data: dict) -> RatePoint:
    pre = data["precoders"]

    def restore(rows, width=None):
        arr = np.array([[complex(re, im) for re, im in row] for row in rows])
        if arr.size == 0:
            arr = arr.reshape(0, width if width is not None else 0)
        return arr

    common = np.array([complex(re, im) for re, im in pre["common"]])
    precoders = PrecoderSet(
        common=common,
        private=restore(pre["private"], len(common)),
        energy=restore(pre["energy"], len(common)),
    )
    ledger = data.get("ledger")
    return RatePoint(
        wsr=data["wsr"],
        per_ir_total_rates=tuple(data["per_ir_total_rates"]),
        common_rate_split=CommonRateSplit(portions=tuple(data["common_rate_split"])),
        harvested_energy_total=data["harvested_energy_total"],
        power_breakdown=PowerBreakdown(
            common=data["power_breakdown"]["common"],
            private=tuple(data["power_breakdown"]["private"]),
            energy=data["power_breakdown"]["energy"],
        ),
        iterations_outer=data["iterations_outer"],
        converged=data["converged"],
        precoders=precoders,
        ledger=None
        if ledger is None
        else ConvergenceLedger(
            inner_traces=tuple(tuple(t) for t in ledger["inner_traces"]),
            outer_trace=tuple(ledger["outer_trace"]),
            wall_time=ledger["wall_time"],
        ),
    )


def emit(result: SweepResult, format: str, path) -> None:
    """Write a sweep result to disk.

    csv: one line per row with the fixed 16-column schema (CSV_COLUMNS).
    json: the same rows plus full precoders and convergence ledgers, loadable
    back into an equal SweepResult with load_json_result.
    """
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in result.rows:
                writer.writerow(_row_record(result.kind, row))
    elif format == "json":
        payload = {
            "sweep_kind": result.kind,
            "rows": [
                {
                    "coordinate": row.coordinate,
                    "strategy": row.strategy,
                    "status": row.status,
                    "message": row.message,
                    "wall_time_s": row.wall_time,
                    "rate_point": None if row.point is None else _point_to_json(row.point),
                }
                for row in result.rows
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")


def load_json_result(path) -> SweepResult:
    with open(path) as fh:
        payload = json.load(fh)
    rows = tuple(
        SweepRow(
            coordinate=entry["coordinate"],
            strategy=entry["strategy"],
            status=entry["status"],
            message=entry.get("message", ""),
            wall_time=entry.get("wall_time_s", 0.0),
            point=None
            if entry.get("rate_point") is None
            else _point_from_json(entry["rate_point"]),
        )
        for entry in payload["rows"]
    )
    return SweepResult(kind=payload["sweep_kind"], rows=rows)


def format_power_table(result: SweepResult) -> str:
    """Power-allocation table of a point run, one line per strategy."""
    lines = [
        f"{'strategy':<8} {'WSR (bit/s/Hz)':>14} {'P_c (W)':>10} "
        f"{'P_1 (W)':>10} {'P_2 (W)':>10} {'P_ER (W)':>10} {'Q (uW)':>9}"
    ]
    for row in result.rows:
        if row.point is None:
            lines.append(f"{row.strategy:<8} {row.status:>14}")
            continue
        pt = row.point
        private = list(pt.power_breakdown.private) + [float("nan")] * 2
        lines.append(
            f"{row.strategy:<8} {pt.wsr:>14.4f} {pt.power_breakdown.common:>10.4f} "
            f"{private[0]:>10.4f} {private[1]:>10.4f} "
            f"{pt.power_breakdown.energy:>10.4f} {pt.harvested_energy_total*1e6:>9.2f}"
        )
    return "\n".join(lines)
