"""Alternating optimization of the precoders.

Outer loop: refresh the per-receiver equalizers and MSE weights in closed
form at the current precoders, then hand the precoder update to the inner
loop; stop when the weighted sum rate settles.

Inner loop (successive convex approximation): with equalizers and weights
frozen, repeatedly assemble the convex subproblem anchored at the current
precoders and solve it; each solution is feasible for the next subproblem,
so the weighted-MSE objective never increases.  The recorded traces are
monotone by construction: a candidate that fails to improve the incumbent
(possible only within solver tolerance) is discarded and the loop stops.

Strategy reductions run through the same pipeline by pinning variables:
MULP drops the shared stream, SCSIC drops one receiver's private stream and
routes that receiver's message over the shared stream.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .physics import (
    achievable_rates,
    er_gram,
    max_harvestable_energy,
    total_harvested_energy,
    weighted_sum_rate,
)
from .subproblem import (
    SolverTolerances,
    VariableLayout,
    assemble_from_state,
    solve,
)
from .types import (
    ChannelSet,
    CommonRateSplit,
    InfeasibleScenarioError,
    PrecoderSet,
    RatePoint,
    SolverFailureError,
    Strategy,
    StrategyKind,
    SystemConfig,
    ensure_valid,
    total_transmit_power,
)
from .wmmse import EqualizerState, mmse_state, received_powers

__all__ = [
    "AlgorithmConfig",
    "ConvergenceLedger",
    "initialize_precoders",
    "sca_inner_loop",
    "ao_outer_loop",
    "run_strategy_suite",
    "layout_for_strategy",
    "resolve_scsic_order",
]

_INIT_POWER_SPLIT = {"common": 0.4, "private": 0.4, "energy": 0.2}


@dataclass(frozen=True)
class AlgorithmConfig:
    """Iteration controls.

    inner_tolerance is on the weighted-MSE objective of the inner loop,
    outer_tolerance on the weighted sum rate of the outer loop.  Rate weights
    are normalized to unit maximum inside the optimizer (the returned
    operating point always reports the caller's weights), so both tolerances
    are insensitive to the absolute weight scale.
    """

    inner_tolerance: float = 1e-6
    outer_tolerance: float = 1e-4
    max_inner_iterations: int = 30
    max_outer_iterations: int = 150
    num_random_starts: int = 9
    feasibility_tolerance: float = 1e-9
    seed: int = 0
    solver: SolverTolerances = field(default_factory=SolverTolerances)

    def __post_init__(self):
        if self.inner_tolerance <= 0 or self.outer_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_inner_iterations < 1 or self.max_outer_iterations < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass(frozen=True)
class ConvergenceLedger:
    """Recorded iterate history of one optimization run.

    inner_traces[n] is the weighted-MSE sequence of the inner loop at outer
    iteration n (non-increasing); outer_trace is the weighted sum rate per
    outer iteration (non-decreasing), under unit-maximum weights.
    """

    inner_traces: tuple[tuple[float, ...], ...]
    outer_trace: tuple[float, ...]
    wall_time: float


class _StartFailure(Exception):
    """One start aborted for numerical reasons; other starts continue."""


def _near_optimal(result, tolerances: SolverTolerances) -> bool:
    """A stalled solve whose iterate is feasible and nearly closed can still
    advance the outer algorithm: the monotone-acceptance guard discards it if
    it does not actually improve the incumbent."""
    if result.solution is None:
        return False
    r = result.kkt_residuals
    return (
        r.primal <= 100.0 * tolerances.feasibility
        and r.dual <= 100.0 * tolerances.feasibility
        and r.gap <= 1e3 * tolerances.relative_gap
    )


def resolve_scsic_order(channels: ChannelSet, strategy: Strategy) -> tuple[int, int]:
    """(first_decoded, last_decoded); defaults to putting the weaker receiver's
    message on the shared stream, decoded by both."""
    if strategy.scsic_decoding_order is not None:
        return tuple(strategy.scsic_decoding_order)
    norms = np.linalg.norm(channels.ir_channels, axis=1)
    weak = int(np.argmin(norms))
    return (weak, 1 - weak)


def layout_for_strategy(
    config: SystemConfig, strategy: Strategy, channels: ChannelSet
) -> VariableLayout:
    strategy.validate(config.num_irs)
    energy_slots = (
        tuple(range(config.num_ers)) if config.energy_threshold > 0 else ()
    )
    if strategy.kind is StrategyKind.RS:
        return VariableLayout(
            n_t=config.num_tx_antennas,
            num_irs=config.num_irs,
            num_ers=config.num_ers,
            include_common=True,
            active_privates=tuple(range(config.num_irs)),
            active_energy=energy_slots,
            active_x=tuple(range(config.num_irs)),
        )
    if strategy.kind is StrategyKind.MULP:
        return VariableLayout(
            n_t=config.num_tx_antennas,
            num_irs=config.num_irs,
            num_ers=config.num_ers,
            include_common=False,
            active_privates=tuple(range(config.num_irs)),
            active_energy=energy_slots,
            active_x=(),
        )
    first, last = resolve_scsic_order(channels, strategy)
    return VariableLayout(
        n_t=config.num_tx_antennas,
        num_irs=config.num_irs,
        num_ers=config.num_ers,
        include_common=True,
        active_privates=(last,),
        active_energy=energy_slots,
        active_x=(first,),
    )


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def _apply_layout_mask(layout: VariableLayout, precoders: PrecoderSet) -> PrecoderSet:
    """Zero every pinned slot of `precoders`."""
    common = precoders.common if layout.include_common else np.zeros_like(precoders.common)
    private = np.zeros_like(precoders.private)
    for k in layout.active_privates:
        private[k] = precoders.private[k]
    energy = np.zeros_like(precoders.energy)
    for j in layout.active_energy:
        energy[j] = precoders.energy[j]
    return PrecoderSet(common=common, private=private, energy=energy)


def _ensure_energy_feasible(
    config: SystemConfig,
    channels: ChannelSet,
    precoders: PrecoderSet,
    layout: VariableLayout,
    feasibility_tolerance: float,
) -> PrecoderSet:
    """Rotate beams toward the best harvesting direction until the energy
    requirement holds at the starting point (the linearized constraint is
    tight at its anchor, so an energy-feasible anchor makes the first
    subproblem feasible whenever the scenario is)."""
    threshold = config.energy_threshold
    if threshold <= 0:
        return precoders
    e_max = max_harvestable_energy(config, channels)
    if e_max < threshold - feasibility_tolerance:
        raise InfeasibleScenarioError(
            f"energy threshold {threshold:.6g} W exceeds the harvestable maximum "
            f"{e_max:.6g} W under the power budget"
        )
    if total_harvested_energy(config, channels, precoders) >= threshold:
        return precoders

    eigvals, eigvecs = np.linalg.eigh(er_gram(channels))
    v_max = eigvecs[:, -1]
    # Stop short of the boundary when there is room, never beyond e_max.
    target = min(threshold + 0.05 * (e_max - threshold), e_max)

    def blended(t: float) -> PrecoderSet:
        def blend(vec: np.ndarray) -> np.ndarray:
            power = float(np.sum(np.abs(vec) ** 2))
            if power == 0.0:
                return vec
            direction = vec / np.sqrt(power)
            inner = complex(np.vdot(v_max, direction))
            aligned = v_max * (inner / abs(inner)) if abs(inner) > 1e-12 else v_max
            mixed = _unit((1.0 - t) * direction + t * aligned)
            return np.sqrt(power) * mixed

        common = blend(precoders.common) if layout.include_common else precoders.common
        private = np.array([blend(row) for row in precoders.private]) if precoders.private.size else precoders.private
        energy = np.array([blend(row) for row in precoders.energy]) if precoders.energy.size else precoders.energy
        return PrecoderSet(common=common, private=private, energy=energy)

    lo, hi = 0.0, 1.0
    candidate = blended(1.0)
    if total_harvested_energy(config, channels, candidate) < threshold - feasibility_tolerance:
        # All power aligned with the best direction still misses the target;
        # only possible through rounding right at the boundary.
        return candidate
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        trial = blended(mid)
        if total_harvested_energy(config, channels, trial) >= min(target, e_max):
            hi = mid
            candidate = trial
        else:
            lo = mid
    return candidate


def initialize_precoders(
    config: SystemConfig,
    channels: ChannelSet,
    strategy: Strategy,
    start_index: int,
    seed: int = 0,
) -> PrecoderSet:
    """Full-power starting point for one optimization start.

    Start 0 is deterministic: matched beams for the private streams, the
    dominant direction of the stacked IR channels for the shared stream,
    matched beams to each ER for the energy streams, with the power split
    (shared : private : energy) = (0.4 : 0.4 : 0.2) renormalized over the
    slots the strategy keeps.  Starts >= 1 draw random directions from a
    generator seeded with (seed, start_index).  Every start radiates exactly
    the full budget and is nudged to satisfy the energy requirement.
    """
    ensure_valid(config, channels)
    layout = layout_for_strategy(config, strategy, channels)
    n_t, k_irs, j_ers = config.num_tx_antennas, config.num_irs, config.num_ers

    shares: dict[tuple[str, int | None], float] = {}
    if layout.include_common:
        shares[("common", None)] = _INIT_POWER_SPLIT["common"]
    for k in layout.active_privates:
        shares[("private", k)] = _INIT_POWER_SPLIT["private"] / len(layout.active_privates)
    for j in layout.active_energy:
        shares[("energy", j)] = _INIT_POWER_SPLIT["energy"] / len(layout.active_energy)
    total_share = sum(shares.values())
    powers = {slot: config.total_power * s / total_share for slot, s in shares.items()}

    if start_index == 0:
        # Columns of the stacked matrix are the IR channel vectors.
        u_left, _, _ = np.linalg.svd(channels.ir_channels.T)
        directions = {("common", None): u_left[:, 0]}
        for k in layout.active_privates:
            directions[("private", k)] = _unit(channels.ir_channels[k])
        for j in layout.active_energy:
            directions[("energy", j)] = _unit(channels.er_channels[j])
    else:
        rng = np.random.default_rng((seed, start_index))
        directions = {}
        for slot in layout.slots():
            raw = rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
            directions[slot] = _unit(raw)

    common = np.zeros(n_t, dtype=np.complex128)
    private = np.zeros((k_irs, n_t), dtype=np.complex128)
    energy = np.zeros((j_ers, n_t), dtype=np.complex128)
    for slot, power in powers.items():
        kind, idx = slot
        vec = np.sqrt(power) * directions[slot]
        if kind == "common":
            common = vec
        elif kind == "private":
            private[idx] = vec
        else:
            energy[idx] = vec
    precoders = PrecoderSet(common=common, private=private, energy=energy)
    return _ensure_energy_feasible(
        config, channels, precoders, layout, AlgorithmConfig().feasibility_tolerance
    )


def _wmmse_value(
    config: SystemConfig,
    channels: ChannelSet,
    precoders: PrecoderSet,
    x: np.ndarray,
    state: EqualizerState,
    weights: np.ndarray,
) -> float:
    """sum_k u_k (X_k + xi_k(P)) with frozen equalizers and weights."""
    from .physics import effective_ir_channels

    _, t_private = received_powers(config, channels, precoders)
    h = effective_ir_channels(config, channels)
    sig = np.einsum("kn,kn->k", h.conj(), precoders.private)  # h_k^H p_k
    g = state.private_equalizers
    w = state.private_weights
    eps = np.abs(g) ** 2 * t_private - 2.0 * (g * sig).real + 1.0
    xi = w * eps - np.log2(w)
    return float(np.sum(weights * (x + xi)))


def _recover_split(
    x: np.ndarray,
    common_rate_bound: float,
    active_common: tuple[int, ...],
    weights: np.ndarray,
) -> CommonRateSplit:
    """C_k = max(0, -X_k), then rescaled so the shares exactly exhaust the
    decodable common rate (shortfall is topped up in proportion to the rate
    weights of the receivers that may use the shared stream)."""
    k = len(x)
    c = np.zeros(k)
    if not active_common or common_rate_bound <= 0:
        return CommonRateSplit(portions=tuple(c))
    for i in active_common:
        c[i] = max(0.0, -float(x[i]))
    total = float(c.sum())
    if total > common_rate_bound:
        c *= common_rate_bound / total
    elif total < common_rate_bound:
        active = np.array(active_common)
        w_active = weights[active]
        c[active] += (common_rate_bound - total) * w_active / float(w_active.sum())
    return CommonRateSplit(portions=tuple(c))


def sca_inner_loop(
    config: SystemConfig,
    channels: ChannelSet,
    state: EqualizerState,
    precoders_in: PrecoderSet,
    algorithm: AlgorithmConfig,
    layout: VariableLayout | None = None,
    x_in: np.ndarray | None = None,
    weights: np.ndarray | None = None,
    first_subproblem_infeasible_is_scenario: bool = True,
) -> tuple[PrecoderSet, np.ndarray, tuple[float, ...]]:
    """Anchor, solve, re-anchor until the weighted-MSE objective settles.

    Returns the final precoders, the X vector (full length K, pinned entries
    zero) and the recorded objective trace.  Raises InfeasibleScenarioError
    if the very first subproblem is infeasible and _StartFailure on numerical
    breakdown.
    """
    if layout is None:
        layout = layout_for_strategy(config, Strategy.rs(), channels)
    if weights is None:
        weights = np.asarray(config.rate_weights, dtype=np.float64)
    if x_in is None:
        x_in = np.zeros(config.num_irs)

    p_cur, x_cur = precoders_in, np.asarray(x_in, dtype=np.float64)
    value = _wmmse_value(config, channels, p_cur, x_cur, state, weights)
    trace = [value]
    for t in range(algorithm.max_inner_iterations):
        problem = assemble_from_state(
            config,
            channels,
            state,
            expansion_point=p_cur,
            layout=layout,
            rate_weights=tuple(weights),
        )
        result = solve(problem, algorithm.solver)
        if result.status == "infeasible":
            if t == 0 and first_subproblem_infeasible_is_scenario:
                raise InfeasibleScenarioError(
                    "the energy requirement is unreachable from any feasible "
                    f"precoders: {result.diagnostic}"
                )
            raise _StartFailure(f"subproblem reported infeasible mid-run: {result.diagnostic}")
        if result.status != "optimal" and not _near_optimal(result, algorithm.solver):
            raise _StartFailure(
                f"subproblem solve ended with status {result.status}: {result.diagnostic}"
            )
        p_new, x_new = layout.unpack(result.solution)
        over = total_transmit_power(p_new) / config.total_power
        if over > 1.0:
            # Solver feasibility slack; pull back inside the exact budget.
            p_new = p_new.scaled(float(1.0 / np.sqrt(over)))
        value_new = _wmmse_value(config, channels, p_new, x_new, state, weights)
        if value_new > value:
            # Solver tolerance produced a non-improving point: keep the incumbent.
            break
        delta = value - value_new
        p_cur, x_cur, value = p_new, x_new, value_new
        trace.append(value)
        if delta <= algorithm.inner_tolerance:
            break
    return p_cur, x_cur, tuple(trace)


def _ao_single_start(
    config: SystemConfig,
    channels: ChannelSet,
    layout: VariableLayout,
    start: PrecoderSet,
    algorithm: AlgorithmConfig,
    weights: np.ndarray,
) -> tuple[PrecoderSet, CommonRateSplit, float, ConvergenceLedger, bool]:
    tic = time.perf_counter()
    p = start
    report = achievable_rates(config, channels, p)
    split = _recover_split(
        np.zeros(config.num_irs), report.common_rate_bound, layout.active_x, weights
    )
    wsr = float(
        np.sum(weights * (np.array(split.portions) + np.array(report.private_rates)))
    )
    outer_trace = [wsr]
    inner_traces: list[tuple[float, ...]] = []
    converged = False
    for n in range(algorithm.max_outer_iterations):
        state = mmse_state(config, channels, p)
        x0 = -np.array(split.portions)
        p_new, x, trace = sca_inner_loop(
            config,
            channels,
            state,
            p,
            algorithm,
            layout=layout,
            x_in=x0,
            weights=weights,
            first_subproblem_infeasible_is_scenario=(n == 0),
        )
        inner_traces.append(trace)
        report = achievable_rates(config, channels, p_new)
        split_new = _recover_split(x, report.common_rate_bound, layout.active_x, weights)
        wsr_new = float(
            np.sum(
                weights * (np.array(split_new.portions) + np.array(report.private_rates))
            )
        )
        if wsr_new < wsr:
            # The weight update closes the rate identity exactly but is not
            # the base-2 minimizer of the augmented WMSE, so a candidate can
            # promise more shared rate than is decodable and land slightly
            # below the incumbent after the split is projected back.  Keep
            # the incumbent; no further progress is possible through this
            # bound.
            converged = True
            break
        p, split = p_new, split_new
        outer_trace.append(wsr_new)
        if abs(wsr_new - wsr) <= algorithm.outer_tolerance:
            wsr = wsr_new
            converged = True
            break
        wsr = wsr_new
    ledger = ConvergenceLedger(
        inner_traces=tuple(inner_traces),
        outer_trace=tuple(outer_trace),
        wall_time=time.perf_counter() - tic,
    )
    return p, split, wsr, ledger, converged


def ao_outer_loop(
    config: SystemConfig,
    channels: ChannelSet,
    strategy: Strategy,
    algorithm: AlgorithmConfig | None = None,
    extra_starts: tuple[PrecoderSet, ...] = (),
) -> RatePoint:
    """Alternate closed-form equalizer/weight updates with the SCA precoder
    update; return the best operating point across all starts."""
    if algorithm is None:
        algorithm = AlgorithmConfig()
    ensure_valid(config, channels)
    strategy.validate(config.num_irs)
    layout = layout_for_strategy(config, strategy, channels)
    u = np.asarray(config.rate_weights, dtype=np.float64)
    weights = u / u.max()

    starts: list[PrecoderSet] = [
        initialize_precoders(config, channels, strategy, i, seed=algorithm.seed)
        for i in range(1 + algorithm.num_random_starts)
    ]
    for extra in extra_starts:
        masked = _apply_layout_mask(layout, extra)
        starts.append(
            _ensure_energy_feasible(
                config, channels, masked, layout, algorithm.feasibility_tolerance
            )
        )

    best: tuple | None = None
    infeasible: list[str] = []
    failures: list[str] = []
    for start in starts:
        try:
            outcome = _ao_single_start(config, channels, layout, start, algorithm, weights)
        except InfeasibleScenarioError as exc:
            infeasible.append(str(exc))
            continue
        except _StartFailure as exc:
            failures.append(str(exc))
            continue
        if best is None or outcome[2] > best[2]:
            best = outcome
    if best is None:
        if infeasible:
            raise InfeasibleScenarioError(infeasible[0])
        raise SolverFailureError(
            f"all {len(starts)} starts failed numerically: {failures[:3]}"
        )

    p, split, _, ledger, converged = best
    total = total_transmit_power(p)
    if total > config.total_power:
        p = p.scaled(float(np.sqrt(config.total_power / total)))
        report = achievable_rates(config, channels, p)
        x_like = -np.array(split.portions)
        split = _recover_split(x_like, report.common_rate_bound, layout.active_x, weights)
    wsr = weighted_sum_rate(config, channels, p, split, tolerance=1e-6)
    report = achievable_rates(config, channels, p)
    per_ir = tuple(
        float(c + r) for c, r in zip(split.portions, report.private_rates)
    )
    return RatePoint(
        wsr=wsr,
        per_ir_total_rates=per_ir,
        common_rate_split=split,
        harvested_energy_total=total_harvested_energy(config, channels, p),
        power_breakdown=p.breakdown(),
        iterations_outer=len(ledger.outer_trace) - 1,
        converged=converged,
        precoders=p,
        ledger=ledger,
    )


def run_strategy_suite(
    config: SystemConfig,
    channels: ChannelSet,
    algorithm: AlgorithmConfig | None = None,
    strategies: tuple[StrategyKind, ...] | None = None,
    warm_starts: dict[StrategyKind, PrecoderSet] | None = None,
) -> dict[StrategyKind, RatePoint]:
    """Run every applicable strategy on one scenario.

    SCSIC evaluates both decoding orders and keeps the better.  The
    rate-splitting run is additionally seeded from the converged MULP and
    SCSIC precoders (both are feasible points of the rate-splitting problem),
    which pins down the expected dominance ordering up to solver tolerance.
    """
    if algorithm is None:
        algorithm = AlgorithmConfig()
    if strategies is None:
        strategies = (StrategyKind.RS, StrategyKind.MULP, StrategyKind.SCSIC)
    warm_starts = warm_starts or {}
    wanted = set(strategies)
    if config.num_irs != 2:
        wanted.discard(StrategyKind.SCSIC)

    results: dict[StrategyKind, RatePoint] = {}

    def extras_for(kind: StrategyKind) -> tuple[PrecoderSet, ...]:
        out = []
        if kind in warm_starts:
            out.append(warm_starts[kind])
        return tuple(out)

    need_mulp = StrategyKind.MULP in wanted or StrategyKind.RS in wanted
    mulp_point = None
    if need_mulp:
        mulp_point = ao_outer_loop(
            config, channels, Strategy.mulp(), algorithm, extras_for(StrategyKind.MULP)
        )
        if StrategyKind.MULP in wanted:
            results[StrategyKind.MULP] = mulp_point

    scsic_point = None
    if StrategyKind.SCSIC in wanted:
        candidates = []
        for order in ((0, 1), (1, 0)):
            candidates.append(
                ao_outer_loop(
                    config,
                    channels,
                    Strategy.scsic(order),
                    algorithm,
                    extras_for(StrategyKind.SCSIC),
                )
            )
        scsic_point = max(candidates, key=lambda rp: rp.wsr)
        results[StrategyKind.SCSIC] = scsic_point

    if StrategyKind.RS in wanted:
        seeds = list(extras_for(StrategyKind.RS))
        if mulp_point is not None:
            seeds.append(mulp_point.precoders)
        if scsic_point is not None:
            seeds.append(scsic_point.precoders)
        results[StrategyKind.RS] = ao_outer_loop(
            config, channels, Strategy.rs(), algorithm, tuple(seeds)
        )
    return results
