"""Precoder optimization for multi-antenna SWIPT broadcast channels.

A transmitter with N_t antennas serves K single-antenna information
receivers and J single-antenna energy receivers.  The library maximizes the
weighted sum rate of the information receivers subject to a total transmit
power budget and a minimum total harvested energy, under three strategies:
rate-splitting (RS), multi-user linear precoding (MULP) and two-user
superposition coding with successive interference cancellation (SCSIC).
"""

from .algorithms import (
    AlgorithmConfig,
    ConvergenceLedger,
    ao_outer_loop,
    initialize_precoders,
    run_strategy_suite,
    sca_inner_loop,
)
from .channels import (
    DeterministicChannelSpec,
    build_paper_channels,
    build_random_channels,
)
from .physics import (
    RateReport,
    achievable_rates,
    harvested_energy,
    max_harvestable_energy,
    sinr_common,
    sinr_private,
    total_harvested_energy,
    weighted_sum_rate,
)
from .subproblem import (
    ConvexSubproblem,
    SolverResult,
    SolverTolerances,
    assemble_from_state,
    solve,
    taylor_lower_bound,
)
from .types import (
    ChannelSet,
    CommonRateSplit,
    InfeasibleScenarioError,
    InfeasibleSplitError,
    PowerBreakdown,
    PrecoderSet,
    RatePoint,
    ScenarioError,
    SolverFailureError,
    Strategy,
    StrategyKind,
    SystemConfig,
    total_transmit_power,
    validate_scenario,
)
from .wmmse import (
    EqualizerState,
    augmented_wmse,
    mmse_equalizers,
    mmse_state,
    mmse_values,
    mse,
    optimal_weights,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
