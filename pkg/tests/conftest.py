import numpy as np
import pytest

from rs_swipt import SystemConfig
from rs_swipt.algorithms import AlgorithmConfig
from rs_swipt.channels import DeterministicChannelSpec, build_paper_channels

THETA_80 = 4 * np.pi / 9
THETA_40 = 2 * np.pi / 9


@pytest.fixture(scope="session")
def bench_config():
    """The bundled 2-IR / 1-ER benchmark operating point (35 uW requirement)."""
    return SystemConfig(
        num_tx_antennas=4,
        num_irs=2,
        num_ers=1,
        total_power=0.01,  # 10 dBm
        noise_power_ir=1e-6,  # -30 dBm
        rate_weights=(1.0, 1.0),
        energy_threshold=35e-6,
    )


@pytest.fixture(scope="session")
def bench_channels():
    spec = DeterministicChannelSpec(gamma=1.0, theta=THETA_80, beta=THETA_80 / 2)
    return build_paper_channels(spec, 4)


@pytest.fixture()
def fast_algorithm():
    """Few starts and loose-but-valid caps, for unit-test-speed optimization."""
    return AlgorithmConfig(num_random_starts=1, max_outer_iterations=60)


def random_scenario(seed, n_t=None, num_irs=None, num_ers=None, energy_fraction=0.0):
    """Small random scenario for property tests; deterministic per seed."""
    from rs_swipt.channels import build_random_channels
    from rs_swipt.physics import max_harvestable_energy

    rng = np.random.default_rng(seed)
    n_t = n_t if n_t is not None else int(rng.integers(2, 5))
    k = num_irs if num_irs is not None else int(rng.integers(1, 4))
    j = num_ers if num_ers is not None else int(rng.integers(0, 2))
    channels = build_random_channels(n_t, k, j, seed=seed)
    config = SystemConfig(
        num_tx_antennas=n_t,
        num_irs=k,
        num_ers=j,
        total_power=float(rng.uniform(0.5, 4.0)),
        noise_power_ir=float(rng.uniform(0.2, 2.0)),
        rate_weights=tuple(float(u) for u in rng.uniform(0.3, 2.0, k)),
    )
    if energy_fraction > 0 and j > 0:
        cap = max_harvestable_energy(config, channels)
        config = SystemConfig(
            **{**config.__dict__, "energy_threshold": energy_fraction * cap}
        )
    return config, channels


def random_precoders(config, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    n_t, k, j = config.num_tx_antennas, config.num_irs, config.num_ers

    def draw(rows):
        return scale * (rng.standard_normal((rows, n_t)) + 1j * rng.standard_normal((rows, n_t)))

    from rs_swipt import PrecoderSet

    return PrecoderSet(common=draw(1)[0], private=draw(k), energy=draw(j))
