import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rs_swipt import (
    ChannelSet,
    CommonRateSplit,
    InfeasibleSplitError,
    PrecoderSet,
    SystemConfig,
)
from rs_swipt.physics import (
    achievable_rates,
    harvested_energy,
    max_harvestable_energy,
    sinr_common,
    sinr_private,
    total_harvested_energy,
    weighted_sum_rate,
)
from conftest import random_precoders, random_scenario


def scalar_config(k=1, j=0, noise=1.0, n_t=2, weights=None):
    return SystemConfig(
        num_tx_antennas=n_t,
        num_irs=k,
        num_ers=j,
        total_power=1.0,
        noise_power_ir=noise,
        rate_weights=weights or (1.0,) * k,
    )


class TestSinrCommon:
    def test_zero_common_precoder(self):
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=np.zeros(2), private=np.array([[1.0, 0.0]]), energy=np.zeros((0, 2)))
        assert sinr_common(cfg, ch, p, 0) == 0.0

    def test_hand_evaluated_two_term_case(self):
        # h = [1, i], p_c = [1, 1]/sqrt(2), p_1 = [0, 1], sigma = 1.
        h = np.array([1.0, 1.0j])
        p_c = np.array([1.0, 1.0]) / np.sqrt(2)
        p_1 = np.array([0.0, 1.0])
        # Independent scalar arithmetic:
        num = abs(np.conj(h) @ p_c) ** 2
        den = abs(np.conj(h) @ p_1) ** 2 + 1.0
        assert num / den == pytest.approx(0.5)
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=h.reshape(1, -1), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=p_c, private=p_1.reshape(1, -1), energy=np.zeros((0, 2)))
        assert sinr_common(cfg, ch, p, 0) == pytest.approx(0.5)

    def test_unit_channel_unit_power(self):
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=np.array([1.0, 0.0]), private=np.zeros((1, 2)), energy=np.zeros((0, 2)))
        assert sinr_common(cfg, ch, p, 0) == pytest.approx(1.0)

    def test_energy_beams_do_not_interfere(self):
        cfg = scalar_config(k=1, j=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.array([[1.0, 0.0]]))
        p = PrecoderSet(
            common=np.array([1.0, 0.0]),
            private=np.zeros((1, 2)),
            energy=np.array([[5.0, 0.0]]),
        )
        assert sinr_common(cfg, ch, p, 0) == pytest.approx(1.0)


class TestSinrPrivate:
    def test_zero_private_precoder(self):
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=np.zeros(2), private=np.zeros((1, 2)), energy=np.zeros((0, 2)))
        assert sinr_private(cfg, ch, p, 0) == 0.0

    def test_interference_free_single_receiver(self):
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=np.zeros(2), private=np.array([[1.0, 0.0]]), energy=np.zeros((0, 2)))
        assert sinr_private(cfg, ch, p, 0) == pytest.approx(1.0)

    def test_equal_interferer_halves(self):
        cfg = scalar_config(k=2, weights=(1.0, 1.0))
        ch = ChannelSet(
            ir_channels=np.array([[1.0, 0.0], [0.0, 1.0]]), er_channels=np.zeros((0, 2))
        )
        p = PrecoderSet(
            common=np.zeros(2),
            private=np.array([[1.0, 0.0], [1.0, 0.0]]),
            energy=np.zeros((0, 2)),
        )
        assert sinr_private(cfg, ch, p, 0) == pytest.approx(0.5)

    def test_common_precoder_already_removed(self):
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(
            common=np.array([9.0, 0.0]),
            private=np.array([[1.0, 0.0]]),
            energy=np.zeros((0, 2)),
        )
        assert sinr_private(cfg, ch, p, 0) == pytest.approx(1.0)


class TestRates:
    def test_all_zero_precoders(self):
        cfg = scalar_config(k=2, weights=(1, 1))
        ch = ChannelSet(ir_channels=np.eye(2), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=np.zeros(2), private=np.zeros((2, 2)), energy=np.zeros((0, 2)))
        report = achievable_rates(cfg, ch, p)
        assert report.common_rates == (0.0, 0.0)
        assert report.private_rates == (0.0, 0.0)
        assert report.common_rate_bound == 0.0

    def test_unit_sinr_gives_one_bit(self):
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=np.zeros(2), private=np.array([[1.0, 0.0]]), energy=np.zeros((0, 2)))
        assert achievable_rates(cfg, ch, p).private_rates[0] == pytest.approx(1.0)

    def test_symmetric_scenario_equalizes_common_rates(self):
        cfg = scalar_config(k=2, weights=(1, 1))
        ch = ChannelSet(
            ir_channels=np.array([[1.0, 0.0], [0.0, 1.0]]), er_channels=np.zeros((0, 2))
        )
        p = PrecoderSet(
            common=np.array([1.0, 1.0]) / np.sqrt(2),
            private=np.array([[0.5, 0.0], [0.0, 0.5]]),
            energy=np.zeros((0, 2)),
        )
        report = achievable_rates(cfg, ch, p)
        assert report.common_rates[0] == pytest.approx(report.common_rates[1])
        assert report.common_rate_bound == pytest.approx(report.common_rates[0])


class TestHarvestedEnergy:
    def test_zero_precoders(self):
        cfg = scalar_config(k=1, j=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.array([[1.0, 0.0]]))
        p = PrecoderSet(common=np.zeros(2), private=np.zeros((1, 2)), energy=np.zeros((1, 2)))
        assert harvested_energy(cfg, ch, p, 0) == 0.0

    def test_hand_evaluated_case(self):
        # g = [1, 0], p_c = [1, 0], f = [0, 1]: only the common beam lands.
        cfg = scalar_config(k=1, j=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.array([[1.0, 0.0]]))
        p = PrecoderSet(
            common=np.array([1.0, 0.0]),
            private=np.zeros((1, 2)),
            energy=np.array([[0.0, 1.0]]),
        )
        assert harvested_energy(cfg, ch, p, 0) == pytest.approx(1.0)

    def test_information_beams_count(self):
        cfg = scalar_config(k=1, j=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.array([[1.0, 1.0]]))
        p = PrecoderSet(
            common=np.zeros(2), private=np.array([[1.0, 0.0]]), energy=np.zeros((1, 2))
        )
        assert harvested_energy(cfg, ch, p, 0) == pytest.approx(1.0)

    def test_benchmark_harvest_ceiling_is_forty_microwatts(self, bench_config, bench_channels):
        # Cauchy-Schwarz: all power on the matched beam gives P_t ||g||^2.
        g = bench_channels.er_channels[0]
        p = PrecoderSet(
            common=np.sqrt(bench_config.total_power) * g / np.linalg.norm(g),
            private=np.zeros((2, 4)),
            energy=np.zeros((1, 4)),
        )
        q = total_harvested_energy(bench_config, bench_channels, p)
        assert q == pytest.approx(40e-6, rel=1e-12)
        assert max_harvestable_energy(bench_config, bench_channels) == pytest.approx(
            40e-6, rel=1e-12
        )

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6), phase=st.floats(-np.pi, np.pi))
    def test_phase_rotation_invariance(self, seed, phase):
        cfg, ch = random_scenario(seed, num_ers=1)
        p = random_precoders(cfg, seed)
        rotated = PrecoderSet(
            common=np.exp(1j * phase) * p.common,
            private=np.exp(1j * phase) * p.private,
            energy=np.exp(1j * phase) * p.energy,
        )
        assert harvested_energy(cfg, ch, rotated, 0) == pytest.approx(
            harvested_energy(cfg, ch, p, 0), rel=1e-10
        )

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_cauchy_schwarz_upper_bound(self, seed):
        from rs_swipt import total_transmit_power

        cfg, ch = random_scenario(seed, num_ers=1)
        p = random_precoders(cfg, seed)
        bound = (
            cfg.harvest_efficiency
            * np.sum(np.abs(ch.er_channels[0]) ** 2)
            * total_transmit_power(p)
        )
        assert harvested_energy(cfg, ch, p, 0) <= bound * (1 + 1e-12)


class TestScalingMonotonicity:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6), factor=st.floats(1.01, 10.0))
    def test_uniform_power_scaling_raises_every_sinr(self, seed, factor):
        cfg, ch = random_scenario(seed, num_irs=2)
        p = random_precoders(cfg, seed, scale=0.5)
        scaled = p.scaled(factor)
        for k in range(cfg.num_irs):
            if sinr_common(cfg, ch, p, k) > 0:
                assert sinr_common(cfg, ch, scaled, k) > sinr_common(cfg, ch, p, k)
            if sinr_private(cfg, ch, p, k) > 0:
                assert sinr_private(cfg, ch, scaled, k) > sinr_private(cfg, ch, p, k)

    def test_mulp_reduction_kills_common_stream(self):
        cfg, ch = random_scenario(3, num_irs=2)
        p = random_precoders(cfg, 3)
        quiet = PrecoderSet(
            common=np.zeros_like(p.common), private=p.private, energy=p.energy
        )
        assert sinr_common(cfg, ch, quiet, 0) == 0.0
        assert sinr_common(cfg, ch, quiet, 1) == 0.0


class TestWeightedSumRate:
    def test_single_receiver_private_only(self):
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=np.array([[np.sqrt(3.0), 0.0]]), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=np.zeros(2), private=np.array([[1.0, 0.0]]), energy=np.zeros((0, 2)))
        # SINR = 3 so the rate is exactly 2 bits.
        assert weighted_sum_rate(cfg, ch, p, CommonRateSplit.zeros(1)) == pytest.approx(2.0)

    def test_split_arithmetic(self):
        cfg = scalar_config(k=2, weights=(1.0, 1.0), n_t=2)
        ch = ChannelSet(
            ir_channels=np.array([[10.0, 0.0], [0.0, 10.0]]), er_channels=np.zeros((0, 2))
        )
        p = PrecoderSet(
            common=np.array([3.0, 3.0]),
            private=np.array([[np.sqrt(3.0), 0.0], [0.0, np.sqrt(7.0)]]),
            energy=np.zeros((0, 2)),
        )
        report = achievable_rates(cfg, ch, p)
        split = CommonRateSplit(portions=(0.5, 0.5))
        assert report.common_rate_bound > 1.0
        expected = 0.5 + report.private_rates[0] + 0.5 + report.private_rates[1]
        assert weighted_sum_rate(cfg, ch, p, split) == pytest.approx(expected)

    def test_infeasible_split_rejected(self):
        cfg = scalar_config(k=1)
        ch = ChannelSet(ir_channels=np.array([[1.0, 0.0]]), er_channels=np.zeros((0, 2)))
        p = PrecoderSet(common=np.zeros(2), private=np.array([[1.0, 0.0]]), energy=np.zeros((0, 2)))
        with pytest.raises(InfeasibleSplitError):
            weighted_sum_rate(cfg, ch, p, CommonRateSplit(portions=(0.5,)))
