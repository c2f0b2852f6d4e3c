"""
MIT License

Copyright (c) 2025-present The qkd-efficiency Authors

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the "Software"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software, and to permit persons to whom the Software is
furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all
copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
SOFTWARE.
"""

from __future__ import annotations

import math

import pytest

from qkd_efficiency.enums import ChannelKind, PairModel, ProtocolId
from qkd_efficiency.errors import ConfigError, DegenerateDenominatorError
from qkd_efficiency.link_model import ChannelParams, LinkPoint
from qkd_efficiency.protocols import ProtocolSpec
from qkd_efficiency.quantum_channels import DisturbanceProfile, profile_from_visibility
from qkd_efficiency.simulator import (
    CATEGORIES,
    CHUNK_FRAMES,
    FrameTally,
    SimConfig,
    StatisticalCheck,
    compare_to_analytic,
    simulate,
)

from .conftest import TEST_SIM_ETA, TEST_SIM_FRAMES, TEST_SIM_NOISE, TEST_VISIBILITY


def _point(
    *,
    eta: float,
    n: float,
    m: int,
    p_pair: float,
    protocol: str = 'bbm92-4',
    decoherence: DisturbanceProfile,
    symmetric: bool = False,
) -> LinkPoint:
    return LinkPoint(
        m=m,
        p_pair=p_pair,
        channel=ChannelParams.symmetric(eta, n),
        protocol=ProtocolSpec.from_id(protocol, symmetric=symmetric),
        decoherence=decoherence,
    )


@pytest.fixture()
def small_point(dephasing: DisturbanceProfile) -> LinkPoint:
    return _point(eta=0.1, n=1e-3, m=2, p_pair=0.05, decoherence=dephasing)


@pytest.mark.parametrize(
    'kwargs',
    [
        {'frames': 0},
        {'frames': 1.5},
        {'frames': 10, 'seed': -1},
        {'frames': 10, 'seed': 1 << 64},
        {'frames': 10, 'blocks': 0},
        {'frames': 10, 'workers': 0},
        {'frames': 10, 'pair_model': 'geometric'},
    ],
)
def test_sim_config_rejects(small_point: LinkPoint, kwargs: dict[str, object]) -> None:
    with pytest.raises(ConfigError):
        SimConfig(small_point, **kwargs)  # type: ignore


def test_sim_config_rejects_six_state_sarg04(small_point: LinkPoint) -> None:
    with pytest.raises(ConfigError) as excinfo:
        SimConfig(small_point.replace(protocol=ProtocolSpec.from_id('sarg04-6')), frames=10)
    assert excinfo.value.field == 'protocol'


def test_sim_config_partition(small_point: LinkPoint) -> None:
    config = SimConfig(small_point, frames=3 * CHUNK_FRAMES + 17, blocks=3)
    assert config.chunks == 4
    assert config.partition() == [(0, 1), (2,), (3,)]
    assert SimConfig(small_point, frames=10, blocks=8).partition() == [(0,)]
    assert config.to_dict()['pair_model'] == 'poisson'


def test_tally_bookkeeping(small_point: LinkPoint) -> None:
    tally = simulate(SimConfig(small_point, frames=200_000, seed=5))

    assert tally.frames_total == 200_000
    assert tally.events > 0
    assert tally.conclusive + tally.inconclusive == tally.events * tally.m
    assert sum(tally.categories.values()) == tally.events
    assert set(tally.categories) == set(CATEGORIES)
    assert sum(counts['sifted'] for counts in tally.errors_per_basis.values()) == tally.conclusive
    errors = sum(counts['errors'] for counts in tally.errors_per_basis.values())
    assert sum(tally.errors_per_category.values()) == errors
    assert set(tally.errors_per_category) == set(CATEGORIES)
    for counts in tally.errors_per_basis.values():
        assert 0 <= counts['errors'] <= counts['sifted']
    assert tally.multi_click_discards >= 0
    assert 0.0 < tally.sifted_fraction <= 1.0


def test_simulation_is_deterministic(small_point: LinkPoint) -> None:
    frames = 3 * CHUNK_FRAMES + 17
    tallies = [
        simulate(SimConfig(small_point, frames=frames, seed=42, pair_model=PairModel.BERNOULLI2, blocks=blocks))
        for blocks in (1, 3, 1)
    ]
    assert tallies[0] == tallies[1] == tallies[2]

    other = simulate(SimConfig(small_point, frames=frames, seed=43, pair_model=PairModel.BERNOULLI2))
    assert other != tallies[0]


def test_noiseless_events() -> None:
    p = 1e-3
    frames = 1_000_000
    point = _point(eta=1.0, n=0.0, m=3, p_pair=p, decoherence=DisturbanceProfile(0.0, 0.0, 0.0))
    tally = simulate(SimConfig(point, frames=frames, seed=1))

    # Every frame with a pair is detected.
    check = StatisticalCheck.binomial('events', tally.events, frames, -math.expm1(-p), sigmas=4.0, allowance=0.0)
    assert check.passed
    assert tally.categories['signal_background'] == 0
    assert tally.categories['background_background'] == 0

    # Without decoherence only the uncorrelated picks of multi-pair frames can err.
    errors = sum(counts['errors'] for counts in tally.errors_per_basis.values())
    assert tally.errors_per_category['signal_signal'] == 0
    assert errors == tally.errors_per_category['multi_pair']
    assert errors <= tally.m * tally.categories['multi_pair']


@pytest.mark.parametrize('pair_model', [PairModel.POISSON, PairModel.BERNOULLI2])
def test_noiseless_single_pairs_never_err(pair_model: PairModel) -> None:
    protocol = ProtocolSpec.from_id('bbm92-4', q=1.0)
    point = _point(eta=1.0, n=0.0, m=1, p_pair=0.05, decoherence=DisturbanceProfile(0.0, 0.0, 0.0))
    tally = simulate(SimConfig(point.replace(protocol=protocol), frames=1_000_000, seed=3, pair_model=pair_model))

    assert tally.categories['signal_signal'] > 40_000
    assert tally.errors_per_category['signal_signal'] == 0
    assert tally.errors_per_category['signal_background'] == 0
    assert tally.errors_per_category['background_background'] == 0
    # Only Z is measured, so every qubit is sifted.
    assert tally.conclusive == tally.qubits
    assert tally.errors_per_basis['X'] == {'sifted': 0, 'errors': 0}

    if pair_model is PairModel.BERNOULLI2:
        check = StatisticalCheck.binomial('events', tally.events, tally.frames_total, 0.05 + 0.5 * 0.05**2, allowance=0.0)
        assert check.passed


@pytest.mark.parametrize(
    ('symmetric', 'q'),
    [
        (True, 0.5),
        (False, 0.8),
        (False, 0.3),
    ],
)
def test_sifted_fraction_follows_basis_bias(symmetric: bool, q: float) -> None:
    protocol = ProtocolSpec.from_id('bbm92-4', symmetric=symmetric, q=q)
    assert protocol.q == q
    point = _point(eta=1.0, n=0.0, m=4, p_pair=0.01, decoherence=DisturbanceProfile(0.0, 0.0, 0.0))
    tally = simulate(SimConfig(point.replace(protocol=protocol), frames=400_000, seed=8, pair_model='bernoulli2'))

    assert tally.qubits > 10_000
    expected = q**2 + (1.0 - q) ** 2
    check = StatisticalCheck.binomial('sifted', tally.conclusive, tally.qubits, expected, sigmas=4.0, allowance=0.0)
    assert check.passed, (check.observed, expected)

    # Alice's key basis share among the sifted qubits is q**2 / (q**2 + (1 - q)**2).
    z_share = q**2 / expected
    sifted_z = tally.errors_per_basis['Z']['sifted']
    assert StatisticalCheck.binomial('z_share', sifted_z, tally.conclusive, z_share, sigmas=4.0, allowance=0.0).passed


def test_tally_merge(small_point: LinkPoint) -> None:
    first = simulate(SimConfig(small_point, frames=CHUNK_FRAMES, seed=1))
    second = simulate(SimConfig(small_point, frames=CHUNK_FRAMES, seed=2))
    merged = first + second

    assert merged.frames_total == 2 * CHUNK_FRAMES
    assert merged.events == first.events + second.events
    assert merged.categories['signal_signal'] == first.categories['signal_signal'] + second.categories['signal_signal']
    assert first + FrameTally.empty(ProtocolId.BBM92_4, 2, 'poisson') == first

    with pytest.raises(ConfigError):
        first + FrameTally.empty('bbm92-4', 3, 'poisson')
    with pytest.raises(ConfigError):
        first + FrameTally.empty('bbm92-4', 2, 'bernoulli2')


def test_empty_tally() -> None:
    tally = FrameTally.empty('sarg04-4', 4, PairModel.POISSON)
    assert tally.qubits == 0
    assert tally.sifted_fraction == 0.0
    assert set(tally.errors_per_basis) == {'X', 'Z'}
    assert set(FrameTally.empty('bbm92-6', 4, 'poisson').errors_per_basis) == {'X', 'Y', 'Z'}

    with pytest.raises(DegenerateDenominatorError):
        tally.qber('X')


def test_compare_rejects(small_point: LinkPoint) -> None:
    tally = FrameTally.empty('bbm92-4', 2, 'poisson')
    with pytest.raises(DegenerateDenominatorError):
        compare_to_analytic(tally, small_point)

    tally = simulate(SimConfig(small_point, frames=1000))
    with pytest.raises(ConfigError):
        compare_to_analytic(tally, small_point.replace(m=3))
    with pytest.raises(ConfigError):
        compare_to_analytic(tally, small_point.replace(protocol=ProtocolSpec.from_id('sarg04-4')))


def test_statistical_check() -> None:
    check = StatisticalCheck.binomial('fair', 5_050, 10_000, 0.5, allowance=0.0)
    assert check.observed == 0.505
    assert check.sigma == pytest.approx(0.005)
    assert check.z == pytest.approx(1.0)
    assert check.passed

    check = StatisticalCheck.binomial('biased', 5_200, 10_000, 0.5, allowance=0.0)
    assert check.z == pytest.approx(4.0)
    assert not check.passed
    # A systematic allowance of 5% of the prediction covers it.
    assert StatisticalCheck.binomial('biased', 5_200, 10_000, 0.5).passed

    check = StatisticalCheck.binomial('zero', 0, 100, 0.0)
    assert check.z is None
    assert check.passed
    assert check.to_dict()['name'] == 'zero'


@pytest.mark.slow
def test_monte_carlo_agrees_with_model(dephasing: DisturbanceProfile) -> None:
    point = _point(eta=TEST_SIM_ETA, n=TEST_SIM_NOISE, m=2, p_pair=0.01, decoherence=dephasing, symmetric=True)
    tally = simulate(SimConfig(point, frames=TEST_SIM_FRAMES, seed=0))
    report = compare_to_analytic(tally, point)

    assert tally.events > 500
    assert report.passed, report.failed
    assert {check.name for check in report.checks} == {'event_fraction', 'signal_background_share', 'qber_X', 'qber_Z'}
    assert report.category_shares['signal_signal'] > 0.9


@pytest.mark.slow
def test_monte_carlo_negative_control(dephasing: DisturbanceProfile) -> None:
    point = _point(eta=0.2, n=0.005, m=2, p_pair=0.05, decoherence=dephasing)
    tally = simulate(SimConfig(point, frames=200_000, seed=0, pair_model='bernoulli2'))

    truth = compare_to_analytic(tally, point)
    assert 'event_fraction' not in truth.failed

    # Twice the background predicts far more events than were simulated.
    wrong = point.replace(channel=ChannelParams.symmetric(0.2, 0.01))
    report = compare_to_analytic(tally, wrong)
    assert not report.passed
    assert 'event_fraction' in report.failed


@pytest.mark.slow
def test_sarg04_conclusive_fraction() -> None:
    profile = profile_from_visibility(ChannelKind.DEPOLARIZING, TEST_VISIBILITY, TEST_VISIBILITY)
    point = _point(eta=1.0, n=0.0, m=8, p_pair=1e-3, protocol='sarg04-4', decoherence=profile)
    tally = simulate(SimConfig(point, frames=2_000_000, seed=0))

    D = 0.0198
    errors = sum(counts['errors'] for counts in tally.errors_per_basis.values())
    assert StatisticalCheck.binomial('conditional_error', errors, tally.conclusive, 2.0 * D / (1.0 + 2.0 * D)).passed
    assert StatisticalCheck.binomial('conclusive', tally.conclusive, tally.qubits, 0.25 + D / 2.0).passed
    assert tally.normalized_conclusive_fraction == pytest.approx(0.5 + D, abs=0.02)


@pytest.mark.slow
def test_workers_do_not_change_result(small_point: LinkPoint) -> None:
    frames = 4 * CHUNK_FRAMES
    serial = simulate(SimConfig(small_point, frames=frames, seed=9, blocks=4))
    parallel = simulate(SimConfig(small_point, frames=frames, seed=9, blocks=4, workers=2))
    assert serial == parallel
