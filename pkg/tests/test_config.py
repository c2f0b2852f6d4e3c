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

from pathlib import Path

import pytest

from qkd_efficiency.config import FIELDS, RunConfig
from qkd_efficiency.enums import PairModel, ProtocolId
from qkd_efficiency.errors import ConfigError

from .conftest import TEST_ETA, TEST_P_STAR, TEST_VISIBILITY


def test_defaults() -> None:
    config = RunConfig()
    for key, (_, default) in FIELDS.items():
        assert getattr(config, key) == default

    assert config.visibilities == (0.98, 0.98)
    assert config.protocol_specs()[0].id is ProtocolId.BBM92_4
    assert config.sweep_axes() == []


def test_from_file(config_file: Path) -> None:
    config = RunConfig.from_file(config_file)

    assert config.m == 12
    assert config.p_pair == TEST_P_STAR
    assert config.eta_a == config.eta_b == TEST_ETA
    assert config.n_a == 1e-9

    point = config.point()
    assert point.m == 12
    assert point.channel.n_b == 1e-9
    assert point.decoherence.D_X == pytest.approx((1.0 - TEST_VISIBILITY**2) / 2.0)
    assert point.decoherence.D_Z == pytest.approx(0.0, abs=1e-12)


def test_from_file_rejects(tmp_path: Path) -> None:
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_file(tmp_path / 'missing.env')
    assert excinfo.value.field == 'config'

    path = tmp_path / 'bad.env'
    path.write_text('M=3\nETA_A\n')
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_file(path)
    assert excinfo.value.field == 'ETA_A'

    path.write_text('COLOUR=blue\n')
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_file(path)
    assert excinfo.value.field == 'COLOUR'


def test_key_normalization() -> None:
    config = RunConfig.from_mapping({'P-PAIR': '0.01', ' Pair_Model ': 'bernoulli2', 'FRAMES': '1e6'})
    assert config.p_pair == 0.01
    assert config.pair_model == PairModel.BERNOULLI2.value
    assert config.frames == 1_000_000

    config = RunConfig.from_mapping({'symmetric': 'yes', 'protocols': 'bbm92-4, sarg04-4', 'full_xi': 'off'})
    assert config.symmetric is True
    assert config.protocols == ('bbm92-4', 'sarg04-4')
    assert config.full_xi is False
    assert [spec.id for spec in config.protocol_specs()] == [ProtocolId.BBM92_4, ProtocolId.SARG04_4]


@pytest.mark.parametrize(
    ('key', 'value'),
    [
        ('m', 'twelve'),
        ('m', '2.5'),
        ('eta_a', 'high'),
        ('symmetric', 'maybe'),
        ('frames', ''),
    ],
)
def test_parse_errors(key: str, value: str) -> None:
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_mapping({key: value})
    assert excinfo.value.field == key


@pytest.mark.parametrize(
    ('key', 'value'),
    [
        ('v_a', 1.5),
        ('v_b', -0.1),
        ('eta_a', 0.0),
        ('eta_b', 1.01),
        ('n_a', 1.0),
        ('n_b', -1e-9),
        ('m', 0),
        ('p_pair', 0.6),
        ('p_floor', 0.6),
        ('dt', 0.0),
        ('q', 0.0),
        ('sift_factor', 1.5),
        ('frames', 0),
        ('workers', 0),
        ('seed', -1),
        ('kind', 'amplitude-damping'),
        ('pair_model', 'geometric'),
        ('protocol', 'bb84'),
        ('axis_a', 'n_ratio_A:1e-7'),
    ],
)
def test_range_errors(key: str, value: object) -> None:
    with pytest.raises(ConfigError) as excinfo:
        RunConfig(**{key: value})
    assert excinfo.value.field == key


def test_unknown_protocol_in_list() -> None:
    with pytest.raises(ConfigError) as excinfo:
        RunConfig(protocols=('bbm92-4', 'e91'))
    assert excinfo.value.field == 'protocols'


def test_unknown_key() -> None:
    with pytest.raises(ConfigError) as excinfo:
        RunConfig(colour='blue')
    assert excinfo.value.field == 'colour'


def test_lambda_override() -> None:
    with pytest.raises(ConfigError) as excinfo:
        RunConfig(lambda_a=0.02)
    assert excinfo.value.field == 'lambda_a'

    config = RunConfig(kind='depolarizing', lambda_a=0.1, v_b=0.9)
    assert config.visibilities == pytest.approx((0.9, 0.9))
    profile = config.profile()
    assert profile.D_X == pytest.approx(profile.D_Z)
    assert profile.D_Z == pytest.approx((1.0 - 0.81) / 2.0)


def test_merged() -> None:
    config = RunConfig(m=4)
    merged = config.merged({'m': None, 'p-pair': '0.02', 'eta_b': 0.5})

    assert merged.m == 4
    assert merged.p_pair == 0.02
    assert merged.eta_b == 0.5
    assert config.p_pair is None
    assert merged != config

    with pytest.raises(ConfigError):
        config.merged({'colour': 'blue'})


def test_point_needs_m_and_p_pair() -> None:
    with pytest.raises(ConfigError) as excinfo:
        RunConfig(p_pair=0.01).point()
    assert excinfo.value.field == 'm'

    with pytest.raises(ConfigError) as excinfo:
        RunConfig(m=3).point()
    assert excinfo.value.field == 'p_pair'

    assert RunConfig(m=3).point(p_pair=0.01).p_pair == 0.01

    template = RunConfig().template()
    assert template.m == 1
    assert template.p_pair == 0.5


def test_to_dict_skips_layout() -> None:
    config = RunConfig(m=3, p_pair=0.01, workers=4, blocks=8, protocols=('bbm92-4', 'sarg04-4'))
    echo = config.to_dict()

    assert 'workers' not in echo
    assert 'blocks' not in echo
    assert 'q' not in echo
    assert echo['protocols'] == ['bbm92-4', 'sarg04-4']
    assert RunConfig.from_mapping(echo) == config.merged({'workers': 1, 'blocks': 1})


def test_from_result_dict() -> None:
    config = RunConfig(kind='depolarizing', eta_a=1e-2, n_b=1e-6)
    result = {'command': 'optimize', 'config': config.to_dict(), 'point': {'m': 7, 'p_pair': 0.0125}}

    replayed = RunConfig.from_result_dict(result)
    assert replayed.m == 7
    assert replayed.p_pair == 0.0125
    assert replayed.merged({'m': None}).kind == 'depolarizing'
    assert replayed.point().channel == config.point(m=7, p_pair=0.0125).channel

    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_result_dict({'result': {}})
    assert excinfo.value.field == 'config'


def test_sim_config() -> None:
    config = RunConfig(m=2, p_pair=0.01, frames=5000, seed=3, workers=2, pair_model='bernoulli2')
    sim = config.sim_config()

    assert sim.frames == 5000
    assert sim.seed == 3
    assert sim.workers == 2
    assert sim.pair_model is PairModel.BERNOULLI2
    assert sim.point.m == 2
