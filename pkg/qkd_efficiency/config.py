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

import logging
import math
import os
from collections.abc import Mapping
from typing import Any, Callable, Final, Optional, Union

from dotenv import dotenv_values
from typing_extensions import Self

from .enums import ChannelKind, PairModel, ProtocolId
from .errors import ConfigError, QKDEfficiencyException
from .link_model import ChannelParams, LinkPoint
from .optimizer import SweepAxis
from .protocols import ProtocolSpec
from .quantum_channels import DisturbanceProfile, profile_from_visibility
from .simulator import SimConfig

__all__: tuple[str, ...] = ('RunConfig', 'FIELDS')

_log = logging.getLogger(__name__)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f'{text!r} is not a boolean')


def _parse_int(text: str) -> int:
    # Accepts 1e6 style counts as long as they are integral.
    value = float(text)
    if not value.is_integer():
        raise ValueError(f'{text!r} is not an integer')
    return int(text) if text.strip().lstrip('+-').isdigit() else int(value)


def _parse_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(',') if part.strip())


# Every configuration key with its parser and default.
FIELDS: Final[dict[str, tuple[Callable[[str], Any], Any]]] = {
    'protocol': (str, ProtocolId.BBM92_4.value),
    'protocols': (_parse_list, None),
    'kind': (str, ChannelKind.DEPHASING.value),
    'v_a': (float, 0.98),
    'v_b': (float, 0.98),
    'lambda_a': (float, None),
    'lambda_b': (float, None),
    'eta_a': (float, 1e-3),
    'eta_b': (float, 1e-3),
    'n_a': (float, 1e-9),
    'n_b': (float, 1e-9),
    'q': (float, None),
    'sift_factor': (float, None),
    'symmetric': (_parse_bool, False),
    'm': (_parse_int, None),
    'p_pair': (float, None),
    'dt': (float, 1.0),
    'p_floor': (float, 1e-8),
    'p_ceiling': (float, 0.5),
    'axis_a': (str, None),
    'axis_b': (str, None),
    'full_xi': (_parse_bool, False),
    'frames': (_parse_int, 1_000_000),
    'seed': (_parse_int, 0),
    'blocks': (_parse_int, 1),
    'workers': (_parse_int, 1),
    'pair_model': (str, PairModel.POISSON.value),
}

# Keys that only decide how work is spread, never what is computed.
_LAYOUT_FIELDS: Final[frozenset[str]] = frozenset({'blocks', 'workers'})


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace('-', '_')


class RunConfig:
    """
    .. attributetable:: qkd_efficiency.RunConfig

    Every parameter of a command line run, validated against its physical range.

    Values come from, in increasing precedence, the defaults in :data:`FIELDS`, a
    ``KEY=value`` file read by :meth:`from_file` and explicit overrides passed to
    :meth:`merged`. Keys are case insensitive and dashes may stand in for underscores.

    Missing ``m`` or ``p_pair`` means the optimizer chooses them. ``lambda_a`` and
    ``lambda_b`` set the depolarizing parameter directly and take precedence over the
    visibilities, with ``V = 1 - lambda``.

    Raises
    ------
    ConfigError
        A key is unknown, a value cannot be parsed or lies outside its range.
    """

    __slots__: tuple[str, ...] = tuple(FIELDS)

    protocol: str
    protocols: Optional[tuple[str, ...]]
    kind: str
    v_a: float
    v_b: float
    lambda_a: Optional[float]
    lambda_b: Optional[float]
    eta_a: float
    eta_b: float
    n_a: float
    n_b: float
    q: Optional[float]
    sift_factor: Optional[float]
    symmetric: bool
    m: Optional[int]
    p_pair: Optional[float]
    dt: float
    p_floor: float
    p_ceiling: float
    axis_a: Optional[str]
    axis_b: Optional[str]
    full_xi: bool
    frames: int
    seed: int
    blocks: int
    workers: int
    pair_model: str

    def __init__(self, **values: Any) -> None:
        unknown = [key for key in values if key not in FIELDS]
        if unknown:
            raise ConfigError('unknown configuration key', field=unknown[0])

        for key, (_, default) in FIELDS.items():
            setattr(self, key, values.get(key, default))
        self._validate()

    def __repr__(self) -> str:
        changed = ' '.join(f'{key}={getattr(self, key)!r}' for key, (_, default) in FIELDS.items() if getattr(self, key) != default)
        return f'<RunConfig {changed}>'

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunConfig):
            return NotImplemented
        return all(getattr(self, key) == getattr(other, key) for key in FIELDS)

    __hash__ = None  # type: ignore

    @staticmethod
    def _coerce(key: str, value: Any) -> Any:
        parser, _ = FIELDS[key]
        if value is None or not isinstance(value, str):
            if isinstance(value, list):
                return tuple(value)  # type: ignore
            return value
        try:
            return parser(value)
        except ValueError:
            raise ConfigError(f'cannot parse {value!r}', field=key) from None

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> Self:
        """Builds a configuration from raw values, parsing any strings."""
        values: dict[str, Any] = {}
        for raw_key, value in mapping.items():
            key = _normalize_key(raw_key)
            if key not in FIELDS:
                raise ConfigError('unknown configuration key', field=raw_key)
            values[key] = cls._coerce(key, value)
        return cls(**values)

    @classmethod
    def from_file(cls, path: Union[str, os.PathLike[str]]) -> Self:
        """Reads a ``KEY=value`` configuration file.

        Blank lines and ``#`` comments are ignored. A key without a value is an error.
        """
        if not os.path.isfile(path):
            raise ConfigError(f'no such file {os.fspath(path)!r}', field='config')

        raw = dotenv_values(path, interpolate=False)
        for key, value in raw.items():
            if value is None:
                raise ConfigError('missing value', field=key)
        _log.debug('read %d configuration key(s) from %s', len(raw), os.fspath(path))
        return cls.from_mapping(raw)

    @classmethod
    def from_result_dict(cls, data: Mapping[str, Any]) -> Self:
        """Rebuilds the configuration of a JSON result written by the command line.

        The operating point stored next to the configuration, if any, fixes ``m`` and
        ``p_pair`` so that evaluating the configuration reproduces the result.
        """
        try:
            echo = data['config']
        except (KeyError, TypeError):
            raise ConfigError('result has no configuration echo', field='config') from None

        config = cls.from_mapping(echo)
        point = data.get('point')
        if isinstance(point, Mapping) and point.get('m') is not None and point.get('p_pair') is not None:
            config = config.merged({'m': point['m'], 'p_pair': point['p_pair']})
        return config

    def merged(self, overrides: Mapping[str, Any]) -> Self:
        """Returns a copy with every non-``None`` override applied."""
        values = {key: getattr(self, key) for key in FIELDS}
        for raw_key, value in overrides.items():
            if value is None:
                continue
            key = _normalize_key(raw_key)
            if key not in FIELDS:
                raise ConfigError('unknown configuration key', field=raw_key)
            values[key] = self._coerce(key, value)
        return type(self)(**values)

    def _validate(self) -> None:
        for key in ('v_a', 'v_b', 'p_floor', 'p_ceiling', 'dt'):
            value = getattr(self, key)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise ConfigError(f'expected a finite number, got {value!r}', field=key)

        for key in ('v_a', 'v_b'):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise ConfigError('visibility must lie in [0, 1]', field=key)
        for key in ('lambda_a', 'lambda_b'):
            value = getattr(self, key)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ConfigError('depolarizing parameter must lie in [0, 1]', field=key)
            if value is not None and self.kind != ChannelKind.DEPOLARIZING.value:
                raise ConfigError('only applies to depolarizing channels', field=key)
        for key in ('eta_a', 'eta_b'):
            if not 0.0 < getattr(self, key) <= 1.0:
                raise ConfigError('transmission must lie in (0, 1]', field=key)
        for key in ('n_a', 'n_b'):
            if not 0.0 <= getattr(self, key) < 1.0:
                raise ConfigError('background probability must lie in [0, 1)', field=key)
        if self.m is not None and self.m < 1:
            raise ConfigError('coding order must be at least 1', field='m')
        if self.p_pair is not None and not 0.0 < self.p_pair <= 0.5:
            raise ConfigError('pair probability must lie in (0, 1/2]', field='p_pair')
        if not 0.0 < self.p_floor < self.p_ceiling <= 0.5:
            raise ConfigError('expected 0 < p_floor < p_ceiling <= 1/2', field='p_floor')
        if self.dt <= 0.0:
            raise ConfigError('frame duration must be positive', field='dt')
        if self.q is not None and not 0.0 < self.q <= 1.0:
            raise ConfigError('basis bias must lie in (0, 1]', field='q')
        if self.sift_factor is not None and not 0.0 < self.sift_factor <= 1.0:
            raise ConfigError('sift factor must lie in (0, 1]', field='sift_factor')
        for key in ('frames', 'blocks', 'workers'):
            if getattr(self, key) < 1:
                raise ConfigError('must be at least 1', field=key)
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError('seed must be an unsigned 64 bit integer', field='seed')

        for key, cls in (('kind', ChannelKind), ('pair_model', PairModel)):
            if getattr(self, key) not in cls.values():
                raise ConfigError(f'expected one of {", ".join(cls.values())}', field=key)
        for name in (self.protocol, *(self.protocols or ())):
            if name not in ProtocolId.values():
                raise ConfigError(f'unknown protocol {name!r}', field='protocols' if name != self.protocol else 'protocol')
        for key in ('axis_a', 'axis_b'):
            text = getattr(self, key)
            if text is not None:
                try:
                    SweepAxis.parse(text)
                except QKDEfficiencyException as exc:
                    raise ConfigError(exc.message, field=key) from None

    @property
    def visibilities(self) -> tuple[float, float]:
        """Tuple[:class:`float`, :class:`float`]: Alice's and Bob's visibility after applying any ``lambda`` override."""
        v_a = self.v_a if self.lambda_a is None else 1.0 - self.lambda_a
        v_b = self.v_b if self.lambda_b is None else 1.0 - self.lambda_b
        return v_a, v_b

    def protocol_spec(self, protocol: Optional[str] = None) -> ProtocolSpec:
        """Builds ``protocol``, by default :attr:`protocol`, with the configured bias and sift factor."""
        return ProtocolSpec.from_id(
            protocol or self.protocol, symmetric=self.symmetric, q=self.q, sift_factor=self.sift_factor
        )

    def protocol_specs(self) -> list[ProtocolSpec]:
        """Builds every protocol listed in :attr:`protocols`, or just :attr:`protocol`."""
        return [self.protocol_spec(name) for name in (self.protocols or (self.protocol,))]

    def channel(self) -> ChannelParams:
        return ChannelParams(eta_a=self.eta_a, eta_b=self.eta_b, n_a=self.n_a, n_b=self.n_b, dt=self.dt)

    def profile(self) -> DisturbanceProfile:
        """Computes the disturbances of the configured channels through their Kraus sets."""
        return profile_from_visibility(self.kind, *self.visibilities)

    def point(self, *, m: Optional[int] = None, p_pair: Optional[float] = None) -> LinkPoint:
        """Builds the operating point, filling a missing ``m`` or ``p_pair`` from the arguments.

        Raises
        ------
        ConfigError
            Neither the configuration nor the arguments provide ``m`` or ``p_pair``.
        """
        m = self.m if m is None else m
        p_pair = self.p_pair if p_pair is None else p_pair
        if m is None:
            raise ConfigError('a fixed operating point needs a coding order', field='m')
        if p_pair is None:
            raise ConfigError('a fixed operating point needs a pair probability', field='p_pair')
        return LinkPoint(m=m, p_pair=p_pair, channel=self.channel(), protocol=self.protocol_spec(), decoherence=self.profile())

    def template(self) -> LinkPoint:
        """Builds a point for the optimizer, whose ``m`` and ``p_pair`` only serve as placeholders."""
        return self.point(m=self.m or 1, p_pair=self.p_pair or self.p_ceiling)

    def sweep_axes(self) -> list[SweepAxis]:
        return [SweepAxis.parse(text) for text in (self.axis_a, self.axis_b) if text is not None]

    def sim_config(self) -> SimConfig:
        return SimConfig(
            self.point(),
            frames=self.frames,
            seed=self.seed,
            pair_model=self.pair_model,
            blocks=self.blocks,
            workers=self.workers,
        )

    def to_dict(self) -> dict[str, Any]:
        """The configuration echo written into results, at full precision.

        :attr:`blocks` and :attr:`workers` are left out since they never change a result.
        """
        out: dict[str, Any] = {}
        for key in FIELDS:
            value = getattr(self, key)
            if key in _LAYOUT_FIELDS or value is None:
                continue
            out[key] = list(value) if isinstance(value, tuple) else value
        return out
