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

import types
from collections.abc import Iterator, Mapping
from typing import TYPE_CHECKING, Any, ClassVar, NamedTuple

__all__: tuple[str, ...] = (
    'MeasBasis',
    'ChannelKind',
    'ProtocolId',
    'PairModel',
    'OutputFormat',
    'AxisScale',
    'SweepParameter',
    'ValidationScale',
)


OldValue = NewValue = Any


def _create_value_cls(name: str, comparable: bool) -> type[NewValue]:
    class _EnumValue(NamedTuple):
        # The value class is patched below, so it has to be created per enum.
        name: str
        value: Any

    cls = _EnumValue
    cls.__name__ = '_EnumValue_' + name
    cls.__repr__ = lambda self: f'<{name}.{self.name}: {self.value!r}>'
    cls.__str__ = lambda self: str(self.value)
    if comparable:
        cls.__le__ = lambda self, other: isinstance(other, self.__class__) and self.value <= other.value
        cls.__ge__ = lambda self, other: isinstance(other, self.__class__) and self.value >= other.value
        cls.__lt__ = lambda self, other: isinstance(other, self.__class__) and self.value < other.value
        cls.__gt__ = lambda self, other: isinstance(other, self.__class__) and self.value > other.value

    return cls


def _is_descriptor(obj: type[object]) -> bool:
    return hasattr(obj, '__get__') or hasattr(obj, '__set__') or hasattr(obj, '__delete__')


class EnumMeta(type):
    def __new__(
        cls,
        name: str,
        bases: tuple[type, ...],
        attrs: dict[str, Any],
        *,
        comparable: bool = False,
    ) -> EnumMeta:
        value_mapping: dict[OldValue, NewValue] = {}
        member_mapping: dict[str, NewValue] = {}
        member_names: list[str] = []

        value_cls = _create_value_cls(name, comparable)
        for key, value in list(attrs.items()):
            is_descriptor = _is_descriptor(value)
            if key[0] == '_' and not is_descriptor:
                continue

            if isinstance(value, classmethod):
                continue

            # Methods and properties end up on the members themselves.
            if is_descriptor:
                setattr(value_cls, key, value)
                del attrs[key]
                continue

            try:
                new_value = value_mapping[value]
            except KeyError:
                new_value = value_cls(name=key, value=value)
                value_mapping[value] = new_value
                member_names.append(key)

            member_mapping[key] = new_value
            attrs[key] = new_value

        attrs['_enum_value_map_'] = value_mapping
        attrs['_enum_member_map_'] = member_mapping
        attrs['_enum_member_names_'] = member_names
        attrs['_enum_value_cls_'] = value_cls
        actual_cls = super().__new__(cls, name, bases, attrs)
        value_cls._actual_enum_cls_ = actual_cls
        # Members travel to worker processes by value.
        value_cls.__reduce__ = lambda self: (actual_cls, (self.value,))
        return actual_cls

    def __iter__(cls: type[Enum]) -> Iterator[Any]:
        return (cls._enum_member_map_[name] for name in cls._enum_member_names_)

    def __len__(cls: type[Enum]) -> int:
        return len(cls._enum_member_names_)

    def __repr__(cls) -> str:
        return f'<enum {cls.__name__}>'

    @property
    def __members__(cls: type[Enum]) -> Mapping[str, Any]:
        return types.MappingProxyType(cls._enum_member_map_)

    def __call__(cls: type[Enum], value: Any) -> Any:
        if isinstance(value, cls):
            return value

        try:
            return cls._enum_value_map_[value]
        except (KeyError, TypeError):
            raise ValueError(f"{value!r} is not a valid {cls.__name__}")

    def __getitem__(cls: type[Enum], key: str) -> Any:
        return cls._enum_member_map_[key]

    def __setattr__(cls, name: str, value: Any) -> None:
        raise TypeError('Enums are immutable.')

    def __delattr__(cls, attr: str) -> None:
        raise TypeError('Enums are immutable')

    def __instancecheck__(self, instance: Any) -> bool:
        try:
            return instance._actual_enum_cls_ is self
        except AttributeError:
            return False


class Enum(metaclass=EnumMeta):
    if TYPE_CHECKING:
        _enum_member_names_: ClassVar[list[str]]
        _enum_member_map_: ClassVar[dict[str, NewValue]]
        _enum_value_map_: ClassVar[dict[OldValue, NewValue]]
        _enum_value_cls_: ClassVar[type[NewValue]]

    @classmethod
    def values(cls) -> tuple[Any, ...]:
        """Tuple[Any, ...]: The raw values of every member, in declaration order."""
        return tuple(cls._enum_member_map_[name].value for name in cls._enum_member_names_)


class MeasBasis(Enum, comparable=True):
    """Represents one of the three mutually unbiased qubit measurement bases.

    The members compare by their Pauli label, which orders them ``X < Y < Z``.

    Attributes
    ----------
    X
        The diagonal basis, outcome ``0`` is ``|+>``.
    Y
        The circular basis, outcome ``0`` is ``|+i>``.
    Z
        The computational basis, outcome ``0`` is ``|0>``. This is the key basis.
    """

    X = 'X'
    Y = 'Y'
    Z = 'Z'

    @property
    def position(self) -> int:
        """:class:`int`: The position of this basis in ``(X, Y, Z)``."""
        return 'XYZ'.index(self.value)

    @property
    def states(self) -> tuple[Any, Any]:
        """Tuple[:class:`numpy.ndarray`, :class:`numpy.ndarray`]: The states of outcome ``0`` and ``1``."""
        from .quantum_channels import basis_states

        return basis_states(self)


class ChannelKind(Enum):
    """Represents the kind of single-qubit decoherence acting on each photon.

    Attributes
    ----------
    DEPHASING
        Phase damping, the channel ``rho -> (1+V)/2 rho + (1-V)/2 Z rho Z``.
    DEPOLARIZING
        Depolarization, the channel ``rho -> (1-3L/4) rho + L/4 (X rho X + Y rho Y + Z rho Z)``.
    """

    DEPHASING = 'dephasing'
    DEPOLARIZING = 'depolarizing'


class ProtocolId(Enum):
    """Represents a supported entanglement-based QKD protocol.

    Attributes
    ----------
    BBM92_4
        Two basis BBM92 with key taken from the Z basis.
    BBM92_6
        Six state BBM92, measuring in X, Y and Z.
    SARG04_4
        Entanglement-based SARG04 with four states.
    SARG04_6
        Entanglement-based SARG04 with six states.
    """

    BBM92_4 = 'bbm92-4'
    BBM92_6 = 'bbm92-6'
    SARG04_4 = 'sarg04-4'
    SARG04_6 = 'sarg04-6'

    @property
    def is_sarg04(self) -> bool:
        """:class:`bool`: Whether this protocol post-selects conclusive results."""
        return self.value.startswith('sarg04')

    @property
    def is_six_state(self) -> bool:
        """:class:`bool`: Whether this protocol also measures in the Y basis."""
        return self.value.endswith('-6')


class PairModel(Enum):
    """Represents the photon pair number statistics of the source.

    Attributes
    ----------
    POISSON
        Pair numbers are Poisson distributed with mean ``p_pair``.
    BERNOULLI2
        At most two pairs: one with probability ``p_pair``, two with ``p_pair**2 / 2``.
    """

    POISSON = 'poisson'
    BERNOULLI2 = 'bernoulli2'


class OutputFormat(Enum):
    """Represents the format a command writes its result in.

    Attributes
    ----------
    CSV
        Comma separated rows with a fixed header.
    JSON
        A single JSON document.
    """

    CSV = 'csv'
    JSON = 'json'


class AxisScale(Enum):
    """Represents the spacing of a sweep axis.

    Attributes
    ----------
    LOG
        Logarithmically spaced values.
    LINEAR
        Evenly spaced values.
    """

    LOG = 'log'
    LINEAR = 'linear'


class SweepParameter(Enum):
    """Represents the parameter a sweep axis varies.

    Attributes
    ----------
    N_RATIO_A
        Alice's noise-to-efficiency ratio ``n_A / eta_A``.
    N_RATIO_B
        Bob's noise-to-efficiency ratio ``n_B / eta_B``.
    N_RATIO
        Both noise-to-efficiency ratios at once.
    P_PAIR
        The pair probability at a fixed coding order.
    """

    N_RATIO_A = 'n_ratio_A'
    N_RATIO_B = 'n_ratio_B'
    N_RATIO = 'n_ratio'
    P_PAIR = 'p_pair'


class ValidationScale(Enum):
    """Represents how much work the validation suite spends on each check.

    Attributes
    ----------
    QUICK
        Reduced grids and frame counts, suitable for a test run.
    FULL
        The grid sizes and frame counts of the acceptance criteria.
    """

    QUICK = 'quick'
    FULL = 'full'
