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
from typing import Final, Optional, Union

from typing_extensions import Self

from .enums import MeasBasis, ProtocolId
from .errors import DomainError
from .numerics import BracketedInterval, Probability, binary_entropy, maximize_scalar, shannon_entropy4
from .quantum_channels import BellDiagonal, bell_projections
from .utils import MISSING, simple_repr

__all__: tuple[str, ...] = (
    'ProtocolSpec',
    'QberSet',
    'key_fraction_bell',
    'key_fraction_biterr',
    'key_fraction_bbm92_4',
    'key_fraction_minimized',
    'key_fraction',
    'conclusive_probability',
)

_log = logging.getLogger(__name__)

_FOUR_STATE_BASES: Final[tuple[MeasBasis, ...]] = (MeasBasis.X, MeasBasis.Z)
_SIX_STATE_BASES: Final[tuple[MeasBasis, ...]] = (MeasBasis.X, MeasBasis.Y, MeasBasis.Z)

# (q, sift_factor) used when the caller does not override them.
_ASYMMETRIC_DEFAULTS: Final[dict[str, tuple[float, float]]] = {
    'bbm92-4': (1.0, 1.0),
    'bbm92-6': (1.0 / 3.0, 1.0 / 3.0),
    'sarg04-4': (0.5, 1.0),
    'sarg04-6': (1.0 / 3.0, 1.0),
}
_SYMMETRIC_DEFAULTS: Final[dict[str, tuple[float, float]]] = {
    'bbm92-4': (0.5, 0.5),
    'bbm92-6': (1.0 / 3.0, 1.0 / 3.0),
    'sarg04-4': (0.5, 1.0),
    'sarg04-6': (1.0 / 3.0, 1.0),
}


@simple_repr
class ProtocolSpec:
    """
    .. attributetable:: qkd_efficiency.ProtocolSpec

    Describes an entanglement-based QKD protocol and how its secret key fraction is computed.

    For four-state BBM92 the bias :attr:`q` is the prefactor of the key formula
    ``q [1 - h(e_Z) - h(e_X)]``. In symmetric mode both parties pick each basis with
    probability one half and the loss to sifting is carried by :attr:`sift_factor`
    instead, so ``q`` then only steers the basis choice of the simulator.

    Attributes
    ----------
    id: :class:`ProtocolId`
        The protocol.
    bases: Tuple[:class:`MeasBasis`, ...]
        The bases both parties measure in.
    q: :class:`float`
        The fraction of measurements made in the Z basis, in ``(0, 1]``.
    sift_factor: :class:`float`
        The fraction of coincidences that survives basis reconciliation, in ``(0, 1]``.
    symmetric: :class:`bool`
        Whether the basis choice is unbiased.
    """

    __slots__: tuple[str, ...] = ('id', 'bases', 'q', 'sift_factor', 'symmetric')

    def __init__(
        self,
        id: ProtocolId,
        *,
        q: float,
        sift_factor: float,
        symmetric: bool = False,
    ) -> None:
        self.id: ProtocolId = ProtocolId(id)
        self.bases: tuple[MeasBasis, ...] = _SIX_STATE_BASES if self.id.is_six_state else _FOUR_STATE_BASES

        if not 0.0 < q <= 1.0:
            raise DomainError('q', q, 'must lie in (0, 1]')
        if not 0.0 < sift_factor <= 1.0:
            raise DomainError('sift_factor', sift_factor, 'must lie in (0, 1]')

        self.q: float = float(q)
        self.sift_factor: float = float(sift_factor)
        self.symmetric: bool = symmetric

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProtocolSpec):
            return NotImplemented
        return (self.id, self.q, self.sift_factor, self.symmetric) == (
            other.id,
            other.q,
            other.sift_factor,
            other.symmetric,
        )

    def __hash__(self) -> int:
        return hash((self.id.value, self.q, self.sift_factor, self.symmetric))

    @classmethod
    def from_id(
        cls,
        id: Union[ProtocolId, str],
        *,
        symmetric: bool = False,
        q: Optional[float] = MISSING,
        sift_factor: Optional[float] = MISSING,
    ) -> Self:
        """Builds a protocol from its id with the default bias and sift factor.

        Parameters
        ----------
        id: Union[:class:`ProtocolId`, :class:`str`]
            The protocol, e.g. ``'bbm92-4'``.
        symmetric: :class:`bool`
            Whether to use the unbiased basis choice defaults.
        q: Optional[:class:`float`]
            Overrides the default bias.
        sift_factor: Optional[:class:`float`]
            Overrides the default sift factor.

        Raises
        ------
        DomainError
            The id is unknown or an override is out of range.
        """
        try:
            protocol = ProtocolId(id)
        except ValueError:
            raise DomainError('protocol', id, f'expected one of {", ".join(ProtocolId.values())}') from None

        default_q, default_sift = (_SYMMETRIC_DEFAULTS if symmetric else _ASYMMETRIC_DEFAULTS)[protocol.value]
        return cls(
            protocol,
            q=default_q if q is MISSING or q is None else q,
            sift_factor=default_sift if sift_factor is MISSING or sift_factor is None else sift_factor,
            symmetric=symmetric,
        )

    def uses(self, basis: Union[MeasBasis, str]) -> bool:
        """Whether the protocol measures in ``basis``."""
        return MeasBasis(basis) in self.bases

    def basis_probabilities(self) -> tuple[float, ...]:
        """Tuple[:class:`float`, ...]: The probability of each of :attr:`bases` being chosen.

        Z is chosen with probability :attr:`q`, the rest is split evenly over the other bases.
        """
        others = (1.0 - self.q) / (len(self.bases) - 1)
        return tuple(self.q if basis is MeasBasis.Z else others for basis in self.bases)

    def conclusive_rule(self, D: float) -> Probability:
        """Returns the probability ``E`` of a conclusive event at disturbance ``D``."""
        return conclusive_probability(self, D)

    def to_dict(self) -> dict[str, object]:
        return {'id': self.id.value, 'q': self.q, 'sift_factor': self.sift_factor, 'symmetric': self.symmetric}


@simple_repr
class QberSet:
    """
    .. attributetable:: qkd_efficiency.QberSet

    The quantum bit error rates observed in each measured basis.

    Attributes
    ----------
    e_X: :class:`float`
        The X basis QBER.
    e_Y: Optional[:class:`float`]
        The Y basis QBER, only present for six-state protocols.
    e_Z: :class:`float`
        The Z basis QBER.
    """

    __slots__: tuple[str, ...] = ('e_X', 'e_Y', 'e_Z')

    def __init__(self, e_X: float, e_Z: float, e_Y: Optional[float] = None) -> None:
        self.e_X: Probability = Probability(e_X, 'e_X')
        self.e_Y: Optional[Probability] = None if e_Y is None else Probability(e_Y, 'e_Y')
        self.e_Z: Probability = Probability(e_Z, 'e_Z')

    @property
    def e_bit(self) -> float:
        """:class:`float`: The bit error rate ``p_X + p_Y``, which equals ``e_Z``."""
        return self.e_Z

    @property
    def e_ph(self) -> float:
        """:class:`float`: The phase error rate ``p_Z + p_Y``, which equals ``e_X``."""
        return self.e_X

    def for_basis(self, basis: Union[MeasBasis, str]) -> Optional[Probability]:
        return getattr(self, f'e_{MeasBasis(basis).value}')

    def to_dict(self) -> dict[str, Optional[float]]:
        return {
            'e_X': float(self.e_X),
            'e_Y': None if self.e_Y is None else float(self.e_Y),
            'e_Z': float(self.e_Z),
        }


def key_fraction_bell(weights: BellDiagonal) -> float:
    """Computes the secret key fraction ``1 - H(p)`` of a Bell-diagonal state.

    The result may be negative.
    """
    return 1.0 - shannon_entropy4(weights)


def key_fraction_biterr(e_bit: float, e_ph: float, weights: BellDiagonal) -> float:
    """Computes the key fraction as ``1 - h(e_bit) - h(e_ph | e_bit)``.

    The conditional phase error entropy is ``H(p) - h(e_bit)``, so the result agrees with
    :func:`key_fraction_bell` up to rounding.

    Raises
    ------
    DomainError
        ``e_bit`` or ``e_ph`` disagrees with ``weights`` by more than ``1e-9``.
    """
    if abs(e_bit - (weights.p_X + weights.p_Y)) > 1e-9:
        raise DomainError('e_bit', e_bit, f'inconsistent with p_X + p_Y = {weights.p_X + weights.p_Y!r}')
    if abs(e_ph - (weights.p_Z + weights.p_Y)) > 1e-9:
        raise DomainError('e_ph', e_ph, f'inconsistent with p_Z + p_Y = {weights.p_Z + weights.p_Y!r}')

    h_bit = binary_entropy(e_bit)
    conditional = shannon_entropy4(weights) - h_bit
    return 1.0 - h_bit - conditional


def key_fraction_bbm92_4(e_X: float, e_Z: float, q: float) -> float:
    """Computes the four-state BBM92 key fraction ``q [1 - h(e_Z) - h(e_X)]``."""
    return Probability(q, 'q') * (1.0 - binary_entropy(e_Z) - binary_entropy(e_X))


def key_fraction_minimized(e_X: float, e_Z: float) -> tuple[float, float]:
    """Minimizes the Bell-diagonal key fraction over the unobserved Y basis QBER.

    ``e_Y`` ranges over ``[|e_X - e_Z|, e_X + e_Z]``, the values for which the Bell weights
    stay non-negative.

    Returns
    -------
    Tuple[:class:`float`, :class:`float`]
        The minimal key fraction and the minimizing ``e_Y``.

    Raises
    ------
    DomainError
        ``e_X + e_Z`` exceeds one.
    """
    x, z = Probability(e_X, 'e_X'), Probability(e_Z, 'e_Z')
    if x + z > 1.0 + 1e-12:
        raise DomainError('e_X + e_Z', x + z, 'must not exceed 1')

    lo = abs(x - z)
    hi = min(x + z, 2.0 - x - z)

    def key(e_Y: float) -> float:
        return key_fraction_bell(bell_projections(x, e_Y, z))

    if hi - lo <= 1e-15:
        return key(lo), lo

    e_Y, negated = maximize_scalar(lambda y: -key(y), BracketedInterval(lo, hi))
    _log.debug('key_fraction_minimized(%r, %r): minimum %r at e_Y=%r', x, z, -negated, e_Y)
    return -negated, e_Y


def conclusive_probability(protocol: ProtocolSpec, D: float) -> Probability:
    """Returns the probability ``E`` that a coincidence yields a conclusive result.

    This is ``1`` for BBM92 and ``D + 1/2`` for SARG04.

    Raises
    ------
    DomainError
        ``D`` lies outside ``[0, 1/2]``.
    """
    d = Probability(D, 'D')
    if d > 0.5 + 1e-12:
        raise DomainError('D', D, 'must lie in [0, 1/2]')
    if protocol.id.is_sarg04:
        return Probability(min(d, 0.5) + 0.5, 'E')
    return Probability(1.0, 'E')


def key_fraction(protocol: ProtocolSpec, qbers: QberSet) -> float:
    """Computes the secret key fraction of a protocol from its observed QBERs.

    Four-state BBM92 uses :func:`key_fraction_bbm92_4`. The six-state protocols use the
    Bell-diagonal key fraction scaled by the sift factor, four-state SARG04 uses
    ``sift_factor [1 - h(e_Z) - h(e_X)]`` on the conclusive-event QBERs. The result may be negative.

    Raises
    ------
    DomainError
        ``e_Y`` is given for a four-state protocol or missing for a six-state one.
    InfeasibleQberError
        The six-state QBERs do not describe a Bell-diagonal state.
    """
    six_state = protocol.id.is_six_state
    if six_state and qbers.e_Y is None:
        raise DomainError('e_Y', None, f'{protocol.id.value} measures in Y and needs e_Y')
    if not six_state and qbers.e_Y is not None:
        raise DomainError('e_Y', qbers.e_Y, f'{protocol.id.value} does not measure in Y')

    if six_state:
        assert qbers.e_Y is not None
        return protocol.sift_factor * key_fraction_bell(bell_projections(qbers.e_X, qbers.e_Y, qbers.e_Z))

    if protocol.id is ProtocolId.BBM92_4:
        prefactor = 1.0 if protocol.symmetric else protocol.q
        return protocol.sift_factor * key_fraction_bbm92_4(qbers.e_X, qbers.e_Z, prefactor)

    return protocol.sift_factor * (1.0 - binary_entropy(qbers.e_Z) - binary_entropy(qbers.e_X))


