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
from typing import Any, Optional, Union

import numpy as np
import numpy.typing as npt
from typing_extensions import Self

from .abc import Reconstructable
from .enums import MeasBasis, ProtocolId
from .errors import DegenerateDenominatorError, DomainError
from .numerics import Probability, binary_entropy_array
from .protocols import ProtocolSpec, QberSet, conclusive_probability, key_fraction, key_fraction_minimized
from .quantum_channels import DisturbanceProfile
from .utils import MISSING, simple_repr

__all__: tuple[str, ...] = (
    'ChannelParams',
    'LinkPoint',
    'RateBreakdown',
    'LinkEvaluation',
    'event_rate',
    'error_rate',
    'qber',
    'qber_set',
    'pke',
    'pke_over_pairs',
    'absolute_key_rate',
    'evaluate',
    'max_coding_order',
    'min_pair_probability',
)

_log = logging.getLogger(__name__)


@simple_repr
class ChannelParams:
    """
    .. attributetable:: qkd_efficiency.ChannelParams

    The loss and background noise seen by Alice's and Bob's detectors.

    Attributes
    ----------
    eta_a: :class:`float`
        Alice's per-photon transmission, in ``(0, 1]``.
    eta_b: :class:`float`
        Bob's per-photon transmission, in ``(0, 1]``.
    n_a: :class:`float`
        Alice's background count probability per temporal slot, in ``[0, 1)``.
    n_b: :class:`float`
        Bob's background count probability per temporal slot, in ``[0, 1)``.
    dt: :class:`float`
        The frame duration in seconds, only used for absolute rates.
    """

    __slots__: tuple[str, ...] = ('eta_a', 'eta_b', 'n_a', 'n_b', 'dt')

    def __init__(self, *, eta_a: float, eta_b: float, n_a: float, n_b: float, dt: float = 1.0) -> None:
        for field, eta in (('eta_a', eta_a), ('eta_b', eta_b)):
            if not (math.isfinite(eta) and 0.0 < eta <= 1.0):
                raise DomainError(field, eta, 'transmission must lie in (0, 1]')
        for field, n in (('n_a', n_a), ('n_b', n_b)):
            if not (math.isfinite(n) and 0.0 <= n < 1.0):
                raise DomainError(field, n, 'background probability must lie in [0, 1)')
        if not (math.isfinite(dt) and dt > 0.0):
            raise DomainError('dt', dt, 'frame duration must be positive')

        self.eta_a: float = float(eta_a)
        self.eta_b: float = float(eta_b)
        self.n_a: float = float(n_a)
        self.n_b: float = float(n_b)
        self.dt: float = float(dt)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChannelParams):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(tuple(self.to_dict().values()))

    @classmethod
    def symmetric(cls, eta: float, n: float, *, dt: float = 1.0) -> Self:
        """Builds a channel with the same transmission and background on both sides."""
        return cls(eta_a=eta, eta_b=eta, n_a=n, n_b=n, dt=dt)

    @property
    def noise_ratio_a(self) -> float:
        """:class:`float`: Alice's noise-to-efficiency ratio ``n_A / eta_A``."""
        return self.n_a / self.eta_a

    @property
    def noise_ratio_b(self) -> float:
        """:class:`float`: Bob's noise-to-efficiency ratio ``n_B / eta_B``."""
        return self.n_b / self.eta_b

    @property
    def worst_noise_ratio(self) -> float:
        """:class:`float`: The larger of the two noise-to-efficiency ratios."""
        return max(self.noise_ratio_a, self.noise_ratio_b)

    def swapped(self) -> Self:
        """Exchanges Alice's and Bob's parameters."""
        return type(self)(eta_a=self.eta_b, eta_b=self.eta_a, n_a=self.n_b, n_b=self.n_a, dt=self.dt)

    def to_dict(self) -> dict[str, float]:
        return {'eta_a': self.eta_a, 'eta_b': self.eta_b, 'n_a': self.n_a, 'n_b': self.n_b, 'dt': self.dt}


@simple_repr
class LinkPoint:
    """
    .. attributetable:: qkd_efficiency.LinkPoint

    A fully specified operating point of the link. Instances are treated as immutable,
    use :meth:`replace` to derive a modified point.

    Attributes
    ----------
    m: :class:`int`
        The coding order, the number of qubits carried by each photon.
    p_pair: :class:`float`
        The probability of emitting a photon pair per frame, in ``(0, 1/2]``.
    channel: :class:`ChannelParams`
        The loss and background parameters.
    protocol: :class:`ProtocolSpec`
        The QKD protocol.
    decoherence: :class:`DisturbanceProfile`
        The disturbances of the decohered pair.
    """

    __slots__: tuple[str, ...] = ('m', 'p_pair', 'channel', 'protocol', 'decoherence')

    def __init__(
        self,
        *,
        m: int,
        p_pair: float,
        channel: ChannelParams,
        protocol: ProtocolSpec,
        decoherence: DisturbanceProfile,
    ) -> None:
        if isinstance(m, bool) or int(m) != m or m < 1:
            raise DomainError('m', m, 'coding order must be a positive integer')
        if not (math.isfinite(p_pair) and 0.0 < p_pair <= 0.5):
            raise DomainError('p_pair', p_pair, 'pair probability must lie in (0, 1/2]')

        self.m: int = int(m)
        self.p_pair: float = float(p_pair)
        self.channel: ChannelParams = channel
        self.protocol: ProtocolSpec = protocol
        self.decoherence: DisturbanceProfile = decoherence

    @property
    def M(self) -> int:
        """:class:`int`: The number of temporal slots per frame, ``2**m``."""
        return 1 << self.m

    @property
    def conclusive(self) -> Probability:
        """:class:`float`: The conclusive probability ``E`` at the average disturbance."""
        return conclusive_probability(self.protocol, self.decoherence.D_avg)

    def replace(
        self,
        *,
        m: int = MISSING,
        p_pair: float = MISSING,
        channel: ChannelParams = MISSING,
        protocol: ProtocolSpec = MISSING,
        decoherence: DisturbanceProfile = MISSING,
    ) -> LinkPoint:
        """Returns a copy of this point with the given fields replaced."""
        return LinkPoint(
            m=self.m if m is MISSING else m,
            p_pair=self.p_pair if p_pair is MISSING else p_pair,
            channel=self.channel if channel is MISSING else channel,
            protocol=self.protocol if protocol is MISSING else protocol,
            decoherence=self.decoherence if decoherence is MISSING else decoherence,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            'm': self.m,
            'p_pair': self.p_pair,
            'channel': self.channel.to_dict(),
            'protocol': self.protocol.to_dict(),
            'decoherence': self.decoherence.to_dict(),
        }


@simple_repr
class RateBreakdown:
    """
    .. attributetable:: qkd_efficiency.RateBreakdown

    The four contributions to an event or error rate, normalized by ``R_source eta_A eta_B``.

    Attributes
    ----------
    signal_signal: :class:`float`
        Both detections come from the same pair.
    signal_background: :class:`float`
        One detection is a signal photon, the other a background count.
    background_background: :class:`float`
        Both detections are background counts.
    double_pair: :class:`float`
        The detections come from two different pairs emitted in the same frame.
    total: :class:`float`
        The sum of the four parts.
    """

    __slots__: tuple[str, ...] = ('signal_signal', 'signal_background', 'background_background', 'double_pair', 'total')

    def __init__(
        self, signal_signal: float, signal_background: float, background_background: float, double_pair: float
    ) -> None:
        self.signal_signal: float = signal_signal
        self.signal_background: float = signal_background
        self.background_background: float = background_background
        self.double_pair: float = double_pair
        self.total: float = signal_signal + signal_background + background_background + double_pair

    @property
    def parts(self) -> tuple[float, float, float, float]:
        """Tuple[:class:`float`, ...]: The four parts in declaration order."""
        return (self.signal_signal, self.signal_background, self.background_background, self.double_pair)

    def to_dict(self) -> dict[str, float]:
        return {
            'signal_signal': self.signal_signal,
            'signal_background': self.signal_background,
            'background_background': self.background_background,
            'double_pair': self.double_pair,
            'total': self.total,
        }


def _background_terms(point: LinkPoint) -> tuple[float, float]:
    channel = point.channel
    single = point.M * (channel.n_a / channel.eta_a + channel.n_b / channel.eta_b)
    double = (point.M * point.M / point.p_pair) * (channel.n_a * channel.n_b) / (channel.eta_a * channel.eta_b)
    return single, double


def event_rate(point: LinkPoint, E: float) -> RateBreakdown:
    """Computes the normalized rate of detection events.

    The parts are ``E``, ``M (n_A/eta_A + n_B/eta_B)``, ``(M^2/p_pair) n_A n_B / (eta_A eta_B)``
    and ``(E + 1) p_pair``.

    Parameters
    ----------
    point: :class:`LinkPoint`
        The operating point.
    E: :class:`float`
        The conclusive probability of signal coincidences.
    """
    e = Probability(E, 'E')
    single, double = _background_terms(point)
    return RateBreakdown(float(e), single, double, (e + 1.0) * point.p_pair)


def error_rate(point: LinkPoint, D: float) -> RateBreakdown:
    """Computes the normalized rate of erroneous detection events.

    The parts are ``D``, half of each background term of :func:`event_rate`, and ``(D + 1/2) p_pair``.

    Parameters
    ----------
    point: :class:`LinkPoint`
        The operating point.
    D: :class:`float`
        The disturbance in the basis of interest.
    """
    d = Probability(D, 'D')
    single, double = _background_terms(point)
    return RateBreakdown(float(d), 0.5 * single, 0.5 * double, (d + 0.5) * point.p_pair)


def qber(point: LinkPoint, basis: Union[MeasBasis, str]) -> Probability:
    """Computes the quantum bit error rate in one basis, ``R_error / R_event``.

    Raises
    ------
    DegenerateDenominatorError
        The event rate vanishes.
    """
    events = event_rate(point, point.conclusive).total
    if events <= 0.0:
        raise DegenerateDenominatorError('event rate is zero')
    errors = error_rate(point, point.decoherence.for_basis(basis)).total
    return Probability(errors / events, f'e_{MeasBasis(basis).value}')


def qber_set(point: LinkPoint) -> QberSet:
    """Collects the QBER of every basis the protocol measures in."""
    e_Y = qber(point, MeasBasis.Y) if point.protocol.id.is_six_state else None
    return QberSet(qber(point, MeasBasis.X), qber(point, MeasBasis.Z), e_Y)


def pke(point: LinkPoint) -> float:
    """Computes the photon key efficiency, the secret bits obtained per detected photon pair.

    This is ``m R_event max(0, K)`` normalized by ``R_source eta_A eta_B``.
    """
    events = event_rate(point, point.conclusive).total
    k = key_fraction(point.protocol, qber_set(point))
    return point.m * events * max(0.0, k)


def _key_fraction_array(
    protocol: ProtocolSpec,
    e_X: npt.NDArray[np.float64],
    e_Y: npt.NDArray[np.float64],
    e_Z: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    if protocol.id.is_six_state:
        weights = np.stack(
            [
                1.0 - (e_X + e_Y + e_Z) / 2.0,
                (e_Z - e_X + e_Y) / 2.0,
                (e_Z + e_X - e_Y) / 2.0,
                (e_X + e_Y - e_Z) / 2.0,
            ]
        )
        weights = np.clip(weights, 0.0, 1.0)
        with np.errstate(divide='ignore', invalid='ignore'):
            terms = np.where(weights > 0.0, -weights * np.log2(np.where(weights > 0.0, weights, 1.0)), 0.0)
        return protocol.sift_factor * (1.0 - terms.sum(axis=0))

    prefactor = protocol.q if protocol.id is ProtocolId.BBM92_4 and not protocol.symmetric else 1.0
    return protocol.sift_factor * prefactor * (1.0 - binary_entropy_array(e_Z) - binary_entropy_array(e_X))


def pke_over_pairs(point: LinkPoint, p_pairs: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Vectorized :func:`pke` over many pair probabilities at otherwise fixed ``point``.

    The values agree with :func:`pke` up to rounding; the optimizer uses them for its grid scan.
    """
    p = np.asarray(p_pairs, dtype=np.float64)
    if np.any(p <= 0.0) or np.any(p > 0.5):
        raise DomainError('p_pair', p_pairs, 'pair probabilities must lie in (0, 1/2]')

    channel = point.channel
    E = float(point.conclusive)
    single = point.M * (channel.n_a / channel.eta_a + channel.n_b / channel.eta_b)
    double = (point.M * point.M / p) * (channel.n_a * channel.n_b) / (channel.eta_a * channel.eta_b)
    events = E + single + double + (E + 1.0) * p

    def rate(basis: MeasBasis) -> npt.NDArray[np.float64]:
        D = float(point.decoherence.for_basis(basis))
        return (D + 0.5 * single + 0.5 * double + (D + 0.5) * p) / events

    k = _key_fraction_array(point.protocol, rate(MeasBasis.X), rate(MeasBasis.Y), rate(MeasBasis.Z))
    return point.m * events * np.maximum(k, 0.0)


def absolute_key_rate(point: LinkPoint) -> float:
    """Computes the secret key rate in bits per second, ``PKE eta_A eta_B p_pair / dt``."""
    channel = point.channel
    return pke(point) * channel.eta_a * channel.eta_b * point.p_pair / channel.dt


def max_coding_order(eta: float, n: float) -> Optional[int]:
    """Returns the largest ``m`` with ``2**m <= eta / (2 n)``, or ``None`` without background.

    Beyond it background counts outnumber signal photons and no key can be distilled.
    Returns ``0`` when not even ``m = 1`` fits.
    """
    if n <= 0.0:
        return None
    bound = eta / (2.0 * n)
    if bound < 2.0:
        return 0
    return int(math.floor(math.log2(bound)))


def min_pair_probability(m: int, eta: float, n: float) -> float:
    """Returns ``2**m n / (2 eta)``, the pair probability below which background dominates."""
    return (1 << m) * n / (2.0 * eta)


class LinkEvaluation(Reconstructable[dict[str, Any]]):
    """
    .. attributetable:: qkd_efficiency.LinkEvaluation

    The full set of diagnostics at one operating point, as returned by :func:`evaluate`.

    Attributes
    ----------
    pke: :class:`float`
        The photon key efficiency.
    key_fraction: :class:`float`
        The key fraction before clamping at zero.
    qbers: Dict[:class:`str`, :class:`float`]
        The QBER of each measured basis, keyed by basis label.
    events: :class:`RateBreakdown`
        The event rate breakdown.
    errors: Dict[:class:`str`, :class:`RateBreakdown`]
        The error rate breakdown of each measured basis.
    absolute_key_rate: :class:`float`
        The key rate in bits per second.
    minimized_key_fraction: Optional[:class:`float`]
        For four-state BBM92, the key fraction minimized over the unobserved ``e_Y``.
    key_discrepancy: Optional[:class:`float`]
        The minimized key fraction minus the default one.
    """

    __slots__: tuple[str, ...] = (
        'pke',
        'key_fraction',
        'qbers',
        'events',
        'errors',
        'absolute_key_rate',
        'minimized_key_fraction',
        'key_discrepancy',
    )

    def __init__(self, *, data: dict[str, Any]) -> None:
        super().__init__(data=data)
        self.pke: float = data['pke']
        self.key_fraction: float = data['key_fraction']
        self.qbers: dict[str, float] = dict(data['qbers'])
        self.events: RateBreakdown = RateBreakdown(*_parts(data['events']))
        self.errors: dict[str, RateBreakdown] = {
            basis: RateBreakdown(*_parts(breakdown)) for basis, breakdown in data['errors'].items()
        }
        self.absolute_key_rate: float = data['absolute_key_rate']
        self.minimized_key_fraction: Optional[float] = data.get('minimized_key_fraction')
        self.key_discrepancy: Optional[float] = data.get('key_discrepancy')

    def __repr__(self) -> str:
        return f'<LinkEvaluation pke={self.pke!r} key_fraction={self.key_fraction!r} qbers={self.qbers!r}>'


def _parts(breakdown: dict[str, float]) -> tuple[float, float, float, float]:
    return (
        breakdown['signal_signal'],
        breakdown['signal_background'],
        breakdown['background_background'],
        breakdown['double_pair'],
    )


def evaluate(point: LinkPoint) -> LinkEvaluation:
    """Evaluates every quantity of the rate model at one operating point."""
    qbers = qber_set(point)
    k = key_fraction(point.protocol, qbers)
    events = event_rate(point, point.conclusive)
    data: dict[str, Any] = {
        'pke': point.m * events.total * max(0.0, k),
        'key_fraction': k,
        'qbers': {basis.value: float(qbers.for_basis(basis)) for basis in point.protocol.bases},  # type: ignore
        'events': events.to_dict(),
        'errors': {
            basis.value: error_rate(point, point.decoherence.for_basis(basis)).to_dict() for basis in point.protocol.bases
        },
        'absolute_key_rate': absolute_key_rate(point),
    }

    if point.protocol.id is ProtocolId.BBM92_4:
        minimized, _ = key_fraction_minimized(qbers.e_X, qbers.e_Z)
        prefactor = 1.0 if point.protocol.symmetric else point.protocol.q
        data['minimized_key_fraction'] = point.protocol.sift_factor * prefactor * minimized
        data['key_discrepancy'] = data['minimized_key_fraction'] - k

    _log.debug('evaluate m=%d p_pair=%r: pke=%r K=%r', point.m, point.p_pair, data['pke'], k)
    return LinkEvaluation(data=data)
