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
from typing import Any, Final, Optional

from .abc import Reconstructable
from .enums import ProtocolId
from .errors import AsymptoticRegimeError, DomainError
from .flags import ResultFlags
from .link_model import ChannelParams, LinkPoint, pke
from .numerics import Probability, binary_entropy, lambert_w
from .optimizer import P_CEILING, P_FLOOR, optimize_pm
from .protocols import ProtocolSpec
from .quantum_channels import DisturbanceProfile

__all__: tuple[str, ...] = (
    'AsymptoticResult',
    'AsymptoticComparison',
    'key_fraction_approx',
    'compute_Xi',
    'optimal_p_pair_at',
    'approximate_qber',
    'pke_expansion',
    'asymptotic_optimum',
    'compare_asymptotics',
)

_log = logging.getLogger(__name__)

# Above this the first order expansion in xi is flagged.
XI_WARNING: Final[float] = 0.2
FULL_XI_ITERATIONS: Final[int] = 50


def key_fraction_approx(e_X: float, e_Z: float, q: float) -> float:
    """Expands the four-state BBM92 key fraction around the average QBER.

    Returns ``q [1 - 2 h(e_av)] + (e_X - e_Z)^2 / (4 e_av (1 - e_av) ln 2)`` with
    ``e_av = (e_X + e_Z) / 2``, and ``q`` when both QBERs vanish.
    """
    x, z, weight = Probability(e_X, 'e_X'), Probability(e_Z, 'e_Z'), Probability(q, 'q')
    e_av = (x + z) / 2.0
    if e_av == 0.0:
        return float(weight)
    if e_av >= 0.5:
        raise DomainError('e_av', e_av, 'average QBER must lie below 1/2')
    return weight * (1.0 - 2.0 * binary_entropy(e_av)) + (x - z) ** 2 / (4.0 * e_av * (1.0 - e_av) * math.log(2.0))


def compute_Xi(eta: float, n_b: float, D: float, p_pair: float = 0.0) -> float:
    """Computes the argument ``Xi`` of the Lambert function that fixes the optimal coding order.

    With ``p_pair == 0`` this is ``(e eta / 2 n_b) (2 h(D) - 1) / log2[2 D (1 - D)]``. A positive
    ``p_pair`` evaluates the full form at ``e_av = [p_pair + D (1 - p_pair)] / 2`` including the
    ``(1 + 2 p_pair)`` prefactor.

    Raises
    ------
    AsymptoticRegimeError
        ``n_b`` or ``D`` is zero, the efficiency is then unbounded, or ``Xi`` is not positive
        and no key can be distilled.
    """
    if n_b <= 0.0:
        raise AsymptoticRegimeError('noiseless', 'without background noise the efficiency grows without bound')
    if not 0.0 < eta <= 1.0:
        raise DomainError('eta', eta, 'transmission must lie in (0, 1]')
    d = Probability(D, 'D')
    if d <= 0.0:
        raise AsymptoticRegimeError('noiseless', 'without decoherence the closed forms are singular')
    if d >= 0.5:
        raise AsymptoticRegimeError('key_impossible', f'disturbance {d!r} leaves no key')

    p = Probability(p_pair, 'p_pair')
    if p > 0.0:
        e_av = (p + d * (1.0 - p)) / 2.0
        prefactor = 1.0 + 2.0 * p
    else:
        e_av = float(d)
        prefactor = 1.0

    xi = (math.e * eta / (2.0 * n_b)) * prefactor * (2.0 * binary_entropy(e_av) - 1.0) / math.log2(2.0 * e_av * (1.0 - e_av))
    if xi <= 0.0:
        raise AsymptoticRegimeError('key_impossible', f'Xi={xi!r} is not positive, no key can be distilled')
    return xi


def optimal_p_pair_at(m: float, eta: float, n_b: float) -> float:
    """Returns the pair probability ``(1/2) (eta / (2 n_b 2^m) - 1)^-1`` that minimizes the QBER at coding order ``m``.

    Raises
    ------
    AsymptoticRegimeError
        ``2^m`` does not stay below ``eta / (2 n_b)``.
    """
    if n_b <= 0.0:
        raise AsymptoticRegimeError('noiseless', 'without background noise the optimal pair probability vanishes')
    ratio = eta / (2.0 * n_b * 2.0**m) - 1.0
    if ratio <= 0.0:
        raise AsymptoticRegimeError('too_many_slots', f'2**{m!r} slots collect more background than signal')
    return 0.5 / ratio


def approximate_qber(p_pair: float, D_i: float, m: float, eta: float, n_b: float) -> float:
    """Returns ``p/2 + D_i (1 - p) + (1 - 3 p) (2^m n_b / eta) (1 - 2 D_i)``, the QBER expanded around the optimum."""
    return p_pair / 2.0 + D_i * (1.0 - p_pair) + (1.0 - 3.0 * p_pair) * (2.0**m * n_b / eta) * (1.0 - 2.0 * D_i)


def pke_expansion(m: float, p_pair: float, eta: float, n_b: float, D: float, q: float) -> float:
    """Expands the four-state BBM92 efficiency to first order in ``xi = 2^m n_b / (2 eta p_pair)``.

    Returns ``q m {(1 + 2p) [1 - 2h(e_av)] + 2 p xi log2[4 e_av^2 (1 - e_av)^2]}`` with
    ``e_av = [p + D (1 - p)] / 2``.
    """
    p = Probability(p_pair, 'p_pair')
    if p <= 0.0:
        raise DomainError('p_pair', p_pair, 'must be positive')
    e_av = (p + D * (1.0 - p)) / 2.0
    xi = 2.0**m * n_b / (2.0 * eta * p)
    return q * m * ((1.0 + 2.0 * p) * (1.0 - 2.0 * binary_entropy(e_av)) + 2.0 * p * xi * math.log2(4.0 * e_av**2 * (1.0 - e_av) ** 2))


class AsymptoticResult(Reconstructable[dict[str, Any]]):
    """
    .. attributetable:: qkd_efficiency.AsymptoticResult

    The weak-noise closed form optimum of four-state BBM92.

    Attributes
    ----------
    Xi: :class:`float`
        The Lambert function argument.
    W_Xi: :class:`float`
        ``W(Xi)``.
    m_star_cont: :class:`float`
        The continuous optimal coding order ``(W - 1) / ln 2``.
    m_star_round: :class:`int`
        :attr:`m_star_cont` rounded to the nearest integer, at least one.
    p_pair_star: :class:`float`
        The optimal pair probability.
    pke_approx: :class:`float`
        The approximate optimal efficiency.
    e_star_X: :class:`float`
        The approximate X basis QBER at the optimum.
    e_star_Z: :class:`float`
        The approximate Z basis QBER at the optimum.
    xi_check: :class:`float`
        The expansion parameter ``2^m n_b / (2 eta p_pair)`` at the optimum.
    D_avg: :class:`float`
        The average disturbance.
    D_minus: :class:`float`
        The differential disturbance ``D_X - D_Z``.
    full_xi: :class:`bool`
        Whether the full, pair probability dependent ``Xi`` was used.
    flags: :class:`ResultFlags`
        :attr:`ResultFlags.EXPANSION_WARNING` when :attr:`xi_check` exceeds 0.2.
    """

    __slots__: tuple[str, ...] = (
        'Xi',
        'W_Xi',
        'm_star_cont',
        'm_star_round',
        'p_pair_star',
        'pke_approx',
        'e_star_X',
        'e_star_Z',
        'xi_check',
        'D_avg',
        'D_minus',
        'full_xi',
        'flags',
    )

    def __init__(self, *, data: dict[str, Any]) -> None:
        super().__init__(data=data)
        self.Xi: float = data['Xi']
        self.W_Xi: float = data['W_Xi']
        self.m_star_cont: float = data['m_star_cont']
        self.m_star_round: int = data['m_star_round']
        self.p_pair_star: float = data['p_pair_star']
        self.pke_approx: float = data['pke_approx']
        self.e_star_X: float = data['e_star_X']
        self.e_star_Z: float = data['e_star_Z']
        self.xi_check: float = data['xi_check']
        self.D_avg: float = data['D_avg']
        self.D_minus: float = data['D_minus']
        self.full_xi: bool = data.get('full_xi', False)
        self.flags: ResultFlags = ResultFlags(data.get('flags', 0))

    def __repr__(self) -> str:
        return (
            f'<AsymptoticResult m_star_cont={self.m_star_cont!r} p_pair_star={self.p_pair_star!r} '
            f'pke_approx={self.pke_approx!r}>'
        )


def _closed_form(eta: float, n_b: float, profile: DisturbanceProfile, q: float, xi: float) -> dict[str, Any]:
    w = lambert_w(xi)
    if w <= 1.0:
        raise AsymptoticRegimeError('single_qubit', f'W(Xi)={w!r} <= 1, not even one qubit per photon pays off')

    D = profile.D_avg
    m_cont = (w - 1.0) / math.log(2.0)
    p_star = optimal_p_pair_at(m_cont, eta, n_b)
    if p_star > 0.5:
        raise AsymptoticRegimeError('too_many_slots', f'optimal pair probability {p_star!r} exceeds 1/2')

    return {
        'Xi': xi,
        'W_Xi': w,
        'm_star_cont': m_cont,
        'm_star_round': max(1, int(math.floor(m_cont + 0.5))),
        'p_pair_star': p_star,
        'pke_approx': q * (1.0 - 2.0 * binary_entropy(min(D + p_star / 2.0, 1.0))) * (w - 1.0) ** 2 / (w * math.log(2.0)),
        'e_star_X': approximate_qber(p_star, profile.D_X, m_cont, eta, n_b),
        'e_star_Z': approximate_qber(p_star, profile.D_Z, m_cont, eta, n_b),
        'xi_check': 2.0**m_cont * n_b / (2.0 * eta * p_star),
        'D_avg': D,
        'D_minus': profile.D_minus,
    }


def asymptotic_optimum(
    eta: float,
    n_b: float,
    profile: DisturbanceProfile,
    q: float = 1.0,
    *,
    full_xi: bool = False,
) -> AsymptoticResult:
    """Evaluates the closed form optimum of four-state BBM92 on a symmetric channel.

    The optimal coding order is ``(W(Xi) - 1) / ln 2``, the pair probability follows from
    :func:`optimal_p_pair_at` at that order, and the efficiency is
    ``q [1 - 2 h(D + p/2)] (W - 1)^2 / (W ln 2)``. With ``full_xi`` the pair probability dependent
    ``Xi`` is iterated to a fixed point, starting from the simplified one.

    Parameters
    ----------
    eta: :class:`float`
        The transmission of either side.
    n_b: :class:`float`
        The background count probability per slot of either side.
    profile: :class:`DisturbanceProfile`
        The disturbances of the decohered pair.
    q: :class:`float`
        The key basis bias.
    full_xi: :class:`bool`
        Whether to use the full form of ``Xi``.

    Raises
    ------
    AsymptoticRegimeError
        The closed forms do not apply at these parameters.
    """
    D = profile.D_avg
    xi = compute_Xi(eta, n_b, D)
    data = _closed_form(eta, n_b, profile, q, xi)
    if full_xi:
        for _ in range(FULL_XI_ITERATIONS):
            xi = compute_Xi(eta, n_b, D, data['p_pair_star'])
            updated = _closed_form(eta, n_b, profile, q, xi)
            converged = abs(updated['p_pair_star'] - data['p_pair_star']) <= 1e-12 * data['p_pair_star']
            data = updated
            if converged:
                break

    flags = ResultFlags.NONE
    if data['xi_check'] > XI_WARNING:
        flags |= ResultFlags.EXPANSION_WARNING
    data.update(full_xi=full_xi, flags=int(flags))

    _log.debug('asymptotic_optimum n_b/eta=%r: Xi=%r m*=%r p*=%r', n_b / eta, data['Xi'], data['m_star_cont'], data['p_pair_star'])
    return AsymptoticResult(data=data)


class AsymptoticComparison(Reconstructable[dict[str, Any]]):
    """
    .. attributetable:: qkd_efficiency.AsymptoticComparison

    The closed form optimum side by side with the numeric one.

    Attributes
    ----------
    closed: :class:`AsymptoticResult`
        The simplified closed form.
    closed_full: Optional[:class:`AsymptoticResult`]
        The full ``Xi`` closed form, if it could be evaluated.
    m_numeric: :class:`int`
        The numerically optimal coding order.
    p_numeric: :class:`float`
        The numerically optimal pair probability.
    pke_numeric: :class:`float`
        The numerically optimal efficiency.
    p_closed_at_m: :class:`float`
        :func:`optimal_p_pair_at` evaluated at :attr:`m_numeric`.
    pke_exact_at_closed: :class:`float`
        The exact efficiency at the rounded closed form coding order and pair probability.
    """

    __slots__: tuple[str, ...] = (
        'closed',
        'closed_full',
        'm_numeric',
        'p_numeric',
        'pke_numeric',
        'p_closed_at_m',
        'pke_exact_at_closed',
    )

    def __init__(self, *, data: dict[str, Any]) -> None:
        super().__init__(data=data)
        self.closed: AsymptoticResult = AsymptoticResult(data=data['closed'])
        full = data.get('closed_full')
        self.closed_full: Optional[AsymptoticResult] = None if full is None else AsymptoticResult(data=full)
        self.m_numeric: int = data['m_numeric']
        self.p_numeric: float = data['p_numeric']
        self.pke_numeric: float = data['pke_numeric']
        self.p_closed_at_m: float = data['p_closed_at_m']
        self.pke_exact_at_closed: float = data['pke_exact_at_closed']

    def __repr__(self) -> str:
        return (
            f'<AsymptoticComparison m_numeric={self.m_numeric!r} m_closed={self.closed.m_star_round!r} '
            f'pke_numeric={self.pke_numeric!r} pke_closed={self.closed.pke_approx!r}>'
        )

    @property
    def m_error(self) -> int:
        """:class:`int`: ``|m_numeric - m_star_round|``."""
        return abs(self.m_numeric - self.closed.m_star_round)

    @property
    def p_ratio(self) -> float:
        """:class:`float`: ``p_numeric / p_closed_at_m``."""
        return self.p_numeric / self.p_closed_at_m

    @property
    def pke_ratio(self) -> float:
        """:class:`float`: ``pke_exact_at_closed / pke_approx``."""
        return self.pke_exact_at_closed / self.closed.pke_approx


def compare_asymptotics(
    eta: float,
    n_b: float,
    profile: DisturbanceProfile,
    protocol: Optional[ProtocolSpec] = None,
    *,
    p_floor: float = P_FLOOR,
    p_ceiling: float = P_CEILING,
) -> AsymptoticComparison:
    """Runs the numeric optimizer and the closed forms on the same symmetric four-state BBM92 link.

    Raises
    ------
    AsymptoticRegimeError
        The protocol is not four-state BBM92 or the closed forms do not apply.
    """
    protocol = protocol or ProtocolSpec.from_id(ProtocolId.BBM92_4)
    if protocol.id is not ProtocolId.BBM92_4:
        raise AsymptoticRegimeError('protocol', f'closed forms exist only for bbm92-4, not {protocol.id.value}')

    q = 1.0 if protocol.symmetric else protocol.q
    q *= protocol.sift_factor
    closed = asymptotic_optimum(eta, n_b, profile, q)
    try:
        closed_full: Optional[AsymptoticResult] = asymptotic_optimum(eta, n_b, profile, q, full_xi=True)
    except AsymptoticRegimeError as exc:
        _log.debug('full Xi closed form unavailable: %s', exc)
        closed_full = None

    template = LinkPoint(
        m=1,
        p_pair=p_ceiling,
        channel=ChannelParams.symmetric(eta, n_b),
        protocol=protocol,
        decoherence=profile,
    )
    numeric = optimize_pm(template, p_floor=p_floor, p_ceiling=p_ceiling)
    exact = pke(template.replace(m=closed.m_star_round, p_pair=closed.p_pair_star))

    data: dict[str, Any] = {
        'closed': closed.to_dict(),
        'closed_full': None if closed_full is None else closed_full.to_dict(),
        'm_numeric': numeric.m_star,
        'p_numeric': numeric.p_pair_star,
        'pke_numeric': numeric.pke_star,
        'p_closed_at_m': optimal_p_pair_at(numeric.m_star, eta, n_b),
        'pke_exact_at_closed': exact,
    }
    return AsymptoticComparison(data=data)
