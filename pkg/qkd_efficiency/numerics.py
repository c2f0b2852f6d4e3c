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
from collections.abc import Iterable
from typing import Callable, Final, Optional

import numpy as np
import numpy.typing as npt
from typing_extensions import Self

from .errors import DomainError, NumericalFailure
from .utils import simple_repr

__all__: tuple[str, ...] = (
    'Probability',
    'BracketedInterval',
    'binary_entropy',
    'binary_entropy_array',
    'shannon_entropy4',
    'lambert_w',
    'maximize_scalar',
    'PROBABILITY_TOLERANCE',
)

_log = logging.getLogger(__name__)

# Values this far outside [0, 1] are treated as rounding noise and clamped.
PROBABILITY_TOLERANCE: Final[float] = 1e-12

LOG_GRID_POINTS_PER_DECADE: Final[int] = 200
LINEAR_GRID_POINTS: Final[int] = 512
REFINE_TOLERANCE: Final[float] = 1e-6

_INV_PHI: Final[float] = (math.sqrt(5.0) - 1.0) / 2.0


class Probability(float):
    """A float that is guaranteed to lie in ``[0, 1]``.

    Values within :data:`PROBABILITY_TOLERANCE` outside of the interval are clamped
    onto it, anything further out raises :class:`DomainError`.

    Parameters
    ----------
    value: :class:`float`
        The probability.
    field: :class:`str`
        The name reported when the value is rejected.
    """

    __slots__ = ()

    def __new__(cls, value: float, field: str = 'probability') -> Self:
        fvalue = float(value)
        if not math.isfinite(fvalue) or fvalue < -PROBABILITY_TOLERANCE or fvalue > 1.0 + PROBABILITY_TOLERANCE:
            raise DomainError(field, value, 'must lie in [0, 1]')
        return super().__new__(cls, min(1.0, max(0.0, fvalue)))


@simple_repr
class BracketedInterval:
    """
    .. attributetable:: qkd_efficiency.BracketedInterval

    A closed search interval ``[lo, hi]`` for :func:`maximize_scalar`.

    Attributes
    ----------
    lo: :class:`float`
        The lower edge.
    hi: :class:`float`
        The upper edge, strictly greater than :attr:`lo`.
    """

    __slots__: tuple[str, ...] = ('lo', 'hi')

    def __init__(self, lo: float, hi: float) -> None:
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError('interval', (lo, hi), 'edges must be finite')
        if not lo < hi:
            raise DomainError('interval', (lo, hi), 'lower edge must be below the upper edge')

        self.lo: float = float(lo)
        self.hi: float = float(hi)

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def decades(self) -> float:
        """:class:`float`: The number of decades spanned. Only meaningful for a positive interval."""
        return math.log10(self.hi / self.lo)


def _entropy_term(x: float) -> float:
    if x <= 0.0:
        return 0.0
    return -x * math.log2(x)


def binary_entropy(x: float) -> float:
    """Computes the binary Shannon entropy ``h(x) = -x log2 x - (1-x) log2(1-x)``.

    The result is exactly symmetric, ``binary_entropy(x) == binary_entropy(1 - x)``.

    Parameters
    ----------
    x: :class:`float`
        A probability.

    Raises
    ------
    DomainError
        ``x`` lies outside ``[0, 1]``.
    """
    p = Probability(x, 'x')
    # Both orientations reduce to the same (lo, hi) pair.
    hi = max(p, 1.0 - p)
    lo = 1.0 - hi
    return _entropy_term(lo) + _entropy_term(hi)


def binary_entropy_array(x: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Vectorized :func:`binary_entropy` over an array of probabilities.

    Entries are clipped onto ``[0, 1]`` instead of being rejected.
    """
    arr = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    hi = np.maximum(arr, 1.0 - arr)
    lo = 1.0 - hi
    with np.errstate(divide='ignore', invalid='ignore'):
        term_lo = np.where(lo > 0.0, -lo * np.log2(np.where(lo > 0.0, lo, 1.0)), 0.0)
        term_hi = np.where(hi > 0.0, -hi * np.log2(np.where(hi > 0.0, hi, 1.0)), 0.0)
    return term_lo + term_hi


def shannon_entropy4(probabilities: Iterable[float]) -> float:
    """Computes the Shannon entropy, in bits, of a four outcome distribution.

    Parameters
    ----------
    probabilities: Iterable[:class:`float`]
        Exactly four probabilities summing to one within ``1e-9``.

    Raises
    ------
    DomainError
        The input is not a distribution over four outcomes.
    """
    values = [Probability(p, 'probabilities') for p in probabilities]
    if len(values) != 4:
        raise DomainError('probabilities', values, 'expected exactly four entries')
    total = math.fsum(values)
    if abs(total - 1.0) > 1e-9:
        raise DomainError('probabilities', values, f'sum to {total!r}, not 1')
    return math.fsum(_entropy_term(p) for p in values)


def lambert_w(x: float, *, tolerance: float = 1e-12, max_iterations: int = 100) -> float:
    """Evaluates the principal branch ``W0`` of the Lambert W function for ``x >= 0``.

    Uses Halley's iteration from ``log1p(x)`` for small arguments and from
    ``log(x) - log(log(x))`` above ``e``.

    Parameters
    ----------
    x: :class:`float`
        The argument, finite and non-negative.
    tolerance: :class:`float`
        Relative residual ``|w e^w - x| / max(x, 1)`` at which iteration stops.
    max_iterations: :class:`int`
        The iteration cap.

    Raises
    ------
    DomainError
        ``x`` is negative or not finite.
    NumericalFailure
        Halley's iteration did not reach ``tolerance``.
    """
    if not math.isfinite(x) or x < 0.0:
        raise DomainError('x', x, 'lambert_w is only defined here for finite x >= 0')
    if x == 0.0:
        return 0.0

    w = math.log1p(x) if x < math.e else math.log(x) - math.log(math.log(x))
    scale = max(x, 1.0)
    for _ in range(max_iterations):
        ew = math.exp(w)
        residual = w * ew - x
        if abs(residual) <= tolerance * scale:
            return w

        dw = residual / (ew * (w + 1.0) - (w + 2.0) * residual / (2.0 * w + 2.0))
        w -= dw
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            break

    if abs(w * math.exp(w) - x) > tolerance * scale:
        raise NumericalFailure(f'lambert_w({x!r}) did not converge, last estimate {w!r}')
    return w


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def probe(x: float) -> float:
        value = f(x)
        if not math.isfinite(value):
            raise NumericalFailure(f'objective returned {value!r} at x={x!r}')
        return value

    return probe


def _golden_section(g: Callable[[float], float], a: float, b: float, tolerance: float) -> tuple[float, float]:
    # Maximizes g on [a, b]; ties keep the left point.
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = g(c)
    fd = g(d)
    for _ in range(200):
        if abs(b - a) <= tolerance:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = g(d)

    return (c, fc) if fc >= fd else (d, fd)


def maximize_scalar(
    f: Callable[[float], float],
    interval: BracketedInterval,
    *,
    log_scale: bool = False,
    vectorized: Optional[Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]] = None,
) -> tuple[float, float]:
    """Finds the global maximum of a scalar function on a closed interval.

    The interval is first scanned on a grid, :data:`LOG_GRID_POINTS_PER_DECADE` points per
    decade when ``log_scale`` is set and :data:`LINEAR_GRID_POINTS` points otherwise. The
    best grid cell is then refined by golden section search to a relative tolerance of
    :data:`REFINE_TOLERANCE`. Among equal maxima the lowest probed ``x`` wins.

    Parameters
    ----------
    f: Callable[[:class:`float`], :class:`float`]
        The objective.
    interval: :class:`BracketedInterval`
        The search interval. Must be positive when ``log_scale`` is set.
    log_scale: :class:`bool`
        Whether to grid and refine in ``log10(x)``.
    vectorized: Optional[Callable]
        An array version of ``f`` used for the grid scan only.

    Returns
    -------
    Tuple[:class:`float`, :class:`float`]
        The maximizer and the maximum.

    Raises
    ------
    NumericalFailure
        The objective returned a non-finite value.
    """
    probe = _checked(f)
    if log_scale:
        if interval.lo <= 0.0:
            raise DomainError('interval', (interval.lo, interval.hi), 'a log scale search needs a positive interval')
        count = max(2, math.ceil(LOG_GRID_POINTS_PER_DECADE * interval.decades) + 1)
        grid = np.logspace(math.log10(interval.lo), math.log10(interval.hi), count)
        grid[0], grid[-1] = interval.lo, interval.hi
    else:
        grid = np.linspace(interval.lo, interval.hi, LINEAR_GRID_POINTS)

    if vectorized is not None:
        values = np.asarray(vectorized(grid), dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise NumericalFailure('objective returned a non-finite value on the grid')
    else:
        values = np.array([probe(float(x)) for x in grid], dtype=np.float64)

    best = int(np.argmax(values))
    best_x, best_f = float(grid[best]), float(values[best])
    left = float(grid[max(best - 1, 0)])
    right = float(grid[min(best + 1, len(grid) - 1)])

    if log_scale:
        lo, hi = interval.lo, interval.hi
        u_ref, f_ref = _golden_section(
            lambda u: probe(min(max(10.0**u, lo), hi)),
            math.log10(left),
            math.log10(right),
            REFINE_TOLERANCE / math.log(10.0),
        )
        x_ref = min(max(10.0**u_ref, lo), hi)
    else:
        width = max(abs(left), abs(right), 1e-300)
        x_ref, f_ref = _golden_section(probe, left, right, REFINE_TOLERANCE * width)

    _log.debug('maximize_scalar: grid best %r at %r, refined %r at %r', best_f, best_x, f_ref, x_ref)
    if f_ref > best_f:
        return x_ref, f_ref
    return best_x, best_f
