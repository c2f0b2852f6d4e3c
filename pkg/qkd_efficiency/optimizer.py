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

import csv
import itertools
import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import IO, Any, Final, Optional, Union

import numpy as np
import numpy.typing as npt

from .abc import Reconstructable
from .enums import AxisScale, MeasBasis, SweepParameter
from .errors import DomainError, QKDEfficiencyException
from .flags import ResultFlags
from .link_model import (
    ChannelParams,
    LinkPoint,
    error_rate,
    event_rate,
    min_pair_probability,
    pke,
    pke_over_pairs,
    qber_set,
)
from .numerics import BracketedInterval, maximize_scalar
from .protocols import ProtocolSpec
from .utils import format_float, simple_repr

__all__: tuple[str, ...] = (
    'P_FLOOR',
    'P_CEILING',
    'M_CEILING',
    'CSV_HEADER',
    'PairOptimum',
    'OptimizationResult',
    'SweepAxis',
    'SweepGrid',
    'SweepCell',
    'SweepResult',
    'coding_order_limit',
    'optimize_p',
    'optimize_pm',
    'pke_curve',
    'sweep',
)

_log = logging.getLogger(__name__)

P_FLOOR: Final[float] = 1e-8
P_CEILING: Final[float] = 0.5
M_CEILING: Final[int] = 30

# A maximum is flat when PKE stays within this fraction over a decade of p_pair.
FLAT_TOLERANCE: Final[float] = 1e-3

CSV_HEADER: Final[tuple[str, ...]] = (
    'n_ratio_A',
    'n_ratio_B',
    'protocol',
    'm_star',
    'p_pair_star',
    'pke',
    'e_X',
    'e_Z',
    'flags',
)


@simple_repr
class PairOptimum:
    """
    .. attributetable:: qkd_efficiency.PairOptimum

    The best pair probability at a fixed coding order.

    Attributes
    ----------
    m: :class:`int`
        The coding order.
    p_pair: :class:`float`
        The maximizing pair probability.
    pke: :class:`float`
        The photon key efficiency at :attr:`p_pair`.
    flags: :class:`ResultFlags`
        Diagnostic markers such as :attr:`ResultFlags.FLAT_MAXIMUM`.
    """

    __slots__: tuple[str, ...] = ('m', 'p_pair', 'pke', 'flags')

    def __init__(self, m: int, p_pair: float, pke: float, flags: ResultFlags = ResultFlags.NONE) -> None:
        self.m: int = m
        self.p_pair: float = p_pair
        self.pke: float = pke
        self.flags: ResultFlags = flags

    def to_dict(self) -> dict[str, Any]:
        return {'m': self.m, 'p_pair': self.p_pair, 'pke': self.pke, 'flags': int(self.flags)}


class OptimizationResult(Reconstructable[dict[str, Any]]):
    """
    .. attributetable:: qkd_efficiency.OptimizationResult

    The operating point of highest photon key efficiency, as found by :func:`optimize_pm`.

    Attributes
    ----------
    m_star: :class:`int`
        The optimal coding order.
    p_pair_star: :class:`float`
        The optimal pair probability.
    pke_star: :class:`float`
        The photon key efficiency at the optimum.
    qbers: Dict[:class:`str`, Optional[:class:`float`]]
        The QBERs at the optimum, keyed ``e_X``, ``e_Y`` and ``e_Z``.
    events: Dict[:class:`str`, :class:`float`]
        The event rate breakdown at the optimum.
    errors: Dict[:class:`str`, :class:`float`]
        The Z basis error rate breakdown at the optimum.
    flags: :class:`ResultFlags`
        Diagnostic markers.
    scan: List[:class:`PairOptimum`]
        The best pair probability found for every admissible coding order.
    """

    __slots__: tuple[str, ...] = ('m_star', 'p_pair_star', 'pke_star', 'qbers', 'events', 'errors', 'flags', 'scan')

    def __init__(self, *, data: dict[str, Any]) -> None:
        super().__init__(data=data)
        self.m_star: int = data['m_star']
        self.p_pair_star: float = data['p_pair_star']
        self.pke_star: float = data['pke_star']
        self.qbers: dict[str, Optional[float]] = dict(data['qbers'])
        self.events: dict[str, float] = dict(data['events'])
        self.errors: dict[str, float] = dict(data['errors'])
        self.flags: ResultFlags = ResultFlags(data['flags'])
        self.scan: list[PairOptimum] = [
            PairOptimum(entry['m'], entry['p_pair'], entry['pke'], ResultFlags(entry['flags'])) for entry in data['scan']
        ]

    def __repr__(self) -> str:
        return (
            f'<OptimizationResult m_star={self.m_star!r} p_pair_star={self.p_pair_star!r} '
            f'pke_star={self.pke_star!r} flags={self.flags!r}>'
        )

    @property
    def flat_flag(self) -> bool:
        """:class:`bool`: Whether the maximum is a plateau."""
        return bool(self.flags & ResultFlags.FLAT_MAXIMUM)


def coding_order_limit(channel: ChannelParams) -> tuple[int, Optional[float]]:
    """Returns the largest coding order worth scanning and the slot bound ``eta / (2 n)``.

    With background noise the scan stops at ``ceil(log2(eta / (2 n)) + 2)``, capped at
    :data:`M_CEILING`, and the bound is taken on the noisier side. Without noise the bound is ``None``.
    """
    ratio = channel.worst_noise_ratio
    if ratio <= 0.0:
        return M_CEILING, None
    bound = 1.0 / (2.0 * ratio)
    if bound <= 1.0:
        return 0, bound
    return max(0, min(M_CEILING, math.ceil(math.log2(bound) + 2.0))), bound


def _is_flat(point: LinkPoint, p_star: float, pke_star: float, interval: BracketedInterval) -> bool:
    if pke_star <= 0.0:
        return False
    spread = math.sqrt(10.0)
    neighbours = {min(max(p_star / spread, interval.lo), interval.hi), min(max(p_star * spread, interval.lo), interval.hi)}
    return all(pke(point.replace(p_pair=p)) >= (1.0 - FLAT_TOLERANCE) * pke_star for p in neighbours)


def optimize_p(
    template: LinkPoint,
    m: int,
    *,
    p_floor: float = P_FLOOR,
    p_ceiling: float = P_CEILING,
) -> PairOptimum:
    """Maximizes the photon key efficiency over the pair probability at a fixed coding order.

    The search runs on a logarithmic grid over ``[p_floor, p_ceiling]`` followed by golden
    section refinement. The lower edge is raised to ``2**m n / (2 eta)`` on the noisier side,
    below which background counts outnumber signal photons.

    Parameters
    ----------
    template: :class:`LinkPoint`
        The operating point; its ``m`` and ``p_pair`` are ignored.
    m: :class:`int`
        The coding order.
    p_floor: :class:`float`
        The lower edge of the search interval.
    p_ceiling: :class:`float`
        The upper edge of the search interval.

    Returns
    -------
    :class:`PairOptimum`
        The optimum. Without any positive key ``pke`` is zero, ``p_pair`` is the lower edge
        and :attr:`ResultFlags.ZERO_KEY` is set.
    """
    if not 0.0 < p_floor < p_ceiling <= 0.5:
        raise DomainError('p_floor, p_ceiling', (p_floor, p_ceiling), 'need 0 < p_floor < p_ceiling <= 1/2')

    point = template.replace(m=m)
    channel = point.channel
    guard = min_pair_probability(m, 1.0, channel.worst_noise_ratio)
    lo = max(p_floor, guard)
    if lo >= p_ceiling:
        _log.debug('optimize_p m=%d: pair probability guard %r exceeds the search interval', m, guard)
        return PairOptimum(m, p_ceiling, 0.0, ResultFlags.ZERO_KEY | ResultFlags.INFEASIBLE)

    interval = BracketedInterval(lo, p_ceiling)
    p_star, _ = maximize_scalar(
        lambda p: pke(point.replace(p_pair=p)),
        interval,
        log_scale=True,
        vectorized=lambda grid: pke_over_pairs(point, grid),
    )
    # The scalar path is authoritative for the reported value.
    pke_star = pke(point.replace(p_pair=p_star))

    flags = ResultFlags.NONE
    if pke_star <= 0.0:
        _log.debug('optimize_p m=%d: no positive key on [%r, %r]', m, interval.lo, interval.hi)
        return PairOptimum(m, interval.lo, 0.0, ResultFlags.ZERO_KEY)

    if p_star <= interval.lo:
        flags |= ResultFlags.LOWER_EDGE
    if _is_flat(point, p_star, pke_star, interval):
        flags |= ResultFlags.FLAT_MAXIMUM

    _log.debug('optimize_p m=%d: p*=%r pke*=%r flags=%r', m, p_star, pke_star, flags)
    return PairOptimum(m, p_star, pke_star, flags)


def optimize_pm(
    template: LinkPoint,
    *,
    m_max: Optional[int] = None,
    p_floor: float = P_FLOOR,
    p_ceiling: float = P_CEILING,
) -> OptimizationResult:
    """Maximizes the photon key efficiency over both the coding order and the pair probability.

    Every ``m`` from one up to the scan limit of :func:`coding_order_limit` is tried, skipping
    coding orders with ``2**m >= eta / (2 n)``. Ties go to the smaller ``m``.

    Parameters
    ----------
    template: :class:`LinkPoint`
        The operating point; its ``m`` and ``p_pair`` are ignored.
    m_max: Optional[:class:`int`]
        Overrides the scan limit.
    p_floor: :class:`float`
        The lower edge of the pair probability search.
    p_ceiling: :class:`float`
        The upper edge of the pair probability search.
    """
    limit, bound = coding_order_limit(template.channel)
    if m_max is not None:
        limit = min(limit, m_max)

    scan: list[PairOptimum] = []
    for m in range(1, limit + 1):
        if bound is not None and (1 << m) >= bound:
            break
        result = optimize_p(template, m, p_floor=p_floor, p_ceiling=p_ceiling)
        scan.append(result)

    positive = [entry for entry in scan if entry.pke > 0.0]
    if not scan:
        best = PairOptimum(1, p_floor, 0.0, ResultFlags.ZERO_KEY | ResultFlags.INFEASIBLE)
    elif not positive:
        best = PairOptimum(1, scan[0].p_pair, 0.0, ResultFlags.ZERO_KEY)
    else:
        best = positive[0]
        for entry in positive[1:]:
            if entry.pke > best.pke:
                best = entry

    _log.debug('optimize_pm: m*=%d p*=%r pke*=%r over %d coding orders', best.m, best.p_pair, best.pke, len(scan))
    return _build_result(template, best, scan)


def _build_result(template: LinkPoint, best: PairOptimum, scan: Sequence[PairOptimum]) -> OptimizationResult:
    point = template.replace(m=best.m, p_pair=best.p_pair)
    qbers = qber_set(point)
    data: dict[str, Any] = {
        'm_star': best.m,
        'p_pair_star': best.p_pair,
        'pke_star': best.pke,
        'qbers': qbers.to_dict(),
        'events': event_rate(point, point.conclusive).to_dict(),
        'errors': error_rate(point, point.decoherence.for_basis(MeasBasis.Z)).to_dict(),
        'flags': int(best.flags),
        'scan': [entry.to_dict() for entry in scan],
    }
    return OptimizationResult(data=data)


def pke_curve(
    template: LinkPoint, m: int, p_pairs: Iterable[float]
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Evaluates the photon key efficiency along a range of pair probabilities at fixed ``m``.

    Returns
    -------
    Tuple[:class:`numpy.ndarray`, :class:`numpy.ndarray`]
        The pair probabilities and the matching efficiencies.
    """
    p = np.asarray(list(p_pairs), dtype=np.float64)
    point = template.replace(m=m)
    values = np.array([pke(point.replace(p_pair=float(x))) for x in p], dtype=np.float64)
    return p, values


@simple_repr
class SweepAxis:
    """
    .. attributetable:: qkd_efficiency.SweepAxis

    One axis of a parameter sweep.

    Attributes
    ----------
    parameter: :class:`SweepParameter`
        The swept quantity.
    lo: :class:`float`
        The first value.
    hi: :class:`float`
        The last value.
    count: :class:`int`
        The number of values, at least one.
    scale: :class:`AxisScale`
        The spacing of the values.
    """

    __slots__: tuple[str, ...] = ('parameter', 'lo', 'hi', 'count', 'scale')

    def __init__(
        self,
        parameter: Union[SweepParameter, str],
        lo: float,
        hi: float,
        count: int,
        scale: Union[AxisScale, str] = AxisScale.LOG,
    ) -> None:
        self.parameter: SweepParameter = SweepParameter(parameter)
        self.scale: AxisScale = AxisScale(scale)
        if count < 1:
            raise DomainError('count', count, 'an axis needs at least one value')
        if count > 1 and not lo < hi:
            raise DomainError('axis', (lo, hi), 'values must be strictly increasing')
        if self.scale is AxisScale.LOG and lo <= 0.0:
            raise DomainError('lo', lo, 'a log axis must be positive')

        self.lo: float = float(lo)
        self.hi: float = float(hi)
        self.count: int = int(count)

    @classmethod
    def parse(cls, text: str) -> SweepAxis:
        """Parses ``parameter:lo:hi:count[:scale]``, e.g. ``'n_ratio_A:1e-7:1e-3:20:log'``."""
        parts = text.split(':')
        if len(parts) not in (4, 5):
            raise DomainError('axis', text, 'expected parameter:lo:hi:count[:scale]')
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]), parts[4] if len(parts) == 5 else 'log')
        except ValueError as exc:
            raise DomainError('axis', text, str(exc)) from None

    def values(self) -> npt.NDArray[np.float64]:
        """:class:`numpy.ndarray`: The axis values in increasing order."""
        if self.count == 1:
            return np.array([self.lo])
        if self.scale is AxisScale.LOG:
            return np.logspace(math.log10(self.lo), math.log10(self.hi), self.count)
        return np.linspace(self.lo, self.hi, self.count)

    def __str__(self) -> str:
        return f'{self.parameter.value}:{self.lo!r}:{self.hi!r}:{self.count}:{self.scale.value}'


@simple_repr
class SweepGrid:
    """
    .. attributetable:: qkd_efficiency.SweepGrid

    A one or two dimensional parameter sweep over one or more protocols.

    Attributes
    ----------
    axes: Tuple[:class:`SweepAxis`, ...]
        The swept axes.
    template: :class:`LinkPoint`
        The operating point the axes modify.
    protocols: Tuple[:class:`ProtocolSpec`, ...]
        The protocols evaluated in every cell.
    m: Optional[:class:`int`]
        A fixed coding order. Required when ``p_pair`` is swept, otherwise the coding order is optimized.
    p_floor: :class:`float`
        The lower edge of the pair probability search.
    p_ceiling: :class:`float`
        The upper edge of the pair probability search.
    """

    __slots__: tuple[str, ...] = ('axes', 'template', 'protocols', 'm', 'p_floor', 'p_ceiling')

    def __init__(
        self,
        axes: Sequence[SweepAxis],
        template: LinkPoint,
        *,
        protocols: Optional[Sequence[ProtocolSpec]] = None,
        m: Optional[int] = None,
        p_floor: float = P_FLOOR,
        p_ceiling: float = P_CEILING,
    ) -> None:
        if not 1 <= len(axes) <= 2:
            raise DomainError('axes', axes, 'a sweep has one or two axes')
        parameters = [axis.parameter for axis in axes]
        if len(set(parameters)) != len(parameters):
            raise DomainError('axes', axes, 'each parameter may only be swept once')
        if SweepParameter.P_PAIR in parameters and m is None:
            raise DomainError('m', m, 'sweeping p_pair needs a fixed coding order')

        self.axes: tuple[SweepAxis, ...] = tuple(axes)
        self.template: LinkPoint = template
        self.protocols: tuple[ProtocolSpec, ...] = tuple(protocols) if protocols else (template.protocol,)
        self.m: Optional[int] = m
        self.p_floor: float = p_floor
        self.p_ceiling: float = p_ceiling

    @property
    def shape(self) -> tuple[int, ...]:
        """Tuple[:class:`int`, ...]: The number of values along each axis."""
        return tuple(axis.count for axis in self.axes)

    def cells(self) -> list[tuple[tuple[int, ...], LinkPoint]]:
        """Lists ``(index, point)`` for every grid cell and protocol, in row-major order."""
        out: list[tuple[tuple[int, ...], LinkPoint]] = []
        values = [axis.values() for axis in self.axes]
        for index in itertools.product(*(range(axis.count) for axis in self.axes)):
            for protocol in self.protocols:
                point = self.template.replace(protocol=protocol)
                for axis, column, i in zip(self.axes, values, index):
                    point = _apply_axis(point, axis.parameter, float(column[i]))
                if self.m is not None:
                    point = point.replace(m=self.m)
                out.append((index, point))
        return out


def _apply_axis(point: LinkPoint, parameter: SweepParameter, value: float) -> LinkPoint:
    channel = point.channel
    if parameter is SweepParameter.P_PAIR:
        return point.replace(p_pair=value)

    n_a, n_b = channel.n_a, channel.n_b
    if parameter in (SweepParameter.N_RATIO_A, SweepParameter.N_RATIO):
        n_a = value * channel.eta_a
    if parameter in (SweepParameter.N_RATIO_B, SweepParameter.N_RATIO):
        n_b = value * channel.eta_b
    return point.replace(channel=ChannelParams(eta_a=channel.eta_a, eta_b=channel.eta_b, n_a=n_a, n_b=n_b, dt=channel.dt))


class SweepCell(Reconstructable[dict[str, Any]]):
    """
    .. attributetable:: qkd_efficiency.SweepCell

    The outcome of one sweep cell.

    Attributes
    ----------
    index: Tuple[:class:`int`, ...]
        The position of the cell along each axis.
    protocol: :class:`str`
        The protocol id.
    n_ratio_a: :class:`float`
        Alice's noise-to-efficiency ratio of the cell.
    n_ratio_b: :class:`float`
        Bob's noise-to-efficiency ratio of the cell.
    m_star: :class:`int`
        The (optimal) coding order.
    p_pair_star: :class:`float`
        The (optimal) pair probability.
    pke: :class:`float`
        The photon key efficiency, ``nan`` for failed cells.
    e_X: :class:`float`
        The X basis QBER.
    e_Z: :class:`float`
        The Z basis QBER.
    flags: :class:`ResultFlags`
        Diagnostic markers, including :attr:`ResultFlags.CELL_FAILED`.
    error: Optional[:class:`str`]
        The failure message of a failed cell.
    """

    __slots__: tuple[str, ...] = (
        'index',
        'protocol',
        'n_ratio_a',
        'n_ratio_b',
        'm_star',
        'p_pair_star',
        'pke',
        'e_X',
        'e_Z',
        'flags',
        'error',
    )

    def __init__(self, *, data: dict[str, Any]) -> None:
        super().__init__(data=data)
        self.index: tuple[int, ...] = tuple(data['index'])
        self.protocol: str = data['protocol']
        self.n_ratio_a: float = data['n_ratio_A']
        self.n_ratio_b: float = data['n_ratio_B']
        self.m_star: int = data['m_star']
        self.p_pair_star: float = data['p_pair_star']
        self.pke: float = data['pke']
        self.e_X: float = data['e_X']
        self.e_Z: float = data['e_Z']
        self.flags: ResultFlags = ResultFlags(data['flags'])
        self.error: Optional[str] = data.get('error')

    def __repr__(self) -> str:
        return f'<SweepCell index={self.index!r} protocol={self.protocol!r} pke={self.pke!r} flags={self.flags!r}>'

    @property
    def failed(self) -> bool:
        """:class:`bool`: Whether the cell raised instead of producing a result."""
        return bool(self.flags & ResultFlags.CELL_FAILED)

    def csv_row(self) -> list[str]:
        """List[:class:`str`]: The cell formatted in :data:`CSV_HEADER` order."""
        return [
            format_float(self.n_ratio_a),
            format_float(self.n_ratio_b),
            self.protocol,
            str(self.m_star),
            format_float(self.p_pair_star),
            format_float(self.pke),
            format_float(self.e_X),
            format_float(self.e_Z),
            self.flags.names(),
        ]


# What a cell does with its point.
_EVALUATE: Final[str] = 'evaluate'
_OPTIMIZE_P: Final[str] = 'optimize_p'
_OPTIMIZE_PM: Final[str] = 'optimize_pm'

_CellTask = tuple[tuple[int, ...], LinkPoint, str, float, float]


def _evaluate_cell(task: _CellTask) -> dict[str, Any]:
    index, point, mode, p_floor, p_ceiling = task
    data: dict[str, Any] = {
        'index': list(index),
        'protocol': point.protocol.id.value,
        'n_ratio_A': point.channel.noise_ratio_a,
        'n_ratio_B': point.channel.noise_ratio_b,
    }
    try:
        if mode == _EVALUATE:
            best = PairOptimum(point.m, point.p_pair, pke(point))
        elif mode == _OPTIMIZE_P:
            best = optimize_p(point, point.m, p_floor=p_floor, p_ceiling=p_ceiling)
        else:
            result = optimize_pm(point, p_floor=p_floor, p_ceiling=p_ceiling)
            best = PairOptimum(result.m_star, result.p_pair_star, result.pke_star, result.flags)

        qbers = qber_set(point.replace(m=best.m, p_pair=best.p_pair))
        data.update(
            m_star=best.m,
            p_pair_star=best.p_pair,
            pke=best.pke,
            e_X=float(qbers.e_X),
            e_Z=float(qbers.e_Z),
            flags=int(best.flags),
        )
    except QKDEfficiencyException as exc:
        _log.warning('sweep cell %r (%s) failed: %s', index, point.protocol.id.value, exc)
        nan = float('nan')
        data.update(
            m_star=point.m,
            p_pair_star=point.p_pair,
            pke=nan,
            e_X=nan,
            e_Z=nan,
            flags=int(ResultFlags.CELL_FAILED),
            error=str(exc),
        )
    return data


def sweep(grid: SweepGrid, *, workers: int = 1) -> SweepResult:
    """Evaluates every cell of a sweep.

    Cells optimize both ``m`` and ``p_pair`` unless the grid fixes ``m``; with ``p_pair`` on an
    axis the cells evaluate the efficiency at that exact point. A failing cell is recorded with
    :attr:`ResultFlags.CELL_FAILED` and never aborts the sweep. The result does not depend on ``workers``.

    Parameters
    ----------
    grid: :class:`SweepGrid`
        The grid to evaluate.
    workers: :class:`int`
        The number of worker processes; ``1`` evaluates in-process.
    """
    if workers < 1:
        raise DomainError('workers', workers, 'need at least one worker')

    sweeps_p = any(axis.parameter is SweepParameter.P_PAIR for axis in grid.axes)
    if sweeps_p:
        mode = _EVALUATE
    elif grid.m is not None:
        mode = _OPTIMIZE_P
    else:
        mode = _OPTIMIZE_PM

    tasks: list[_CellTask] = [(index, point, mode, grid.p_floor, grid.p_ceiling) for index, point in grid.cells()]
    _log.debug('sweep: %d cells in %s mode on %d worker(s)', len(tasks), mode, workers)

    if workers == 1:
        rows = [_evaluate_cell(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_evaluate_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))

    return SweepResult(grid, [SweepCell(data=row) for row in rows])


class SweepResult:
    """
    .. attributetable:: qkd_efficiency.SweepResult

    All cells of a finished sweep.

    Attributes
    ----------
    grid: :class:`SweepGrid`
        The swept grid.
    cells: List[:class:`SweepCell`]
        The cells in row-major order, protocols innermost.
    """

    __slots__: tuple[str, ...] = ('grid', 'cells')

    def __init__(self, grid: SweepGrid, cells: Sequence[SweepCell]) -> None:
        self.grid: SweepGrid = grid
        self.cells: list[SweepCell] = list(cells)

    def __repr__(self) -> str:
        return f'<SweepResult shape={self.grid.shape!r} cells={len(self.cells)}>'

    def __iter__(self) -> Iterator[SweepCell]:
        return iter(self.cells)

    def matrix(self, protocol: Optional[str] = None, field: str = 'pke') -> npt.NDArray[np.float64]:
        """Collects one field of every cell of ``protocol`` into an array shaped like the grid."""
        protocol = protocol or self.grid.protocols[0].id.value
        out = np.full(self.grid.shape, np.nan)
        for cell in self.cells:
            if cell.protocol == protocol:
                out[cell.index] = float(getattr(cell, field))
        return out

    def write_csv(self, stream: IO[str]) -> None:
        """Writes the header and one row per cell."""
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for cell in self.cells:
            writer.writerow(cell.csv_row())

    def to_dict(self) -> dict[str, Any]:
        return {'axes': [str(axis) for axis in self.grid.axes], 'cells': [cell.to_dict() for cell in self.cells]}
