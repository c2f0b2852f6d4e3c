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

import functools
import logging
import math
import operator
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Final, Optional, Union

import numpy as np
import numpy.typing as npt

from .abc import Reconstructable
from .enums import MeasBasis, PairModel, ProtocolId
from .errors import ConfigError, DegenerateDenominatorError
from .link_model import LinkPoint, event_rate, qber
from .quantum_channels import DisturbanceProfile, bell_projections, measurement_joint
from .utils import simple_repr

__all__: tuple[str, ...] = (
    'SimConfig',
    'FrameTally',
    'StatisticalCheck',
    'ComparisonReport',
    'simulate',
    'compare_to_analytic',
    'CHUNK_FRAMES',
    'CATEGORIES',
)

_log = logging.getLogger(__name__)

# Frames drawn from one counter-based stream. Streams are keyed by (seed, chunk index),
# so the way chunks are grouped into blocks never changes the result.
CHUNK_FRAMES: Final[int] = 1 << 16

CATEGORIES: Final[tuple[str, ...]] = ('signal_signal', 'signal_background', 'background_background', 'multi_pair')

SYSTEMATIC_ALLOWANCE: Final[float] = 0.05

_SEED_LIMIT: Final[int] = 1 << 64
_Y: Final[int] = MeasBasis.Y.position


@simple_repr
class SimConfig:
    """
    .. attributetable:: qkd_efficiency.SimConfig

    The inputs of one Monte Carlo run.

    Attributes
    ----------
    point: :class:`LinkPoint`
        The operating point to simulate.
    frames: :class:`int`
        The number of frames.
    seed: :class:`int`
        The 64 bit seed all random streams derive from.
    pair_model: :class:`PairModel`
        The pair number statistics of the source.
    blocks: :class:`int`
        The number of blocks the frames are split into. Does not affect the result.
    workers: :class:`int`
        The number of worker processes the blocks run on.
    """

    __slots__: tuple[str, ...] = ('point', 'frames', 'seed', 'pair_model', 'blocks', 'workers')

    def __init__(
        self,
        point: LinkPoint,
        *,
        frames: int,
        seed: int = 0,
        pair_model: Union[PairModel, str] = PairModel.POISSON,
        blocks: int = 1,
        workers: int = 1,
    ) -> None:
        if point.protocol.id is ProtocolId.SARG04_6:
            raise ConfigError('six-state SARG04 sifting cannot be simulated', field='protocol')
        if isinstance(frames, bool) or int(frames) != frames or frames < 1:
            raise ConfigError(f'expected a positive frame count, got {frames!r}', field='frames')
        if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed < _SEED_LIMIT:
            raise ConfigError(f'expected an unsigned 64 bit seed, got {seed!r}', field='seed')
        if int(blocks) != blocks or blocks < 1:
            raise ConfigError(f'expected a positive block count, got {blocks!r}', field='blocks')
        if int(workers) != workers or workers < 1:
            raise ConfigError(f'expected a positive worker count, got {workers!r}', field='workers')
        try:
            model = PairModel(pair_model)
        except ValueError:
            raise ConfigError(f'expected one of {", ".join(PairModel.values())}', field='pair_model') from None

        self.point: LinkPoint = point
        self.frames: int = int(frames)
        self.seed: int = int(seed)
        self.pair_model: PairModel = model
        self.blocks: int = int(blocks)
        self.workers: int = int(workers)

    @property
    def chunks(self) -> int:
        """:class:`int`: The number of random streams the frames are drawn from."""
        return -(-self.frames // CHUNK_FRAMES)

    def partition(self) -> list[tuple[int, ...]]:
        """Splits the chunk indices into at most :attr:`blocks` contiguous groups."""
        count = min(self.blocks, self.chunks)
        return [tuple(int(c) for c in group) for group in np.array_split(np.arange(self.chunks), count)]

    def to_dict(self) -> dict[str, Any]:
        return {
            'point': self.point.to_dict(),
            'frames': self.frames,
            'seed': self.seed,
            'pair_model': self.pair_model.value,
            'blocks': self.blocks,
            'workers': self.workers,
        }


def _empty_tally_data(protocol: ProtocolId, m: int, pair_model: PairModel) -> dict[str, Any]:
    bases = ('X', 'Y', 'Z') if protocol.is_six_state else ('X', 'Z')
    return {
        'protocol': protocol.value,
        'm': m,
        'pair_model': pair_model.value,
        'frames_total': 0,
        'events': 0,
        'errors_per_basis': {basis: {'sifted': 0, 'errors': 0} for basis in bases},
        'conclusive': 0,
        'inconclusive': 0,
        'multi_click_discards': 0,
        'categories': {name: 0 for name in CATEGORIES},
        'errors_per_category': {name: 0 for name in CATEGORIES},
    }


class FrameTally(Reconstructable[dict[str, Any]]):
    """
    .. attributetable:: qkd_efficiency.FrameTally

    The integer counters of a Monte Carlo run. Tallies of the same protocol, coding order
    and pair model can be merged with ``+``.

    Attributes
    ----------
    protocol: :class:`ProtocolId`
        The simulated protocol.
    m: :class:`int`
        The simulated coding order.
    pair_model: :class:`PairModel`
        The pair number statistics used.
    frames_total: :class:`int`
        The number of simulated frames.
    events: :class:`int`
        The frames with a detection on both sides.
    errors_per_basis: Dict[:class:`str`, Dict[:class:`str`, :class:`int`]]
        For each basis, keyed by Alice's basis label, the ``sifted`` and ``errors`` counts.
    conclusive: :class:`int`
        The qubits kept by sifting.
    inconclusive: :class:`int`
        The qubits discarded by sifting.
    multi_click_discards: :class:`int`
        Counts dropped because another count on the same side was selected.
    categories: Dict[:class:`str`, :class:`int`]
        The events by origin, keyed by the names in :data:`CATEGORIES`.
    errors_per_category: Dict[:class:`str`, :class:`int`]
        The sifted errors by the origin of their event, keyed like :attr:`categories`.
    """

    __slots__: tuple[str, ...] = (
        'protocol',
        'm',
        'pair_model',
        'frames_total',
        'events',
        'errors_per_basis',
        'conclusive',
        'inconclusive',
        'multi_click_discards',
        'categories',
        'errors_per_category',
    )

    def __init__(self, *, data: dict[str, Any]) -> None:
        super().__init__(data=data)
        self.protocol: ProtocolId = ProtocolId(data['protocol'])
        self.m: int = data['m']
        self.pair_model: PairModel = PairModel(data['pair_model'])
        self.frames_total: int = data['frames_total']
        self.events: int = data['events']
        self.errors_per_basis: dict[str, dict[str, int]] = {
            basis: dict(counts) for basis, counts in data['errors_per_basis'].items()
        }
        self.conclusive: int = data['conclusive']
        self.inconclusive: int = data['inconclusive']
        self.multi_click_discards: int = data['multi_click_discards']
        self.categories: dict[str, int] = dict(data['categories'])
        self.errors_per_category: dict[str, int] = dict(data['errors_per_category'])

    def __repr__(self) -> str:
        return (
            f'<FrameTally protocol={self.protocol!r} m={self.m} frames_total={self.frames_total} '
            f'events={self.events} conclusive={self.conclusive}>'
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameTally):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None  # type: ignore

    def __add__(self, other: FrameTally) -> FrameTally:
        if not isinstance(other, FrameTally):
            return NotImplemented
        if (self.protocol, self.m, self.pair_model) != (other.protocol, other.m, other.pair_model):
            raise ConfigError('cannot merge tallies of different runs')

        data = _empty_tally_data(self.protocol, self.m, self.pair_model)
        for tally in (self, other):
            for key in ('frames_total', 'events', 'conclusive', 'inconclusive', 'multi_click_discards'):
                data[key] += getattr(tally, key)
            for basis, counts in tally.errors_per_basis.items():
                data['errors_per_basis'][basis]['sifted'] += counts['sifted']
                data['errors_per_basis'][basis]['errors'] += counts['errors']
            for name, count in tally.categories.items():
                data['categories'][name] += count
            for name, count in tally.errors_per_category.items():
                data['errors_per_category'][name] += count
        return FrameTally(data=data)

    @classmethod
    def empty(cls, protocol: Union[ProtocolId, str], m: int, pair_model: Union[PairModel, str]) -> FrameTally:
        """Creates a tally with every counter at zero."""
        return cls(data=_empty_tally_data(ProtocolId(protocol), m, PairModel(pair_model)))

    @property
    def qubits(self) -> int:
        """:class:`int`: The number of measured qubit pairs, ``events * m``."""
        return self.events * self.m

    @property
    def sifted_fraction(self) -> float:
        """:class:`float`: The fraction of measured qubits kept by sifting, ``0`` without events."""
        return self.conclusive / self.qubits if self.qubits else 0.0

    @property
    def normalized_conclusive_fraction(self) -> float:
        """:class:`float`: Twice :attr:`sifted_fraction`, the SARG04 conclusive fraction on the ``E = D + 1/2`` scale."""
        return 2.0 * self.sifted_fraction

    def qber(self, basis: Union[MeasBasis, str]) -> float:
        """Returns the observed error rate among the sifted qubits of Alice's ``basis``.

        Raises
        ------
        DegenerateDenominatorError
            No qubit of that basis survived sifting.
        """
        counts = self.errors_per_basis.get(MeasBasis(basis).value)
        if not counts or counts['sifted'] == 0:
            raise DegenerateDenominatorError(f'no sifted qubits in basis {MeasBasis(basis).value}')
        return counts['errors'] / counts['sifted']


@functools.lru_cache(maxsize=32)
def _joint_tables(profile: DisturbanceProfile) -> npt.NDArray[np.float64]:
    # Cumulative joint outcome distributions of the decohered pair for every basis pair.
    rho = bell_projections(profile.D_X, profile.D_Y, profile.D_Z).density_matrix()
    tables = np.empty((3, 3, 4), dtype=np.float64)
    for basis_a in MeasBasis:
        for basis_b in MeasBasis:
            tables[basis_a.position, basis_b.position] = np.cumsum(measurement_joint(rho, basis_a, basis_b))
    tables[..., 3] = 1.0
    tables.setflags(write=False)
    return tables


def _chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _simulate_chunk(config: SimConfig, chunk: int, tables: npt.NDArray[np.float64], data: dict[str, Any]) -> None:
    point = config.point
    channel = point.channel
    protocol = point.protocol
    m, p = point.m, point.p_pair
    size = min(CHUNK_FRAMES, config.frames - chunk * CHUNK_FRAMES)
    rng = _chunk_generator(config.seed, chunk)

    if config.pair_model is PairModel.POISSON:
        pairs = rng.poisson(p, size)
    else:
        u = rng.random(size)
        pairs = (u < p + 0.5 * p * p).astype(np.int64) + (u < 0.5 * p * p)

    signal_a = rng.binomial(pairs, channel.eta_a)
    signal_b = rng.binomial(pairs, channel.eta_b)
    clicks_a = signal_a + rng.binomial(point.M, channel.n_a, size)
    clicks_b = signal_b + rng.binomial(point.M, channel.n_b, size)

    hit = np.flatnonzero((clicks_a > 0) & (clicks_b > 0))
    n_events = int(hit.size)
    data['frames_total'] += size
    data['events'] += n_events
    if n_events == 0:
        return

    pairs, signal_a, signal_b = pairs[hit], signal_a[hit], signal_b[hit]
    clicks_a, clicks_b = clicks_a[hit], clicks_b[hit]
    data['multi_click_discards'] += int((clicks_a - 1).sum() + (clicks_b - 1).sum())

    # Each side keeps one of its counts uniformly; the two picks share a pair with probability 1/k.
    picks = rng.random((n_events, 3))
    from_pair_a = picks[:, 0] * clicks_a < signal_a
    from_pair_b = picks[:, 1] * clicks_b < signal_b
    both = from_pair_a & from_pair_b
    correlated = both & (picks[:, 2] * pairs < 1.0)

    origins = {
        'signal_signal': both & (pairs == 1),
        'signal_background': from_pair_a ^ from_pair_b,
        'background_background': ~(from_pair_a | from_pair_b),
        'multi_pair': both & (pairs > 1),
    }
    for name, mask in origins.items():
        data['categories'][name] += int(np.count_nonzero(mask))

    positions = np.array([basis.position for basis in protocol.bases])
    weights = protocol.basis_probabilities()
    basis_a = positions[rng.choice(positions.size, size=(n_events, m), p=weights)]
    basis_b = positions[rng.choice(positions.size, size=(n_events, m), p=weights)]

    draws = rng.random((n_events, m))
    outcome = (draws[..., None] >= tables[basis_a, basis_b][..., :3]).sum(axis=-1)
    coins = rng.integers(0, 2, size=(2, n_events, m))
    bit_a = np.where(correlated[:, None], outcome >> 1, coins[0])
    bit_b = np.where(correlated[:, None], outcome & 1, coins[1])
    # Bob's Y outcomes are relabelled so Phi+ reads as agreement in every basis.
    bit_b = bit_b ^ (basis_b == _Y)

    if protocol.id.is_sarg04:
        # Alice pairs her state with a random state of the other basis and announces the set.
        partner_basis = 2 - basis_a
        partner_bit = rng.integers(0, 2, size=(n_events, m))
        mistaken = (basis_b == basis_a) & (bit_b != bit_a)
        kept = mistaken | ((basis_b == partner_basis) & (bit_b != partner_bit))
    else:
        kept = basis_a == basis_b
        mistaken = kept & (bit_a != bit_b)

    n_kept = int(np.count_nonzero(kept))
    data['conclusive'] += n_kept
    data['inconclusive'] += n_events * m - n_kept
    for basis in protocol.bases:
        in_basis = kept & (basis_a == basis.position)
        counts = data['errors_per_basis'][basis.value]
        counts['sifted'] += int(np.count_nonzero(in_basis))
        counts['errors'] += int(np.count_nonzero(in_basis & mistaken))

    errors = np.count_nonzero(kept & mistaken, axis=1)
    for name, mask in origins.items():
        data['errors_per_category'][name] += int(errors[mask].sum())


def _run_block(task: tuple[SimConfig, tuple[int, ...]]) -> FrameTally:
    config, chunks = task
    point = config.point
    data = _empty_tally_data(point.protocol.id, point.m, config.pair_model)
    tables = _joint_tables(point.decoherence)
    for chunk in chunks:
        _simulate_chunk(config, chunk, tables, data)

    _log.debug('simulator block of chunks %d..%d done: %d events', chunks[0], chunks[-1], data['events'])
    return FrameTally(data=data)


def simulate(config: SimConfig) -> FrameTally:
    """Runs the frame-level Monte Carlo simulation of the link.

    Every frame draws its pair number, the survival of each photon and the background
    counts of all ``2**m`` slots on both sides. Each side keeps one of its counts at
    random. When both kept counts are halves of the same pair, the ``m`` qubits are
    measured on the decohered pair, otherwise Bob's outcomes are independent of Alice's.
    The qubits are then sifted by the protocol's rules.

    The result is fully determined by ``config.seed``, ``config.frames`` and the operating
    point. Neither :attr:`SimConfig.blocks` nor :attr:`SimConfig.workers` changes it.

    Parameters
    ----------
    config: :class:`SimConfig`
        The run configuration.

    Returns
    -------
    :class:`FrameTally`
        The merged tally of all blocks.
    """
    tasks = [(config, chunks) for chunks in config.partition()]
    _log.debug('simulating %d frames in %d chunk(s) over %d block(s)', config.frames, config.chunks, len(tasks))

    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, len(tasks))) as executor:
            tallies = list(executor.map(_run_block, tasks))
    else:
        tallies = [_run_block(task) for task in tasks]

    return functools.reduce(operator.add, tallies)


@simple_repr
class StatisticalCheck:
    """
    .. attributetable:: qkd_efficiency.StatisticalCheck

    One observed proportion tested against its model prediction.

    The check passes when ``|observed - predicted| <= sigmas * sigma + allowance * predicted``
    where ``sigma`` is the binomial standard error of the prediction.

    Attributes
    ----------
    name: :class:`str`
        What was compared, e.g. ``'event_fraction'`` or ``'qber_X'``.
    successes: :class:`int`
        The observed count.
    trials: :class:`int`
        The number of trials the count was taken from.
    observed: :class:`float`
        ``successes / trials``.
    predicted: :class:`float`
        The model prediction.
    sigma: :class:`float`
        The binomial standard error of the prediction.
    z: Optional[:class:`float`]
        The z-score, ``None`` when ``sigma`` vanishes.
    passed: :class:`bool`
        Whether the observation is compatible with the prediction.
    """

    __slots__: tuple[str, ...] = ('name', 'successes', 'trials', 'observed', 'predicted', 'sigma', 'z', 'passed')

    def __init__(
        self,
        name: str,
        successes: int,
        trials: int,
        observed: float,
        predicted: float,
        sigma: float,
        z: Optional[float],
        passed: bool,
    ) -> None:
        self.name: str = name
        self.successes: int = successes
        self.trials: int = trials
        self.observed: float = observed
        self.predicted: float = predicted
        self.sigma: float = sigma
        self.z: Optional[float] = z
        self.passed: bool = passed

    @classmethod
    def binomial(
        cls,
        name: str,
        successes: int,
        trials: int,
        predicted: float,
        *,
        sigmas: float = 3.0,
        allowance: float = SYSTEMATIC_ALLOWANCE,
    ) -> StatisticalCheck:
        """Tests ``successes`` out of ``trials`` against the success probability ``predicted``."""
        predicted = min(max(predicted, 0.0), 1.0)
        observed = successes / trials
        sigma = math.sqrt(predicted * (1.0 - predicted) / trials)
        deviation = observed - predicted
        z = deviation / sigma if sigma > 0.0 else None
        passed = abs(deviation) <= sigmas * sigma + allowance * predicted
        return cls(name, successes, trials, observed, predicted, sigma, z, passed)

    def to_dict(self) -> dict[str, Any]:
        return {attr: getattr(self, attr) for attr in self.__slots__}


class ComparisonReport(Reconstructable[dict[str, Any]]):
    """
    .. attributetable:: qkd_efficiency.ComparisonReport

    The outcome of :func:`compare_to_analytic`.

    Attributes
    ----------
    passed: :class:`bool`
        Whether every check passed.
    checks: List[:class:`StatisticalCheck`]
        The individual checks.
    sifted_fraction: :class:`float`
        The raw fraction of measured qubits kept by sifting.
    normalized_conclusive_fraction: :class:`float`
        Twice the sifted fraction. Only meaningful for SARG04.
    category_shares: Dict[:class:`str`, :class:`float`]
        The share of each event category among all events.
    """

    __slots__: tuple[str, ...] = ('passed', 'checks', 'sifted_fraction', 'normalized_conclusive_fraction', 'category_shares')

    def __init__(self, *, data: dict[str, Any]) -> None:
        super().__init__(data=data)
        self.checks: list[StatisticalCheck] = [StatisticalCheck(**check) for check in data['checks']]
        self.passed: bool = data['passed']
        self.sifted_fraction: float = data['sifted_fraction']
        self.normalized_conclusive_fraction: float = data['normalized_conclusive_fraction']
        self.category_shares: dict[str, float] = dict(data['category_shares'])

    def __repr__(self) -> str:
        return f'<ComparisonReport passed={self.passed} failed={self.failed!r}>'

    @property
    def failed(self) -> list[str]:
        """List[:class:`str`]: The names of the checks that did not pass."""
        return [check.name for check in self.checks if not check.passed]


def compare_to_analytic(
    tally: FrameTally,
    point: LinkPoint,
    *,
    sigmas: float = 3.0,
    allowance: float = SYSTEMATIC_ALLOWANCE,
) -> ComparisonReport:
    """Tests a simulated tally against the rate model at ``point``.

    The event fraction is compared with ``p_pair eta_A eta_B R_event(E=1)``, the share of
    signal-background events with its part of that rate, and the error rate among the sifted
    qubits of each basis with :func:`qber`. For SARG04 the twice-normalized conclusive
    fraction is compared with ``R_event(E) / R_event(1)``.

    Parameters
    ----------
    tally: :class:`FrameTally`
        The simulated counts.
    point: :class:`LinkPoint`
        The operating point to compare against. Its channel may differ from the simulated one,
        which is how a negative control is built.
    sigmas: :class:`float`
        The number of standard errors a check tolerates.
    allowance: :class:`float`
        The relative systematic residual a check tolerates on top of that.

    Raises
    ------
    DegenerateDenominatorError
        The tally holds no frames.
    ConfigError
        The tally was simulated with another protocol or coding order.
    """
    if tally.frames_total == 0:
        raise DegenerateDenominatorError('cannot compare a tally without frames')
    if tally.protocol is not point.protocol.id:
        raise ConfigError(f'tally is for {tally.protocol.value}, not {point.protocol.id.value}', field='protocol')
    if tally.m != point.m:
        raise ConfigError(f'tally is for m={tally.m}, not m={point.m}', field='m')

    channel = point.channel
    raw_events = event_rate(point, 1.0)
    check = functools.partial(StatisticalCheck.binomial, sigmas=sigmas, allowance=allowance)
    checks: list[StatisticalCheck] = [
        check(
            'event_fraction',
            tally.events,
            tally.frames_total,
            point.p_pair * channel.eta_a * channel.eta_b * raw_events.total,
        )
    ]

    if tally.events:
        checks.append(
            check(
                'signal_background_share',
                tally.categories['signal_background'],
                tally.events,
                raw_events.signal_background / raw_events.total,
            )
        )
        if point.protocol.id.is_sarg04:
            ratio = event_rate(point, point.conclusive).total / raw_events.total
            checks.append(check('conclusive_fraction', tally.conclusive, tally.qubits, 0.5 * ratio))

    for basis, counts in sorted(tally.errors_per_basis.items()):
        if counts['sifted']:
            checks.append(check(f'qber_{basis}', counts['errors'], counts['sifted'], float(qber(point, basis))))

    failed = [c.name for c in checks if not c.passed]
    if failed:
        _log.debug('comparison against the rate model failed: %s', ', '.join(failed))

    events = tally.events
    data: dict[str, Any] = {
        'passed': not failed,
        'checks': [c.to_dict() for c in checks],
        'sifted_fraction': tally.sifted_fraction,
        'normalized_conclusive_fraction': tally.normalized_conclusive_fraction,
        'category_shares': {name: (count / events if events else 0.0) for name, count in tally.categories.items()},
    }
    return ComparisonReport(data=data)
