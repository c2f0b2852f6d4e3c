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

import io
import logging
import time
from collections.abc import Sequence
from typing import Any, Callable, Final, Optional, Union

import numpy as np

from .abc import Reconstructable
from .asymptotics import compare_asymptotics
from .enums import ChannelKind, PairModel, SweepParameter, ValidationScale
from .errors import ConfigError, QKDEfficiencyException, ValidationFailure
from .link_model import ChannelParams, LinkPoint, max_coding_order, pke
from .optimizer import SweepAxis, SweepGrid, optimize_p, optimize_pm, sweep
from .protocols import ProtocolSpec, key_fraction_bell, key_fraction_biterr
from .quantum_channels import BellDiagonal, DisturbanceProfile, profile_from_visibility, qber_from_bell
from .simulator import CHUNK_FRAMES, SimConfig, StatisticalCheck, compare_to_analytic, simulate
from .utils import dumps, round_floats, simple_repr

__all__: tuple[str, ...] = ('ValidationCheck', 'ValidationReport', 'run_validation', 'CHECKS')

_log = logging.getLogger(__name__)

VISIBILITY: Final[float] = 0.98
ETA: Final[float] = 1e-3

_Details = dict[str, Any]
_CheckFunc = Callable[['_Context'], tuple[bool, _Details]]


class _Context:
    __slots__ = ('scale', 'rng', 'seed', 'workers')

    def __init__(self, scale: ValidationScale, seed: int, workers: int) -> None:
        self.scale: ValidationScale = scale
        self.rng: np.random.Generator = np.random.default_rng(seed)
        self.seed: int = seed
        self.workers: int = workers

    @property
    def full(self) -> bool:
        return self.scale is ValidationScale.FULL

    def pick(self, quick: Any, full: Any) -> Any:
        return full if self.full else quick


def _template(
    ratio: float,
    *,
    kind: Union[ChannelKind, str] = ChannelKind.DEPHASING,
    protocol: Optional[ProtocolSpec] = None,
    eta: float = ETA,
) -> LinkPoint:
    return LinkPoint(
        m=1,
        p_pair=0.5,
        channel=ChannelParams.symmetric(eta, ratio * eta),
        protocol=protocol or ProtocolSpec.from_id('bbm92-4'),
        decoherence=profile_from_visibility(kind, VISIBILITY, VISIBILITY),
    )


def _channel_equivalence(ctx: _Context) -> tuple[bool, _Details]:
    samples = ctx.pick(200, 1000)
    worst = 0.0
    for kind in ChannelKind:
        for v_a, v_b in ctx.rng.random((samples, 2)):
            numeric = profile_from_visibility(kind, v_a, v_b)
            closed = DisturbanceProfile.from_closed_form(kind, v_a, v_b)
            worst = max(worst, max(abs(a - b) for a, b in zip(numeric.to_dict().values(), closed.to_dict().values())))
    return worst <= 1e-12, {'samples': samples, 'worst_deviation': worst}


def _key_formula_identity(ctx: _Context) -> tuple[bool, _Details]:
    samples = ctx.pick(1000, 10_000)
    worst = 0.0
    for row in ctx.rng.dirichlet(np.ones(4), size=samples):
        weights = BellDiagonal(*row)
        e_X, _, e_Z = qber_from_bell(weights)
        worst = max(worst, abs(key_fraction_bell(weights) - key_fraction_biterr(e_Z, e_X, weights)))
    return worst <= 1e-12, {'samples': samples, 'worst_deviation': worst}


def _asymptotic_agreement(ctx: _Context) -> tuple[bool, _Details]:
    ratios = ctx.pick((1e-6,), (1e-7, 1e-6, 1e-5))
    profile = profile_from_visibility(ChannelKind.DEPHASING, VISIBILITY, VISIBILITY)
    rows: list[dict[str, Any]] = []
    for ratio in ratios:
        comparison = compare_asymptotics(ETA, ratio * ETA, profile)
        pke_deviation = abs(comparison.pke_numeric / comparison.closed.pke_approx - 1.0)
        rows.append(
            {
                'n_ratio': ratio,
                'm_error': comparison.m_error,
                'p_deviation': abs(comparison.p_ratio - 1.0),
                'pke_deviation': pke_deviation,
            }
        )
    passed = all(row['m_error'] <= 1 and row['p_deviation'] <= 0.25 and row['pke_deviation'] <= 0.10 for row in rows)
    return passed, {'points': rows}


def _daylight_bound(ctx: _Context) -> tuple[bool, _Details]:
    noise = 1e-4
    result = optimize_pm(_template(noise / ETA))
    bound = max_coding_order(ETA, noise)
    return result.m_star <= 2 and bound == 2, {'m_star': result.m_star, 'max_coding_order': bound, 'pke_star': result.pke_star}


def _noiseless_divergence(ctx: _Context) -> tuple[bool, _Details]:
    point = _template(0.0)
    p_pairs = [10.0**-k for k in range(1, 7)]
    values = [pke(point.replace(p_pair=p)) for p in p_pairs]
    increasing = all(later > earlier for earlier, later in zip(values, values[1:]))
    return increasing, {'p_pair': p_pairs, 'pke': values}


def _finite_optimum(ctx: _Context) -> tuple[bool, _Details]:
    rows: list[dict[str, Any]] = []
    for ratio in (1e-6, 1e-5, 1e-4):
        template = _template(ratio)
        best = optimize_pm(template)
        point = template.replace(m=best.m_star)
        below = pke(point.replace(p_pair=best.p_pair_star / 3.0))
        above = pke(point.replace(p_pair=min(3.0 * best.p_pair_star, 0.5)))
        rows.append(
            {
                'n_ratio': ratio,
                'm_star': best.m_star,
                'p_pair_star': best.p_pair_star,
                'pke_star': best.pke_star,
                'pke_below': below,
                'pke_above': above,
            }
        )
    passed = all(row['pke_below'] < row['pke_star'] and row['pke_above'] < row['pke_star'] for row in rows)
    return passed, {'points': rows}


def _symmetry(ctx: _Context) -> tuple[bool, _Details]:
    count = ctx.pick(6, 20)
    axes = [
        SweepAxis(SweepParameter.N_RATIO_A, 1e-6, 1e-3, count),
        SweepAxis(SweepParameter.N_RATIO_B, 1e-6, 1e-3, count),
    ]
    matrix = sweep(SweepGrid(axes, _template(1e-6)), workers=ctx.workers).matrix()
    with np.errstate(invalid='ignore'):
        worst = float(np.nanmax(np.abs(matrix - matrix.T)))
    passed = bool(np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-9, equal_nan=True))
    return passed, {'shape': list(matrix.shape), 'worst_asymmetry': worst}


def _protocol_ordering(ctx: _Context) -> tuple[bool, _Details]:
    ratios = np.logspace(-6.0, -4.0, ctx.pick(4, 10))
    bbm92 = ProtocolSpec.from_id('bbm92-4')
    sarg04 = ProtocolSpec.from_id('sarg04-4')
    rows: list[dict[str, Any]] = []
    for kind in ChannelKind:
        for ratio in ratios:
            ours = optimize_pm(_template(float(ratio), kind=kind, protocol=bbm92)).pke_star
            theirs = optimize_pm(_template(float(ratio), kind=kind, protocol=sarg04)).pke_star
            rows.append({'kind': kind.value, 'n_ratio': float(ratio), 'bbm92': ours, 'sarg04': theirs})
    return all(row['bbm92'] >= row['sarg04'] for row in rows), {'points': rows}


def _multiqubit_gain(ctx: _Context) -> tuple[bool, _Details]:
    template = _template(1e-6)
    best = optimize_pm(template)
    single = optimize_p(template, 1)
    gain = best.pke_star / single.pke if single.pke > 0.0 else float('inf')
    return gain >= 5.0, {'m_star': best.m_star, 'pke_star': best.pke_star, 'pke_single': single.pke, 'gain': gain}


def _monte_carlo_agreement(ctx: _Context) -> tuple[bool, _Details]:
    eta, noise, frames = ctx.pick((0.1, 1e-4, 10_000_000), (1e-2, 1e-6, 100_000_000))
    point = _template(noise / eta, eta=eta, protocol=ProtocolSpec.from_id('bbm92-4', symmetric=True)).replace(
        m=2, p_pair=1e-2
    )
    tally = simulate(SimConfig(point, frames=frames, seed=ctx.seed, workers=ctx.workers, blocks=ctx.workers))
    report = compare_to_analytic(tally, point)
    return report.passed, {'frames': frames, 'events': tally.events, 'comparison': report.to_dict()}


def _sarg04_conclusive_ratio(ctx: _Context) -> tuple[bool, _Details]:
    m, frames = ctx.pick((8, 2_000_000), (16, 200_000_000))
    point = _template(0.0, eta=1.0, kind=ChannelKind.DEPOLARIZING, protocol=ProtocolSpec.from_id('sarg04-4')).replace(
        m=m, p_pair=1e-3
    )
    tally = simulate(SimConfig(point, frames=frames, seed=ctx.seed, workers=ctx.workers, blocks=ctx.workers))
    D = float(point.decoherence.D_avg)
    errors = sum(counts['errors'] for counts in tally.errors_per_basis.values())
    conditional = StatisticalCheck.binomial('conditional_error', errors, tally.conclusive, 2.0 * D / (1.0 + 2.0 * D))
    conclusive = StatisticalCheck.binomial('raw_conclusive_fraction', tally.conclusive, tally.qubits, 0.25 + D / 2.0)
    details = {
        'frames': frames,
        'conclusive': tally.conclusive,
        'checks': [conditional.to_dict(), conclusive.to_dict()],
        'raw_conclusive_fraction': tally.sifted_fraction,
        'normalized_conclusive_fraction': tally.normalized_conclusive_fraction,
    }
    return conditional.passed and conclusive.passed, details


def _determinism(ctx: _Context) -> tuple[bool, _Details]:
    axes = [SweepAxis(SweepParameter.N_RATIO_A, 1e-6, 1e-4, 2), SweepAxis(SweepParameter.N_RATIO_B, 1e-6, 1e-4, 2)]
    outputs: list[str] = []
    for _ in range(2):
        stream = io.StringIO()
        sweep(SweepGrid(axes, _template(1e-6)), workers=ctx.workers).write_csv(stream)
        outputs.append(stream.getvalue())

    point = _template(1e-2, eta=0.1).replace(m=2, p_pair=0.05)
    frames = 3 * CHUNK_FRAMES + 17
    tallies = [
        dumps(simulate(SimConfig(point, frames=frames, seed=ctx.seed, pair_model=PairModel.BERNOULLI2, blocks=blocks)).to_dict())
        for blocks in (1, 3, 1)
    ]
    sweep_same = outputs[0] == outputs[1]
    simulate_same = len(set(tallies)) == 1
    return sweep_same and simulate_same, {'sweep_identical': sweep_same, 'simulate_identical': simulate_same}


# The acceptance checks in the order they run.
CHECKS: Final[dict[str, _CheckFunc]] = {
    'channel_equivalence': _channel_equivalence,
    'key_formula_identity': _key_formula_identity,
    'asymptotic_agreement': _asymptotic_agreement,
    'daylight_bound': _daylight_bound,
    'noiseless_divergence': _noiseless_divergence,
    'finite_optimum': _finite_optimum,
    'symmetry': _symmetry,
    'protocol_ordering': _protocol_ordering,
    'multiqubit_gain': _multiqubit_gain,
    'monte_carlo_agreement': _monte_carlo_agreement,
    'sarg04_conclusive_ratio': _sarg04_conclusive_ratio,
    'determinism': _determinism,
}


@simple_repr
class ValidationCheck:
    """
    .. attributetable:: qkd_efficiency.ValidationCheck

    The outcome of one validation check.

    Attributes
    ----------
    name: :class:`str`
        The check, one of the keys of :data:`CHECKS`.
    passed: :class:`bool`
        Whether the check passed.
    elapsed: :class:`float`
        The wall clock time spent, in seconds.
    details: Dict[:class:`str`, Any]
        The measured quantities, or ``error`` when the check raised.
    """

    __slots__: tuple[str, ...] = ('name', 'passed', 'elapsed', 'details')

    def __init__(self, name: str, passed: bool, elapsed: float, details: dict[str, Any]) -> None:
        self.name: str = name
        self.passed: bool = passed
        self.elapsed: float = elapsed
        self.details: dict[str, Any] = details

    def to_dict(self) -> dict[str, Any]:
        return {'name': self.name, 'passed': self.passed, 'elapsed': self.elapsed, 'details': self.details}


class ValidationReport(Reconstructable[dict[str, Any]]):
    """
    .. attributetable:: qkd_efficiency.ValidationReport

    The outcome of :func:`run_validation`.

    Attributes
    ----------
    scale: :class:`ValidationScale`
        The scale the checks ran at.
    passed: :class:`bool`
        Whether every check passed.
    checks: List[:class:`ValidationCheck`]
        The individual checks in run order.
    """

    __slots__: tuple[str, ...] = ('scale', 'passed', 'checks')

    def __init__(self, *, data: dict[str, Any]) -> None:
        super().__init__(data=data)
        self.scale: ValidationScale = ValidationScale(data['scale'])
        self.checks: list[ValidationCheck] = [ValidationCheck(**check) for check in data['checks']]
        self.passed: bool = all(check.passed for check in self.checks)

    def __repr__(self) -> str:
        return f'<ValidationReport scale={self.scale!r} passed={self.passed} failed={self.failed!r}>'

    @property
    def failed(self) -> list[str]:
        """List[:class:`str`]: The names of the failed checks."""
        return [check.name for check in self.checks if not check.passed]

    def raise_for_failure(self) -> None:
        """Raises :class:`ValidationFailure` naming every failed check, if any."""
        if not self.passed:
            raise ValidationFailure(self.failed)


def run_validation(
    scale: Union[ValidationScale, str] = ValidationScale.QUICK,
    *,
    seed: int = 0,
    workers: int = 1,
    only: Optional[Sequence[str]] = None,
) -> ValidationReport:
    """Runs the acceptance checks and collects their outcome.

    A check that raises one of the library's exceptions is recorded as failed with the
    error message in its details; the remaining checks still run.

    Parameters
    ----------
    scale: Union[:class:`ValidationScale`, :class:`str`]
        ``'quick'`` for reduced sizes, ``'full'`` for the sizes of the acceptance criteria.
    seed: :class:`int`
        The seed of the random samples and simulations.
    workers: :class:`int`
        The number of worker processes sweeps and simulations may use.
    only: Optional[Sequence[:class:`str`]]
        Restricts the run to these checks.

    Raises
    ------
    ConfigError
        ``scale`` or a name in ``only`` is unknown.
    """
    try:
        scale = ValidationScale(scale)
    except ValueError:
        raise ConfigError(f'expected one of {", ".join(ValidationScale.values())}', field='scale') from None

    names = list(only) if only is not None else list(CHECKS)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise ConfigError(f'unknown check {unknown[0]!r}', field='only')

    ctx = _Context(scale, seed, workers)
    checks: list[dict[str, Any]] = []
    for name in names:
        start = time.perf_counter()
        try:
            passed, details = CHECKS[name](ctx)
        except QKDEfficiencyException as exc:
            _log.warning('validation check %s raised: %s', name, exc)
            passed, details = False, {'error': str(exc)}
        elapsed = time.perf_counter() - start
        _log.info('validation check %s %s in %.2fs', name, 'passed' if passed else 'FAILED', elapsed)
        checks.append(ValidationCheck(name, bool(passed), elapsed, round_floats(details)).to_dict())

    return ValidationReport(data={'scale': scale.value, 'checks': checks})
