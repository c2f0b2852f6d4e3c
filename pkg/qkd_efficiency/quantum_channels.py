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
from collections.abc import Iterator, Sequence
from typing import Final, Union

import numpy as np
import numpy.typing as npt
from typing_extensions import Self, TypeAlias

from .enums import ChannelKind, MeasBasis
from .errors import DegenerateDenominatorError, DomainError, InfeasibleQberError, InvalidStateError
from .numerics import PROBABILITY_TOLERANCE, Probability
from .utils import simple_repr

__all__: tuple[str, ...] = (
    'ComplexMatrix',
    'PAULI_I',
    'PAULI_X',
    'PAULI_Y',
    'PAULI_Z',
    'receiver_states',
    'basis_states',
    'bell_state',
    'validate_density_matrix',
    'KrausSet',
    'make_kraus',
    'kraus_from_visibility',
    'apply_two_sided',
    'partial_trace_b',
    'disturbance',
    'DisturbanceProfile',
    'disturbance_profile',
    'profile_from_visibility',
    'BellDiagonal',
    'bell_projections',
    'qber_from_bell',
    'bell_diagonal_of',
    'measurement_joint',
)

_log = logging.getLogger(__name__)

ComplexMatrix: TypeAlias = npt.NDArray[np.complex128]

STATE_TOLERANCE: Final[float] = 1e-12
POSITIVITY_TOLERANCE: Final[float] = 1e-10
DENOMINATOR_FLOOR: Final[float] = 1e-15


def _frozen(matrix: npt.ArrayLike) -> ComplexMatrix:
    out = np.array(matrix, dtype=np.complex128)
    out.setflags(write=False)
    return out


PAULI_I: Final[ComplexMatrix] = _frozen([[1, 0], [0, 1]])
PAULI_X: Final[ComplexMatrix] = _frozen([[0, 1], [1, 0]])
PAULI_Y: Final[ComplexMatrix] = _frozen([[0, -1j], [1j, 0]])
PAULI_Z: Final[ComplexMatrix] = _frozen([[1, 0], [0, -1]])

# Receiver settings (theta, phase) for each basis.
_RECEIVER_SETTINGS: Final[dict[str, tuple[float, float]]] = {
    'X': (math.pi / 4, 0.0),
    'Y': (math.pi / 4, math.pi / 2),
    'Z': (math.pi / 2, 0.0),
}

_BELL_AMPLITUDES: Final[dict[str, tuple[float, float, float, float]]] = {
    'phi+': (1.0, 0.0, 0.0, 1.0),
    'phi-': (1.0, 0.0, 0.0, -1.0),
    'psi+': (0.0, 1.0, 1.0, 0.0),
    'psi-': (0.0, 1.0, -1.0, 0.0),
}


def receiver_states(theta: float, phase: float) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Returns the orthonormal pair a polarization analyser set to ``(theta, phase)`` projects onto.

    ``|+> = sin(theta)|0> + e^{i phase} cos(theta)|1>`` and
    ``|-> = cos(theta)|0> - e^{i phase} sin(theta)|1>``. Components below ``1e-15``
    in magnitude are snapped to zero and amplitudes equal up to rounding are made equal.
    """
    s, c = math.sin(theta), math.cos(theta)
    s = 0.0 if abs(s) < 1e-15 else s
    c = 0.0 if abs(c) < 1e-15 else c
    if s != c and abs(s - c) < 1e-15:
        s = c = math.sqrt(0.5)
    e = complex(math.cos(phase), math.sin(phase))
    e = complex(0.0 if abs(e.real) < 1e-15 else e.real, 0.0 if abs(e.imag) < 1e-15 else e.imag)
    return _frozen([s, e * c]), _frozen([c, -e * s])


@functools.lru_cache(maxsize=None)
def basis_states(basis: MeasBasis) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Returns ``(phi, phi_perp)`` for a basis, the states of outcome ``0`` and ``1``.

    Outcome ``0`` is ``|+>`` for X, ``|+i>`` for Y and ``|0>`` for Z.
    """
    theta, phase = _RECEIVER_SETTINGS[MeasBasis(basis).value]
    return receiver_states(theta, phase)


@functools.lru_cache(maxsize=None)
def bell_state(name: str) -> ComplexMatrix:
    """Returns a Bell state vector over ``|ab>``, with Alice's qubit as the first factor.

    Parameters
    ----------
    name: :class:`str`
        One of ``'phi+'``, ``'phi-'``, ``'psi+'`` or ``'psi-'``.
    """
    try:
        amplitudes = _BELL_AMPLITUDES[name]
    except KeyError:
        raise DomainError('name', name, f'expected one of {", ".join(_BELL_AMPLITUDES)}') from None
    return _frozen(np.array(amplitudes) / math.sqrt(2.0))


def _projector(vector: ComplexMatrix) -> ComplexMatrix:
    return np.outer(vector, vector.conj())


def validate_density_matrix(rho: npt.ArrayLike) -> ComplexMatrix:
    """Checks that ``rho`` is a two-qubit density matrix.

    Hermiticity and unit trace are checked within ``1e-12``. Positivity is checked on all
    ``1x1`` and ``2x2`` principal minors, within ``1e-10``.

    Returns
    -------
    :class:`numpy.ndarray`
        The matrix as a complex array.

    Raises
    ------
    InvalidStateError
        Any of the checks fails.
    """
    matrix = np.asarray(rho, dtype=np.complex128)
    if matrix.shape != (4, 4):
        raise InvalidStateError(f'expected a 4x4 matrix, got shape {matrix.shape}')
    if not np.all(np.isfinite(matrix)):
        raise InvalidStateError('density matrix has non-finite entries')
    if np.max(np.abs(matrix - matrix.conj().T)) > STATE_TOLERANCE:
        raise InvalidStateError('density matrix is not Hermitian')
    trace = np.trace(matrix)
    if abs(trace - 1.0) > STATE_TOLERANCE:
        raise InvalidStateError(f'density matrix has trace {trace!r}')

    diagonal = matrix.diagonal().real
    if np.any(diagonal < -POSITIVITY_TOLERANCE):
        raise InvalidStateError('density matrix has a negative diagonal entry')
    for i in range(4):
        for j in range(i + 1, 4):
            minor = diagonal[i] * diagonal[j] - abs(matrix[i, j]) ** 2
            if minor < -POSITIVITY_TOLERANCE:
                raise InvalidStateError(f'density matrix has a negative principal minor at ({i}, {j})')

    return matrix


@simple_repr
class KrausSet:
    """
    .. attributetable:: qkd_efficiency.KrausSet

    A completely positive trace preserving single-qubit channel in Kraus form.

    Attributes
    ----------
    kind: :class:`ChannelKind`
        The decoherence kind.
    parameter: :class:`float`
        The visibility ``V`` for dephasing, the depolarization ``lambda`` otherwise.
    operators: Tuple[:class:`numpy.ndarray`, ...]
        The Kraus operators, read-only ``2x2`` complex arrays.
    """

    __slots__: tuple[str, ...] = ('kind', 'parameter', 'operators')

    def __init__(self, kind: ChannelKind, parameter: float, operators: Sequence[npt.ArrayLike]) -> None:
        ops = tuple(_frozen(op) for op in operators)
        if not ops or any(op.shape != (2, 2) for op in ops):
            raise InvalidStateError('Kraus operators must be a non-empty set of 2x2 matrices')

        completeness = sum((op.conj().T @ op for op in ops), np.zeros((2, 2), dtype=np.complex128))
        if np.max(np.abs(completeness - PAULI_I)) > STATE_TOLERANCE:
            raise InvalidStateError('Kraus operators do not sum to the identity')

        self.kind: ChannelKind = kind
        self.parameter: float = parameter
        self.operators: tuple[ComplexMatrix, ...] = ops

    def __iter__(self) -> Iterator[ComplexMatrix]:
        return iter(self.operators)

    def __len__(self) -> int:
        return len(self.operators)

    @property
    def visibility(self) -> float:
        """:class:`float`: The factor the channel shrinks transverse Bloch components by."""
        if self.kind is ChannelKind.DEPHASING:
            return self.parameter
        return 1.0 - self.parameter


def make_kraus(kind: Union[ChannelKind, str], parameter: float) -> KrausSet:
    """Builds the Kraus set of a single-qubit channel.

    Parameters
    ----------
    kind: :class:`ChannelKind`
        The decoherence kind.
    parameter: :class:`float`
        For dephasing the visibility ``V``, giving ``{sqrt((1+V)/2) I, sqrt((1-V)/2) Z}``.
        For depolarizing ``lambda``, giving ``{sqrt(1-3 lambda/4) I, sqrt(lambda/4) X, Y, Z}``;
        the Pauli terms are omitted when ``lambda`` is zero.

    Raises
    ------
    DomainError
        The parameter lies outside ``[0, 1]``.
    """
    kind = ChannelKind(kind)
    if kind is ChannelKind.DEPHASING:
        v = Probability(parameter, 'V')
        return KrausSet(kind, v, [math.sqrt((1.0 + v) / 2.0) * PAULI_I, math.sqrt((1.0 - v) / 2.0) * PAULI_Z])

    lam = Probability(parameter, 'lambda')
    operators = [math.sqrt(1.0 - 3.0 * lam / 4.0) * PAULI_I]
    if lam > 0.0:
        weight = math.sqrt(lam / 4.0)
        operators.extend(weight * pauli for pauli in (PAULI_X, PAULI_Y, PAULI_Z))
    return KrausSet(kind, lam, operators)


def kraus_from_visibility(kind: Union[ChannelKind, str], visibility: float) -> KrausSet:
    """Builds a channel from its visibility, with ``lambda = 1 - V`` for depolarization."""
    kind = ChannelKind(kind)
    v = Probability(visibility, 'V')
    return make_kraus(kind, v if kind is ChannelKind.DEPHASING else 1.0 - v)


def apply_two_sided(rho: npt.ArrayLike, channel_a: KrausSet, channel_b: KrausSet) -> ComplexMatrix:
    """Applies ``channel_a`` to Alice's qubit and ``channel_b`` to Bob's.

    Computes ``sum_ij (A_i x B_j) rho (A_i x B_j)^dagger``.

    Raises
    ------
    InvalidStateError
        ``rho`` is not a density matrix.
    """
    matrix = validate_density_matrix(rho)
    out = np.zeros((4, 4), dtype=np.complex128)
    for a in channel_a:
        for b in channel_b:
            k = np.kron(a, b)
            out += k @ matrix @ k.conj().T

    # Restore exact Hermiticity lost to rounding.
    out = (out + out.conj().T) / 2.0
    out.setflags(write=False)
    return out


def partial_trace_b(rho: npt.ArrayLike) -> ComplexMatrix:
    """Traces out Bob's qubit of a two-qubit operator."""
    return np.einsum('ijkj->ik', np.asarray(rho, dtype=np.complex128).reshape(2, 2, 2, 2))


def disturbance(rho_out: npt.ArrayLike, basis: Union[MeasBasis, str]) -> Probability:
    """Computes the disturbance ``D_phi`` of a shared state in one basis.

    This is the probability that Bob's result disagrees with Alice's given that Alice
    obtained outcome ``0``. In the Y basis Bob's projector is the complex conjugate of
    ``phi_perp``, so that a maximally entangled ``Phi+`` is error free in every basis.

    Raises
    ------
    DegenerateDenominatorError
        Alice never obtains outcome ``0`` in this state.
    """
    matrix = np.asarray(rho_out, dtype=np.complex128)
    phi, phi_perp = MeasBasis(basis).states
    joint = np.kron(phi, phi_perp.conj())
    numerator = float(np.real(joint.conj() @ matrix @ joint))
    denominator = float(np.real(phi.conj() @ partial_trace_b(matrix) @ phi))
    if denominator <= DENOMINATOR_FLOOR:
        raise DegenerateDenominatorError(f'Alice never obtains outcome 0 in basis {basis}')
    return Probability(numerator / denominator, 'disturbance')


@simple_repr
class DisturbanceProfile:
    """
    .. attributetable:: qkd_efficiency.DisturbanceProfile

    The disturbances of a decohered pair in the three bases.

    Attributes
    ----------
    D_X: :class:`float`
        The disturbance in the X basis.
    D_Y: :class:`float`
        The disturbance in the Y basis.
    D_Z: :class:`float`
        The disturbance in the Z basis.
    """

    __slots__: tuple[str, ...] = ('D_X', 'D_Y', 'D_Z')

    def __init__(self, D_X: float, D_Y: float, D_Z: float) -> None:
        self.D_X: Probability = Probability(D_X, 'D_X')
        self.D_Y: Probability = Probability(D_Y, 'D_Y')
        self.D_Z: Probability = Probability(D_Z, 'D_Z')

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DisturbanceProfile):
            return NotImplemented
        return (self.D_X, self.D_Y, self.D_Z) == (other.D_X, other.D_Y, other.D_Z)

    def __hash__(self) -> int:
        return hash((self.D_X, self.D_Y, self.D_Z))

    @classmethod
    def from_closed_form(cls, kind: Union[ChannelKind, str], v_a: float, v_b: float) -> Self:
        """Builds the profile of ``Phi+`` through two channels of the same kind without any matrix algebra.

        Dephasing leaves Z untouched and gives ``(1 - V_A V_B) / 2`` in X and Y, depolarization
        gives ``(1 - V_A V_B) / 2`` in all three bases.
        """
        kind = ChannelKind(kind)
        d = (1.0 - Probability(v_a, 'v_a') * Probability(v_b, 'v_b')) / 2.0
        if kind is ChannelKind.DEPHASING:
            return cls(d, d, 0.0)
        return cls(d, d, d)

    @property
    def F_X(self) -> float:
        """:class:`float`: The X basis fidelity ``1 - D_X``."""
        return 1.0 - self.D_X

    @property
    def F_Y(self) -> float:
        """:class:`float`: The Y basis fidelity ``1 - D_Y``."""
        return 1.0 - self.D_Y

    @property
    def F_Z(self) -> float:
        """:class:`float`: The Z basis fidelity ``1 - D_Z``."""
        return 1.0 - self.D_Z

    @property
    def D_avg(self) -> float:
        """:class:`float`: The mean of the X and Z disturbances."""
        return (self.D_X + self.D_Z) / 2.0

    @property
    def D_minus(self) -> float:
        """:class:`float`: The difference ``D_X - D_Z``."""
        return self.D_X - self.D_Z

    def for_basis(self, basis: Union[MeasBasis, str]) -> Probability:
        return getattr(self, f'D_{MeasBasis(basis).value}')

    def to_dict(self) -> dict[str, float]:
        return {'D_X': float(self.D_X), 'D_Y': float(self.D_Y), 'D_Z': float(self.D_Z)}


def disturbance_profile(channel_a: KrausSet, channel_b: KrausSet, *, state: str = 'phi+') -> DisturbanceProfile:
    """Sends a Bell pair through both channels and measures the disturbance in every basis."""
    pure = bell_state(state)
    rho_out = apply_two_sided(_projector(pure), channel_a, channel_b)
    profile = DisturbanceProfile(*(disturbance(rho_out, basis) for basis in MeasBasis))
    _log.debug('disturbance profile for %r and %r: %r', channel_a, channel_b, profile)
    return profile


def profile_from_visibility(kind: Union[ChannelKind, str], v_a: float, v_b: float) -> DisturbanceProfile:
    """Shorthand for :func:`disturbance_profile` on channels given by their visibilities."""
    return disturbance_profile(kraus_from_visibility(kind, v_a), kraus_from_visibility(kind, v_b))


@simple_repr
class BellDiagonal:
    """
    .. attributetable:: qkd_efficiency.BellDiagonal

    The weights of a Bell-diagonal state on ``Phi+``, ``Psi+``, ``Psi-`` and ``Phi-``.

    The labels follow the Pauli error acting on ``Phi+``: ``p_X`` weights ``Psi+``,
    ``p_Y`` weights ``Psi-`` and ``p_Z`` weights ``Phi-``.

    Attributes
    ----------
    p_I: :class:`float`
        Weight of ``Phi+``.
    p_X: :class:`float`
        Weight of ``Psi+``.
    p_Y: :class:`float`
        Weight of ``Psi-``.
    p_Z: :class:`float`
        Weight of ``Phi-``.
    """

    __slots__: tuple[str, ...] = ('p_I', 'p_X', 'p_Y', 'p_Z')

    def __init__(self, p_I: float, p_X: float, p_Y: float, p_Z: float) -> None:
        self.p_I: Probability = Probability(p_I, 'p_I')
        self.p_X: Probability = Probability(p_X, 'p_X')
        self.p_Y: Probability = Probability(p_Y, 'p_Y')
        self.p_Z: Probability = Probability(p_Z, 'p_Z')
        total = math.fsum(self)
        if abs(total - 1.0) > 1e-9:
            raise DomainError('BellDiagonal', tuple(self), f'weights sum to {total!r}, not 1')

    def __iter__(self) -> Iterator[Probability]:
        return iter((self.p_I, self.p_X, self.p_Y, self.p_Z))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (float(self.p_I), float(self.p_X), float(self.p_Y), float(self.p_Z))

    def density_matrix(self) -> ComplexMatrix:
        """:class:`numpy.ndarray`: The state ``sum_k p_k |B_k><B_k|``."""
        out = np.zeros((4, 4), dtype=np.complex128)
        for weight, name in zip(self, ('phi+', 'psi+', 'psi-', 'phi-')):
            out += weight * _projector(bell_state(name))
        out.setflags(write=False)
        return out


def bell_projections(e_X: float, e_Y: float, e_Z: float) -> BellDiagonal:
    """Recovers the Bell-diagonal weights from the QBERs of the three bases.

    ``p_X = (e_Z - e_X + e_Y)/2``, ``p_Y = (e_Z + e_X - e_Y)/2``,
    ``p_Z = (e_X + e_Y - e_Z)/2`` and ``p_I = 1 - (e_X + e_Y + e_Z)/2``.

    Raises
    ------
    InfeasibleQberError
        A weight would be negative beyond ``1e-12``.
    """
    qbers = (float(Probability(e_X, 'e_X')), float(Probability(e_Y, 'e_Y')), float(Probability(e_Z, 'e_Z')))
    x, y, z = qbers
    weights = (1.0 - (x + y + z) / 2.0, (z - x + y) / 2.0, (z + x - y) / 2.0, (x + y - z) / 2.0)
    if min(weights) < -PROBABILITY_TOLERANCE:
        raise InfeasibleQberError(qbers)
    return BellDiagonal(*(max(0.0, w) for w in weights))


def qber_from_bell(weights: BellDiagonal) -> tuple[float, float, float]:
    """Returns ``(e_X, e_Y, e_Z) = (p_Y + p_Z, p_X + p_Z, p_X + p_Y)``, the inverse of :func:`bell_projections`."""
    return (weights.p_Y + weights.p_Z, weights.p_X + weights.p_Z, weights.p_X + weights.p_Y)


def bell_diagonal_of(rho: npt.ArrayLike) -> BellDiagonal:
    """Projects a two-qubit state onto the Bell basis.

    The result is exact for Bell-diagonal states, such as ``Phi+`` after any pair of
    Pauli channels, and the twirled approximation otherwise.
    """
    matrix = validate_density_matrix(rho)
    weights = [float(np.real(bell_state(name).conj() @ matrix @ bell_state(name))) for name in ('phi+', 'psi+', 'psi-', 'phi-')]
    return BellDiagonal(*weights)


def measurement_joint(
    rho: npt.ArrayLike, basis_a: Union[MeasBasis, str], basis_b: Union[MeasBasis, str]
) -> tuple[float, float, float, float]:
    """Computes the raw joint outcome distribution of a local measurement on both qubits.

    No relabelling is applied, so ``Phi+`` measured in Y on both sides is anti-correlated.

    Returns
    -------
    Tuple[:class:`float`, :class:`float`, :class:`float`, :class:`float`]
        The probabilities of ``(a, b)`` in the order ``(0, 0), (0, 1), (1, 0), (1, 1)``.
    """
    matrix = validate_density_matrix(rho)
    states_a = MeasBasis(basis_a).states
    states_b = MeasBasis(basis_b).states
    probabilities: list[float] = []
    for a in states_a:
        for b in states_b:
            joint = np.kron(a, b)
            probabilities.append(max(0.0, float(np.real(joint.conj() @ matrix @ joint))))

    total = math.fsum(probabilities)
    return tuple(p / total for p in probabilities)  # type: ignore
