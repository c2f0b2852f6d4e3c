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

import math

import numpy as np
import pytest

from qkd_efficiency.enums import ChannelKind, MeasBasis
from qkd_efficiency.errors import DegenerateDenominatorError, DomainError, InfeasibleQberError, InvalidStateError
from qkd_efficiency.quantum_channels import (
    BellDiagonal,
    DisturbanceProfile,
    KrausSet,
    apply_two_sided,
    basis_states,
    bell_diagonal_of,
    bell_projections,
    bell_state,
    disturbance,
    disturbance_profile,
    make_kraus,
    measurement_joint,
    profile_from_visibility,
    qber_from_bell,
    validate_density_matrix,
)

from .conftest import TEST_VISIBILITY


def _pure(name: str) -> np.ndarray:
    vector = bell_state(name)
    return np.outer(vector, vector.conj())


@pytest.mark.parametrize('basis', list(MeasBasis))
def test_basis_states_orthonormal(basis: MeasBasis) -> None:
    phi, phi_perp = basis_states(basis)
    assert abs(np.vdot(phi, phi)) == pytest.approx(1.0)
    assert abs(np.vdot(phi_perp, phi_perp)) == pytest.approx(1.0)
    assert abs(np.vdot(phi, phi_perp)) < 1e-15


def test_basis_state_labels() -> None:
    zero, one = basis_states(MeasBasis.Z)
    assert np.allclose(zero, [1.0, 0.0])
    assert np.allclose(one, [0.0, 1.0])

    plus, _ = basis_states(MeasBasis.X)
    assert np.allclose(plus, [math.sqrt(0.5), math.sqrt(0.5)])

    plus_i, _ = basis_states(MeasBasis.Y)
    assert np.allclose(plus_i, [math.sqrt(0.5), 1j * math.sqrt(0.5)])


@pytest.mark.parametrize('basis', list(MeasBasis))
def test_basis_states_property(basis: MeasBasis) -> None:
    for state, expected in zip(basis.states, basis_states(basis)):
        assert np.array_equal(state, expected)

    # The joint tables measure both sides in these states.
    joint = measurement_joint(_pure('phi+'), basis, basis)
    phi, phi_perp = basis.states
    same = np.kron(phi, phi)
    assert joint[0] == pytest.approx(abs(same.conj() @ bell_state('phi+')) ** 2)
    assert joint[3] == pytest.approx(abs(np.kron(phi_perp, phi_perp).conj() @ bell_state('phi+')) ** 2)


@pytest.mark.parametrize('kind', list(ChannelKind))
@pytest.mark.parametrize('parameter', [0.0, 0.02, 0.5, 1.0])
def test_make_kraus_complete(kind: ChannelKind, parameter: float) -> None:
    channel = make_kraus(kind, parameter)
    total = sum(op.conj().T @ op for op in channel)
    assert np.allclose(total, np.eye(2), atol=1e-12)
    assert all(not op.flags.writeable for op in channel)


def test_make_kraus_shapes() -> None:
    assert len(make_kraus(ChannelKind.DEPHASING, 0.9)) == 2
    assert len(make_kraus(ChannelKind.DEPOLARIZING, 0.1)) == 4
    assert len(make_kraus(ChannelKind.DEPOLARIZING, 0.0)) == 1
    assert make_kraus('depolarizing', 0.1).visibility == pytest.approx(0.9)

    with pytest.raises(DomainError):
        make_kraus(ChannelKind.DEPHASING, 1.2)
    with pytest.raises(ValueError):
        make_kraus('amplitude', 0.5)


def test_kraus_set_rejects_incomplete() -> None:
    with pytest.raises(InvalidStateError):
        KrausSet(ChannelKind.DEPHASING, 0.5, [0.5 * np.eye(2)])
    with pytest.raises(InvalidStateError):
        KrausSet(ChannelKind.DEPHASING, 0.5, [])


def test_validate_density_matrix() -> None:
    validate_density_matrix(_pure('phi+'))
    validate_density_matrix(np.eye(4) / 4.0)

    with pytest.raises(InvalidStateError):
        validate_density_matrix(np.eye(3) / 3.0)
    with pytest.raises(InvalidStateError):
        validate_density_matrix(np.eye(4) / 2.0)
    with pytest.raises(InvalidStateError):
        validate_density_matrix(np.diag([1.5, -0.5, 0.0, 0.0]))

    asymmetric = np.eye(4) / 4.0
    asymmetric[0, 1] = 0.1
    with pytest.raises(InvalidStateError):
        validate_density_matrix(asymmetric)


def test_identity_channels_keep_phi_plus() -> None:
    identity = make_kraus(ChannelKind.DEPHASING, 1.0)
    rho = apply_two_sided(_pure('phi+'), identity, identity)
    assert np.allclose(rho, _pure('phi+'), atol=1e-15)

    profile = disturbance_profile(identity, identity)
    assert (profile.D_X, profile.D_Y, profile.D_Z) == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)


@pytest.mark.parametrize('kind', list(ChannelKind))
def test_profile_matches_closed_form(kind: ChannelKind) -> None:
    rng = np.random.default_rng(7)
    for v_a, v_b in rng.random((50, 2)):
        numeric = profile_from_visibility(kind, v_a, v_b)
        closed = DisturbanceProfile.from_closed_form(kind, v_a, v_b)
        for basis in MeasBasis:
            assert abs(numeric.for_basis(basis) - closed.for_basis(basis)) <= 1e-12


def test_reference_profiles(dephasing: DisturbanceProfile, depolarizing: DisturbanceProfile) -> None:
    d = (1.0 - TEST_VISIBILITY**2) / 2.0
    assert d == pytest.approx(0.0198)

    assert dephasing.D_X == pytest.approx(d, abs=1e-12)
    assert dephasing.D_Y == pytest.approx(d, abs=1e-12)
    assert dephasing.D_Z == pytest.approx(0.0, abs=1e-12)
    assert dephasing.D_avg == pytest.approx(0.0099, abs=1e-12)
    assert dephasing.D_minus == pytest.approx(0.0198, abs=1e-12)
    assert dephasing.F_Z == pytest.approx(1.0)

    assert depolarizing.to_dict() == pytest.approx({'D_X': d, 'D_Y': d, 'D_Z': d}, abs=1e-12)
    assert depolarizing.D_minus == pytest.approx(0.0, abs=1e-12)


def test_fully_depolarized_pair() -> None:
    profile = profile_from_visibility(ChannelKind.DEPOLARIZING, 0.0, 0.0)
    for basis in MeasBasis:
        assert profile.for_basis(basis) == pytest.approx(0.5, abs=1e-12)


def test_disturbance_degenerate() -> None:
    # |11><11|: Alice never obtains Z outcome 0.
    rho = np.zeros((4, 4))
    rho[3, 3] = 1.0
    with pytest.raises(DegenerateDenominatorError):
        disturbance(rho, MeasBasis.Z)


@pytest.mark.parametrize(
    ('name', 'weights'),
    [
        ('phi+', (1.0, 0.0, 0.0, 0.0)),
        ('psi+', (0.0, 1.0, 0.0, 0.0)),
        ('psi-', (0.0, 0.0, 1.0, 0.0)),
        ('phi-', (0.0, 0.0, 0.0, 1.0)),
    ],
)
def test_bell_diagonal_of_pure_states(name: str, weights: tuple[float, ...]) -> None:
    assert bell_diagonal_of(_pure(name)).as_tuple() == pytest.approx(weights, abs=1e-12)


def test_bell_projection_inverse() -> None:
    rng = np.random.default_rng(11)
    for row in rng.dirichlet(np.ones(4), size=200):
        weights = BellDiagonal(*row)
        recovered = bell_projections(*qber_from_bell(weights))
        assert recovered.as_tuple() == pytest.approx(weights.as_tuple(), abs=1e-12)


def test_bell_projections_reference() -> None:
    # Dephasing at V = 0.98: only Phi- is mixed in.
    weights = bell_projections(0.0198, 0.0198, 0.0)
    assert weights.as_tuple() == pytest.approx((0.9802, 0.0, 0.0, 0.0198))

    # Depolarizing: the three error states share the weight equally.
    weights = bell_projections(0.0198, 0.0198, 0.0198)
    assert weights.as_tuple() == pytest.approx((0.9703, 0.0099, 0.0099, 0.0099))


def test_bell_projections_infeasible() -> None:
    with pytest.raises(InfeasibleQberError) as excinfo:
        bell_projections(0.1, 0.0, 0.3)
    assert excinfo.value.qbers == (0.1, 0.0, 0.3)


def test_bell_diagonal_rejects_bad_weights() -> None:
    with pytest.raises(DomainError):
        BellDiagonal(0.5, 0.5, 0.5, 0.0)


def test_density_matrix_round_trip() -> None:
    weights = BellDiagonal(0.7, 0.1, 0.05, 0.15)
    assert bell_diagonal_of(weights.density_matrix()).as_tuple() == pytest.approx(weights.as_tuple(), abs=1e-12)


def test_measurement_joint_phi_plus() -> None:
    rho = _pure('phi+')
    assert measurement_joint(rho, 'Z', 'Z') == pytest.approx((0.5, 0.0, 0.0, 0.5), abs=1e-12)
    assert measurement_joint(rho, 'X', 'X') == pytest.approx((0.5, 0.0, 0.0, 0.5), abs=1e-12)
    # Without relabelling Phi+ is anti-correlated in Y.
    assert measurement_joint(rho, 'Y', 'Y') == pytest.approx((0.0, 0.5, 0.5, 0.0), abs=1e-12)
    # Mismatched bases are uncorrelated.
    assert measurement_joint(rho, 'X', 'Z') == pytest.approx((0.25, 0.25, 0.25, 0.25), abs=1e-12)
