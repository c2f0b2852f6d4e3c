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

import numpy as np
import pytest

from qkd_efficiency.enums import MeasBasis, ProtocolId
from qkd_efficiency.errors import DomainError
from qkd_efficiency.numerics import binary_entropy
from qkd_efficiency.protocols import (
    ProtocolSpec,
    QberSet,
    conclusive_probability,
    key_fraction,
    key_fraction_bbm92_4,
    key_fraction_bell,
    key_fraction_biterr,
    key_fraction_minimized,
)
from qkd_efficiency.quantum_channels import BellDiagonal, bell_projections, qber_from_bell


@pytest.mark.parametrize(
    ('id', 'symmetric', 'q', 'sift_factor', 'bases'),
    [
        ('bbm92-4', False, 1.0, 1.0, 'XZ'),
        ('bbm92-4', True, 0.5, 0.5, 'XZ'),
        ('bbm92-6', False, 1.0 / 3.0, 1.0 / 3.0, 'XYZ'),
        ('sarg04-4', False, 0.5, 1.0, 'XZ'),
        ('sarg04-6', False, 1.0 / 3.0, 1.0, 'XYZ'),
    ],
)
def test_protocol_defaults(id: str, symmetric: bool, q: float, sift_factor: float, bases: str) -> None:
    spec = ProtocolSpec.from_id(id, symmetric=symmetric)
    assert spec.id is ProtocolId(id)
    assert spec.q == pytest.approx(q)
    assert spec.sift_factor == pytest.approx(sift_factor)
    assert ''.join(basis.value for basis in spec.bases) == bases
    assert sum(spec.basis_probabilities()) == pytest.approx(1.0)


def test_protocol_overrides() -> None:
    spec = ProtocolSpec.from_id('bbm92-4', q=0.8, sift_factor=0.9)
    assert (spec.q, spec.sift_factor) == (0.8, 0.9)
    assert spec.basis_probabilities() == pytest.approx((0.2, 0.8))
    assert spec.uses(MeasBasis.Z)
    assert not spec.uses('Y')
    assert spec == ProtocolSpec.from_id('bbm92-4', q=0.8, sift_factor=0.9)
    assert spec.to_dict() == {'id': 'bbm92-4', 'q': 0.8, 'sift_factor': 0.9, 'symmetric': False}


def test_protocol_rejects() -> None:
    with pytest.raises(DomainError):
        ProtocolSpec.from_id('b92')
    with pytest.raises(DomainError):
        ProtocolSpec.from_id('bbm92-4', q=0.0)
    with pytest.raises(DomainError):
        ProtocolSpec.from_id('bbm92-4', sift_factor=1.5)


def test_conclusive_probability() -> None:
    bbm92 = ProtocolSpec.from_id('bbm92-4')
    sarg04 = ProtocolSpec.from_id('sarg04-4')

    assert conclusive_probability(bbm92, 0.2) == 1.0
    assert conclusive_probability(sarg04, 0.0) == 0.5
    assert conclusive_probability(sarg04, 0.0198) == pytest.approx(0.5198)
    assert sarg04.conclusive_rule(0.5) == 1.0

    with pytest.raises(DomainError):
        conclusive_probability(sarg04, 0.6)


def test_bbm92_4_key_fraction() -> None:
    assert key_fraction_bbm92_4(0.0, 0.0, 1.0) == 1.0
    assert key_fraction_bbm92_4(0.0, 0.0, 0.5) == 0.5
    # The BB84 threshold sits at e = 11%.
    assert abs(key_fraction_bbm92_4(0.11, 0.11, 1.0)) < 2e-3
    assert key_fraction_bbm92_4(0.2, 0.2, 1.0) < 0.0


def test_key_fraction_minimized() -> None:
    k, e_Y = key_fraction_minimized(0.1, 0.1)
    assert k == pytest.approx(0.078072, abs=1e-6)
    assert e_Y == pytest.approx(0.2, abs=1e-4)

    # Without the Y basis the BB84 bound is the more pessimistic one.
    assert k >= key_fraction_bbm92_4(0.1, 0.1, 1.0)

    k, e_Y = key_fraction_minimized(0.0, 0.0)
    assert (k, e_Y) == (1.0, 0.0)

    with pytest.raises(DomainError):
        key_fraction_minimized(0.6, 0.6)


def test_key_fraction_identity() -> None:
    rng = np.random.default_rng(3)
    for row in rng.dirichlet(np.ones(4), size=500):
        weights = BellDiagonal(*row)
        e_X, _, e_Z = qber_from_bell(weights)
        assert abs(key_fraction_bell(weights) - key_fraction_biterr(e_Z, e_X, weights)) <= 1e-12


def test_key_fraction_biterr_inconsistent() -> None:
    weights = BellDiagonal(0.9, 0.05, 0.0, 0.05)
    with pytest.raises(DomainError):
        key_fraction_biterr(0.2, 0.05, weights)
    with pytest.raises(DomainError):
        key_fraction_biterr(0.05, 0.2, weights)


def test_key_fraction_by_protocol() -> None:
    h = binary_entropy(0.05)

    bbm92 = ProtocolSpec.from_id('bbm92-4')
    assert key_fraction(bbm92, QberSet(0.05, 0.05)) == pytest.approx(1.0 - 2.0 * h)

    symmetric = ProtocolSpec.from_id('bbm92-4', symmetric=True)
    assert key_fraction(symmetric, QberSet(0.05, 0.05)) == pytest.approx(0.5 * (1.0 - 2.0 * h))

    sarg04 = ProtocolSpec.from_id('sarg04-4')
    assert key_fraction(sarg04, QberSet(0.05, 0.05)) == pytest.approx(0.427206, abs=1e-6)

    six = ProtocolSpec.from_id('bbm92-6')
    expected = (1.0 - binary_entropy(0.0198)) / 3.0
    assert key_fraction(six, QberSet(0.0198, 0.0, e_Y=0.0198)) == pytest.approx(expected)
    assert key_fraction(six, QberSet(0.0198, 0.0, e_Y=0.0198)) == pytest.approx(
        key_fraction_bell(bell_projections(0.0198, 0.0198, 0.0)) / 3.0
    )


def test_key_fraction_basis_mismatch() -> None:
    with pytest.raises(DomainError):
        key_fraction(ProtocolSpec.from_id('bbm92-6'), QberSet(0.01, 0.01))
    with pytest.raises(DomainError):
        key_fraction(ProtocolSpec.from_id('bbm92-4'), QberSet(0.01, 0.01, e_Y=0.01))


def test_qber_set() -> None:
    qbers = QberSet(0.03, 0.01)
    assert qbers.e_bit == 0.01
    assert qbers.e_ph == 0.03
    assert qbers.for_basis('Y') is None
    assert qbers.to_dict() == {'e_X': 0.03, 'e_Y': None, 'e_Z': 0.01}

    with pytest.raises(DomainError):
        QberSet(1.2, 0.0)
