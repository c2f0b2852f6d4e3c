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

from qkd_efficiency.errors import DomainError, NumericalFailure
from qkd_efficiency.numerics import (
    BracketedInterval,
    Probability,
    binary_entropy,
    binary_entropy_array,
    lambert_w,
    maximize_scalar,
    shannon_entropy4,
)


@pytest.mark.parametrize(
    ('x', 'expected'),
    [
        (0.0, 0.0),
        (1.0, 0.0),
        (0.5, 1.0),
        (0.11, 0.4999160),
        (0.0198, 0.1403160),
        (0.05, 0.2863970),
    ],
)
def test_binary_entropy(x: float, expected: float) -> None:
    assert binary_entropy(x) == pytest.approx(expected, abs=1e-5)


def test_binary_entropy_symmetric() -> None:
    for x in np.linspace(0.0, 1.0, 101):
        assert binary_entropy(x) == binary_entropy(1.0 - x)


def test_binary_entropy_domain() -> None:
    with pytest.raises(DomainError):
        binary_entropy(-0.1)
    with pytest.raises(DomainError):
        binary_entropy(1.5)
    with pytest.raises(DomainError):
        binary_entropy(float('nan'))


def test_binary_entropy_array_matches_scalar() -> None:
    xs = np.array([0.0, 1e-9, 0.01, 0.3, 0.5, 0.99, 1.0])
    assert np.allclose(binary_entropy_array(xs), [binary_entropy(x) for x in xs], rtol=0.0, atol=1e-15)


def test_shannon_entropy4() -> None:
    assert shannon_entropy4([0.25, 0.25, 0.25, 0.25]) == pytest.approx(2.0)
    assert shannon_entropy4([1.0, 0.0, 0.0, 0.0]) == 0.0
    assert shannon_entropy4([0.5, 0.5, 0.0, 0.0]) == pytest.approx(1.0)

    with pytest.raises(DomainError):
        shannon_entropy4([0.5, 0.5, 0.0])
    with pytest.raises(DomainError):
        shannon_entropy4([0.5, 0.5, 0.5, 0.0])


def test_probability_clamps_rounding() -> None:
    assert Probability(1.0 + 1e-13) == 1.0
    assert Probability(-1e-13) == 0.0
    assert isinstance(Probability(0.3), float)

    with pytest.raises(DomainError) as excinfo:
        Probability(1.1, 'p_pair')
    assert excinfo.value.field == 'p_pair'


@pytest.mark.parametrize(
    ('x', 'expected'),
    [
        (0.0, 0.0),
        (math.e, 1.0),
        (1.0, 0.5671432904097838),
        (2.0 * math.exp(2.0), 2.0),
        (1e6, 11.383358086140053),
    ],
)
def test_lambert_w(x: float, expected: float) -> None:
    assert lambert_w(x) == pytest.approx(expected, rel=1e-10, abs=1e-15)


def test_lambert_w_identity() -> None:
    for x in np.logspace(-2, 8, 21):
        w = lambert_w(float(x))
        assert w * math.exp(w) == pytest.approx(float(x), rel=1e-9)


def test_lambert_w_domain() -> None:
    with pytest.raises(DomainError):
        lambert_w(-0.1)
    with pytest.raises(DomainError):
        lambert_w(float('inf'))


def test_bracketed_interval() -> None:
    interval = BracketedInterval(1e-6, 1e-2)
    assert 1e-4 in interval
    assert 1.0 not in interval
    assert interval.decades == pytest.approx(4.0)

    with pytest.raises(DomainError):
        BracketedInterval(1.0, 1.0)
    with pytest.raises(DomainError):
        BracketedInterval(0.0, float('inf'))


def test_maximize_scalar_linear() -> None:
    x, fx = maximize_scalar(lambda x: -((x - 0.3) ** 2), BracketedInterval(0.0, 1.0))
    assert x == pytest.approx(0.3, abs=1e-5)
    assert fx == pytest.approx(0.0, abs=1e-9)


def test_maximize_scalar_log_scale() -> None:
    # Peak at x = 1e-3 on a log axis.
    def f(x: float) -> float:
        return -((math.log10(x) + 3.0) ** 2)

    x, _ = maximize_scalar(f, BracketedInterval(1e-8, 0.5), log_scale=True)
    assert x == pytest.approx(1e-3, rel=1e-4)


def test_maximize_scalar_vectorized_grid() -> None:
    def f(x: float) -> float:
        return x * math.exp(-x / 0.01)

    def vectorized(grid: np.ndarray) -> np.ndarray:
        return grid * np.exp(-grid / 0.01)

    x, _ = maximize_scalar(f, BracketedInterval(1e-6, 0.5), log_scale=True, vectorized=vectorized)
    assert x == pytest.approx(0.01, rel=1e-4)


def test_maximize_scalar_edge_maximum() -> None:
    x, fx = maximize_scalar(lambda x: x, BracketedInterval(0.0, 2.0))
    assert x == pytest.approx(2.0)
    assert fx == pytest.approx(2.0)


def test_maximize_scalar_failures() -> None:
    with pytest.raises(NumericalFailure):
        maximize_scalar(lambda x: float('nan'), BracketedInterval(0.0, 1.0))
    with pytest.raises(DomainError):
        maximize_scalar(lambda x: x, BracketedInterval(-1.0, 1.0), log_scale=True)
