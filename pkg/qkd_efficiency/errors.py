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

from collections.abc import Sequence
from typing import Any, Optional

__all__: tuple[str, ...] = (
    "QKDEfficiencyException",
    "DomainError",
    "InvalidStateError",
    "InfeasibleQberError",
    "DegenerateDenominatorError",
    "NumericalFailure",
    "AsymptoticRegimeError",
    "ConfigError",
    "ValidationFailure",
)


class QKDEfficiencyException(Exception):
    """The base for all qkd-efficiency exceptions.

    This class inherits from :class:`Exception`.

    Attributes
    ----------
    message: :class:`str`
        The error message describing the exception.
    """

    def __init__(self, message: str, /) -> None:
        self.message: str = message
        super().__init__(message)


class DomainError(QKDEfficiencyException, ValueError):
    """
    .. attributetable:: qkd_efficiency.DomainError

    Exception raised when an argument lies outside the domain of the operation, for
    example a probability outside ``[0, 1]`` or a negative Lambert-W argument.

    This class inherits from :class:`qkd_efficiency.QKDEfficiencyException` and :class:`ValueError`.

    Attributes
    ----------
    field: :class:`str`
        The name of the offending argument.
    value: Any
        The rejected value.
    """

    def __init__(self, field: str, value: Any, reason: str, /) -> None:
        self.field: str = field
        self.value: Any = value
        super().__init__(f"{field}={value!r}: {reason}")


class InvalidStateError(QKDEfficiencyException):
    """
    .. attributetable:: qkd_efficiency.InvalidStateError

    Exception raised when a density matrix or a Kraus set violates its invariants
    (Hermiticity, unit trace, positivity or completeness).

    This class inherits from :class:`qkd_efficiency.QKDEfficiencyException`.
    """

    pass


class InfeasibleQberError(QKDEfficiencyException):
    """
    .. attributetable:: qkd_efficiency.InfeasibleQberError

    Exception raised when a QBER triple does not correspond to any Bell-diagonal state.

    This class inherits from :class:`qkd_efficiency.QKDEfficiencyException`.

    Attributes
    ----------
    qbers: Tuple[:class:`float`, :class:`float`, :class:`float`]
        The rejected ``(e_X, e_Y, e_Z)`` triple.
    """

    def __init__(self, qbers: tuple[float, float, float], /) -> None:
        self.qbers: tuple[float, float, float] = qbers
        super().__init__(f"QBER triple (e_X, e_Y, e_Z)={qbers!r} has no Bell-diagonal state")


class DegenerateDenominatorError(QKDEfficiencyException):
    """
    .. attributetable:: qkd_efficiency.DegenerateDenominatorError

    Exception raised when a ratio cannot be formed because its denominator vanishes, such as
    a disturbance for an outcome Alice never obtains or a QBER at zero event rate.

    This class inherits from :class:`qkd_efficiency.QKDEfficiencyException`.
    """

    pass


class NumericalFailure(QKDEfficiencyException):
    """
    .. attributetable:: qkd_efficiency.NumericalFailure

    Exception raised when a numerical routine meets a non-finite value or fails to converge.

    This class inherits from :class:`qkd_efficiency.QKDEfficiencyException`.
    """

    pass


class AsymptoticRegimeError(QKDEfficiencyException):
    """
    .. attributetable:: qkd_efficiency.AsymptoticRegimeError

    Exception raised when the weak-noise closed forms cannot be applied, e.g. without background
    noise (the efficiency is then unbounded) or when a single qubit per photon is already too many.

    This class inherits from :class:`qkd_efficiency.QKDEfficiencyException`.

    Attributes
    ----------
    reason: :class:`str`
        A short machine readable reason, such as ``'noiseless'`` or ``'key_impossible'``.
    """

    def __init__(self, reason: str, message: str, /) -> None:
        self.reason: str = reason
        super().__init__(message)


class ConfigError(QKDEfficiencyException):
    """
    .. attributetable:: qkd_efficiency.ConfigError

    Exception raised when a run configuration is malformed or contains an out of range value.

    This class inherits from :class:`qkd_efficiency.QKDEfficiencyException`.

    Attributes
    ----------
    field: Optional[:class:`str`]
        The configuration key at fault, if a single key is responsible.
    """

    def __init__(self, message: str, /, *, field: Optional[str] = None) -> None:
        self.field: Optional[str] = field
        super().__init__(f"{field}: {message}" if field else message)


class ValidationFailure(QKDEfficiencyException):
    """
    .. attributetable:: qkd_efficiency.ValidationFailure

    Exception raised when one or more checks of the validation suite fail.

    This class inherits from :class:`qkd_efficiency.QKDEfficiencyException`.

    Attributes
    ----------
    failed: List[:class:`str`]
        The names of the failed checks.
    """

    def __init__(self, failed: Sequence[str], /) -> None:
        self.failed: list[str] = list(failed)
        super().__init__(f"validation failed: {', '.join(self.failed)}")
