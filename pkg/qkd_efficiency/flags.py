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

import enum

from typing_extensions import Self

__all__: tuple[str, ...] = ('ResultFlags',)


class ResultFlags(enum.IntFlag):
    """
    .. attributetable:: qkd_efficiency.ResultFlags

    Denotes diagnostic markers attached to an optimization, sweep cell or asymptotic result.

    Attributes
    ----------
    NONE: :class:`int`
        Nothing notable happened.
    FLAT_MAXIMUM: :class:`int`
        The efficiency varies by less than 0.1% over a decade of ``p_pair`` around the optimum.
    LOWER_EDGE: :class:`int`
        The optimum sits on the lower edge of the ``p_pair`` search interval.
    ZERO_KEY: :class:`int`
        No positive key can be distilled anywhere in the search region.
    INFEASIBLE: :class:`int`
        No coding order satisfies ``2**m < eta / (2 n_b)``.
    EXPANSION_WARNING: :class:`int`
        The weak-noise expansion parameter exceeds ``0.2`` at the closed form optimum.
    CELL_FAILED: :class:`int`
        The sweep cell raised an error and carries no result.
    """

    NONE = 0
    FLAT_MAXIMUM = 1 << 0
    LOWER_EDGE = 1 << 1
    ZERO_KEY = 1 << 2
    INFEASIBLE = 1 << 3
    EXPANSION_WARNING = 1 << 4
    CELL_FAILED = 1 << 5

    @classmethod
    def all(cls: type[Self]) -> Self:
        """:class:`ResultFlags`: Returns a flag that includes all flags."""
        self = cls.NONE
        for item in cls:
            if not self & item:
                self |= item

        return self

    @classmethod
    def from_names(cls: type[Self], text: str) -> Self:
        """Parses the ``|`` separated form produced by :meth:`names`.

        Parameters
        ----------
        text: :class:`str`
            The flag names, e.g. ``'lower_edge|flat_maximum'``. An empty string yields :attr:`NONE`.
        """
        self = cls.NONE
        for part in filter(None, text.split('|')):
            self |= cls[part.upper()]

        return self

    def names(self) -> str:
        """:class:`str`: The lower case names of the set flags, joined by ``|``."""
        return '|'.join(item.name.lower() for item in type(self) if item.value and item.name and self & item)
