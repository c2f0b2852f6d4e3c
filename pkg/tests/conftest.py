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

from pathlib import Path
from typing import Final

import pytest

from qkd_efficiency.enums import ChannelKind
from qkd_efficiency.link_model import ChannelParams, LinkPoint
from qkd_efficiency.protocols import ProtocolSpec
from qkd_efficiency.quantum_channels import DisturbanceProfile, profile_from_visibility

# Link used throughout the reference numbers
TEST_VISIBILITY: Final[float] = 0.98
TEST_ETA: Final[float] = 1e-3
TEST_NOISE_RATIOS: Final[tuple[float, ...]] = (1e-7, 1e-6, 1e-5)

# Optimum of dephasing bbm92-4 at n/eta = 1e-6, from a fine grid scan
TEST_M_STAR: Final[int] = 12
TEST_P_STAR: Final[float] = 0.0045
TEST_PKE_STAR: Final[float] = 9.19

# Noiseless efficiency at fixed m = 1 for decreasing pair probabilities
TEST_NOISELESS_PKE: Final[dict[float, float]] = {1e-1: 0.507, 1e-2: 0.805, 1e-3: 0.853}

# Small Monte Carlo point with about a thousand events per ten million frames
TEST_SIM_ETA: Final[float] = 0.1
TEST_SIM_NOISE: Final[float] = 1e-4
TEST_SIM_FRAMES: Final[int] = 10_000_000


@pytest.fixture(scope='session')
def dephasing() -> DisturbanceProfile:
    return profile_from_visibility(ChannelKind.DEPHASING, TEST_VISIBILITY, TEST_VISIBILITY)


@pytest.fixture(scope='session')
def depolarizing() -> DisturbanceProfile:
    return profile_from_visibility(ChannelKind.DEPOLARIZING, TEST_VISIBILITY, TEST_VISIBILITY)


@pytest.fixture(scope='session')
def bbm92() -> ProtocolSpec:
    return ProtocolSpec.from_id('bbm92-4')


@pytest.fixture()
def template(dephasing: DisturbanceProfile, bbm92: ProtocolSpec) -> LinkPoint:
    # Optimizer template at n/eta = 1e-6; m and p_pair are placeholders.
    return LinkPoint(
        m=1,
        p_pair=0.5,
        channel=ChannelParams.symmetric(TEST_ETA, 1e-6 * TEST_ETA),
        protocol=bbm92,
        decoherence=dephasing,
    )


@pytest.fixture()
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / 'link.env'
    path.write_text(
        '# dephasing link at n/eta = 1e-6\n'
        'PROTOCOL=bbm92-4\n'
        'KIND=dephasing\n'
        'V_A=0.98\n'
        'V_B=0.98\n'
        'ETA_A=1e-3\n'
        'ETA_B=1e-3\n'
        'N_A=1e-9\n'
        'N_B=1e-9\n'
        '\n'
        'M=12\n'
        'P_PAIR=0.0045\n'
    )
    return path
