"""Shared fixtures and the acceptance pass/fail summary."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gmac_regions.gaussian import GaussianChannel

# Independent high-precision references (mpmath, 40 digits), frozen here.
TEN_POW_0_7 = 5.011872336272722850
C_40_OVER_N3 = 1.583442002749850          # 0.5*log2(1 + 40/10^0.7)
C_20_OVER_N3 = 1.159595743575303621       # 0.5*log2(1 + 20/10^0.7)
H_GAUSS_N3 = 3.209770418391218            # 0.5*log2(2*pi*e*10^0.7)
H_GAUSS_2 = 2.547095585180641103          # 0.5*log2(2*pi*e*2)

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def fig5_channel():
    return GaussianChannel.from_db(p1=10, p2=10, n1=0, n2=0, n3=7, q0=5)


@pytest.fixture
def fig6_channel():
    return GaussianChannel.from_db(p1=10, p2=10, n1=0, n2=0, n3=10, q1=7, q2=7)


@pytest.fixture
def fig7_channel():
    return GaussianChannel.from_db(p1=10, p2=10, n1=0, n2=0, n3=10).with_(q1=math.inf)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
