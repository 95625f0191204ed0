"""Pytest configuration and fixtures."""

from collections.abc import Iterator

import numpy as np
import pytest

from app.core.config import get_settings
from app.models.code import HoscSpec
from app.models.dts import DifferenceTriangleSet
from app.services import dts as dts_service
from app.services.construction import build_spec
from app.services.net import example_shift_net


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """
    Isolate every test from the caller's HOSC_ environment.

    Args:
        monkeypatch: Pytest monkeypatch fixture
    """
    for name in ("HOSC_WORKERS", "HOSC_LOG_LEVEL", "HOSC_SCHEDULE", "HOSC_DEBUG_SYNDROME_CHECK"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def l2m2_dts() -> DifferenceTriangleSet:
    """
    The (2,2)-DTS {(0,6,7),(0,2,5)}.

    Returns:
        Validated DTS
    """
    return dts_service.validate([(0, 6, 7), (0, 2, 5)])


@pytest.fixture
def l2m2_spec(l2m2_dts: DifferenceTriangleSet) -> HoscSpec:
    """
    L=2, M=2 code on the shift net with S/L=8 and the smallest extended Hamming code.

    Returns:
        Encodable spec
    """
    return build_spec(2, 2, 8, 1, l2m2_dts, example_shift_net(2, 8))


@pytest.fixture
def staircase_spec() -> HoscSpec:
    """
    Classical staircase code (L=M=C=1) with S=16.

    Returns:
        Encodable spec
    """
    dts = dts_service.validate([(0, 1)])
    return build_spec(1, 1, 16, 1, dts, example_shift_net(1, 16))


@pytest.fixture
def chained_spec() -> HoscSpec:
    """
    Two chained copies of an L=2, M=1 code with S/L=8.

    Returns:
        Encodable spec
    """
    dts = dts_service.validate([(0, 1), (0, 2)])
    return build_spec(2, 1, 8, 2, dts, example_shift_net(1, 8))


@pytest.fixture
def rng() -> np.random.Generator:
    """
    Seeded generator for test data.

    Returns:
        numpy Generator
    """
    return np.random.default_rng(20240611)
