"""Tests for the BSC, the simulation configuration and the BER workflow."""

import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.config import get_settings
from app.core.errors import InvalidArgumentError
from app.models.code import HoscSpec
from app.models.simulation import SimConfig
from app.repositories.results_repo import format_csv
from app.services import dts as dts_service
from app.services.channel import bsc, make_rng
from app.services.construction import build_spec
from app.services.net import example_shift_net
from app.workflows.simulate import SimulationWorkflow, run_point, sweep


def _config(spec: HoscSpec, *probabilities: float, **overrides: object) -> SimConfig:
    values: dict[str, object] = {
        "spec": spec,
        "window": 10,
        "iterations": 3,
        "probabilities": probabilities,
        "seed": 7,
        "min_bit_errors": 20,
        "max_bits": 100_000,
        "target_ber": 1e-3,
        "frame_rectangles": 16,
        "streams": 2,
    }
    values.update(overrides)
    return SimConfig(**values)  # type: ignore[arg-type]


def test_bsc_noiseless_copy(rng: np.random.Generator) -> None:
    """
    p = 0 returns an equal array that is not the input.

    Args:
        rng: Seeded generator
    """
    bits = rng.integers(0, 2, size=(8, 16), dtype=np.uint8)
    out = bsc(bits, 0.0, rng)
    assert np.array_equal(out, bits)
    assert out is not bits


def test_bsc_flip_rate() -> None:
    """The empirical flip rate is close to p."""
    bits = np.zeros(200_000, dtype=np.uint8)
    for p in (0.5, 0.05):
        flips = int(bsc(bits, p, make_rng(1, 0)).sum())
        assert abs(flips / bits.size - p) < 0.005


def test_bsc_substreams() -> None:
    """Equal keys repeat; different keys diverge."""
    bits = np.zeros(4096, dtype=np.uint8)

    def flips(seed: int, *key: int) -> np.ndarray:
        return bsc(bits, 0.1, make_rng(seed, *key))

    assert np.array_equal(flips(3, 0, 1, 2), flips(3, 0, 1, 2))
    assert not np.array_equal(flips(3, 0, 1, 2), flips(3, 0, 2, 2))
    assert not np.array_equal(flips(3, 0), flips(4, 0))


@pytest.mark.parametrize("p", [-0.1, 0.51, 1.0])
def test_bsc_rejects_out_of_range(p: float, rng: np.random.Generator) -> None:
    """
    Crossover probabilities live in [0, 0.5].

    Args:
        p: Bad probability
        rng: Seeded generator
    """
    with pytest.raises(InvalidArgumentError):
        bsc(np.zeros(4, dtype=np.uint8), p, rng)


def test_config_validation(l2m2_spec: HoscSpec) -> None:
    """
    Out-of-range probabilities and an empty sweep are rejected.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    with pytest.raises(ValidationError):
        _config(l2m2_spec, 0.6)
    with pytest.raises(ValidationError):
        _config(l2m2_spec)
    with pytest.raises(ValidationError):
        _config(l2m2_spec, 0.01, window=0)


def test_config_defaults_come_from_settings(
    l2m2_spec: HoscSpec,
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    """
    Unset budgets follow the HOSC_ environment.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
        monkeypatch: Pytest monkeypatch fixture
    """
    monkeypatch.setenv("HOSC_MIN_BIT_ERRORS", "7")
    monkeypatch.setenv("HOSC_FRAME_RECTANGLES", "5")
    get_settings.cache_clear()
    config = SimConfig(spec=l2m2_spec, window=8, iterations=2, probabilities=(0.01,))
    assert config.min_bit_errors == 7
    assert config.frame_rectangles == 5
    assert config.zero_error_bits == 10**8
    assert config.label() == (2, 2, 8, 1, 8, 2, 0.5625, 8 * 64 * 2)


def test_noiseless_point(l2m2_spec: HoscSpec) -> None:
    """
    p = 0 runs a single frame and is flagged zero-error.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    point = run_point(_config(l2m2_spec, 0.0), 0.0)
    assert point.zero_error
    assert point.frames == 1
    assert point.bit_errors == 0
    assert point.channel_errors == 0
    assert point.bits == 16 * 8 * 9


def test_rate_accounting(l2m2_spec: HoscSpec) -> None:
    """
    Information over coded bits of the data rectangles is exactly 1 - r/S.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    point = SimulationWorkflow(_config(l2m2_spec, 0.02), workers=1).run_point(0.02)
    assert Fraction(point.bits, point.coded_bits) == Fraction(16 - 7, 16)
    assert point.channel_bits > point.coded_bits
    assert point.frames % 2 == 0


def test_stopping_on_bit_errors(l2m2_spec: HoscSpec) -> None:
    """
    Above threshold the point ends once enough errors were seen.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    point = run_point(_config(l2m2_spec, 0.08), 0.08)
    assert point.bit_errors >= 20
    assert not point.zero_error
    assert point.input_ber == pytest.approx(0.08, abs=0.02)


def test_stopping_on_bit_budget(l2m2_spec: HoscSpec) -> None:
    """
    max_bits bounds a point that never collects enough errors.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    config = _config(l2m2_spec, 0.001, min_bit_errors=10**6, max_bits=5000, target_ber=1e-9)
    point = run_point(config, 0.001)
    assert point.bits >= 5000
    assert point.bits < 5000 + 2 * 16 * 72
    assert not point.zero_error


def test_sweep_is_monotone_with_zero_error_point(l2m2_spec: HoscSpec) -> None:
    """
    BER falls with p, stays below the channel BER and reaches a zero-error point.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    result = sweep(_config(l2m2_spec, 0.03, 0.005, 1e-4))
    high, mid, low = result.points
    assert [p.p for p in result.points] == [0.03, 0.005, 1e-4]
    assert high.output_ber >= mid.output_ber >= low.output_ber
    assert mid.output_ber < mid.input_ber
    assert low.zero_error
    assert low.bit_errors == 0
    assert low.bits >= 10_000


def test_sweep_is_deterministic(l2m2_spec: HoscSpec) -> None:
    """
    Equal configurations give byte-identical CSV.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    config = _config(l2m2_spec, 0.02, 0.005)
    assert format_csv(sweep(config)) == format_csv(sweep(config))
    other = format_csv(sweep(config.model_copy(update={"seed": 8})))
    assert other != format_csv(sweep(config))


def test_sweep_independent_of_workers(l2m2_spec: HoscSpec) -> None:
    """
    The worker count does not change any number.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    config = _config(l2m2_spec, 0.02, 0.005, streams=3)
    single = SimulationWorkflow(config, workers=1).sweep()
    pooled = SimulationWorkflow(config, workers=2).sweep()
    assert format_csv(single) == format_csv(pooled)
    assert single.spec_hash == pooled.spec_hash


def test_unterminated_frames(staircase_spec: HoscSpec) -> None:
    """
    Frames without a tail still return every rectangle.

    Args:
        staircase_spec: L=M=C=1 spec fixture
    """
    point = run_point(_config(staircase_spec, 0.0, window=4, terminate=False), 0.0)
    assert point.bit_errors == 0
    assert point.bits == 16 * 16 * 10



def _fixed_budget(spec: HoscSpec, p: float, **overrides: object) -> SimConfig:
    """Same frames and channel noise for every decoder setting."""
    values: dict[str, object] = {
        "min_bit_errors": 10**9,
        "max_bits": 30_000,
        "target_ber": 1e-9,
        "streams": 1,
        "frames_per_task": 2,
    }
    values.update(overrides)
    return _config(spec, p, **values)


def test_output_ber_nonincreasing_in_iterations_and_window(l2m2_spec: HoscSpec) -> None:
    """
    More passes per advance or a longer window never leave more errors on the same noise.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
    """
    p = 0.02
    by_iterations = [
        run_point(_fixed_budget(l2m2_spec, p, iterations=i), p) for i in (1, 2, 4)
    ]
    by_window = [run_point(_fixed_budget(l2m2_spec, p, window=w), p) for w in (8, 14)]

    for points in (by_iterations, by_window):
        assert len({(q.bits, q.channel_errors) for q in points}) == 1
        bers = [q.output_ber for q in points]
        assert all(a >= b for a, b in zip(bers, bers[1:])), bers
    assert by_iterations[0].bit_errors > 0


@pytest.mark.parametrize("p", [0.01, 0.05, 0.2])
def test_measured_input_ber_within_three_sigma(l2m2_spec: HoscSpec, p: float) -> None:
    """
    The channel flip rate seen by a point stays within three binomial standard deviations of p.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
        p: Crossover probability
    """
    point = run_point(_fixed_budget(l2m2_spec, p, iterations=1, window=8), p)
    sigma = math.sqrt(p * (1 - p) / point.channel_bits)
    assert abs(point.input_ber - p) <= 3 * sigma

@pytest.mark.slow
def test_waterfall_at_rate_seven_eighths() -> None:
    """Rate 1 - 9/72: gain up to p = 1e-2, monotone over three decades, a zero-error point."""
    dts = dts_service.validate([(0, 1, 4), (0, 2, 7)])
    spec = build_spec(2, 2, 36, 1, dts, example_shift_net(2, 36))
    assert spec.rate == pytest.approx(0.875)
    probabilities = (1e-2, 5e-3, 3e-3, 1e-3, 1e-4, 1e-5)
    config = _config(
        spec,
        *probabilities,
        window=12,
        min_bit_errors=100,
        max_bits=2 * 10**8,
        target_ber=1e-7,
        frame_rectangles=64,
        streams=8,
    )
    result = SimulationWorkflow(config, workers=4).sweep()
    bers = [p.output_ber for p in result.points]
    assert all(p.output_ber < p.input_ber for p in result.points if p.p <= 1e-2)
    assert all(a >= b for a, b in zip(bers, bers[1:]))
    assert any(p.zero_error for p in result.points if p.p > 0)
