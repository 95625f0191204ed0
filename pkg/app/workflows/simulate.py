"""Monte-Carlo BER simulation over the binary symmetric channel."""

import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import NamedTuple

import numpy as np

from app.core.config import get_settings
from app.core.errors import InternalConsistencyError
from app.models.code import HoscSpec
from app.models.simulation import SimConfig, SimPoint, SimResult
from app.repositories.spec_repo import spec_hash
from app.services.channel import bsc, make_rng
from app.services.codec import DecoderWindow, StreamEncoder, info_shape

logger = logging.getLogger(__name__)


class _FrameTask(NamedTuple):
    spec: HoscSpec
    window: int
    iterations: int
    schedule: str
    terminate: bool
    frame_rectangles: int
    frames: int
    p: float
    seed: int
    key: tuple[int, int, int]


class _FrameTally(NamedTuple):
    bits: int
    bit_errors: int
    channel_bits: int
    channel_errors: int
    coded_bits: int
    frames: int


def _simulate_frames(task: _FrameTask) -> _FrameTally:
    """Encode, transmit and decode ``task.frames`` terminated frames on one substream."""
    spec = task.spec
    rng = make_rng(task.seed, *task.key)
    rows, info_cols = info_shape(spec)
    bits = bit_errors = channel_bits = channel_errors = coded_bits = 0

    for _ in range(task.frames):
        encoder = StreamEncoder(spec)
        decoder = DecoderWindow(
            spec,
            task.window,
            task.iterations,
            schedule=task.schedule,  # type: ignore[arg-type]
        )
        sent = rng.integers(0, 2, size=(task.frame_rectangles, rows, info_cols), dtype=np.uint8)
        decided = []
        for info in sent:
            tx = encoder.encode_step(info)
            rx = bsc(tx, task.p, rng)
            channel_errors += int(np.count_nonzero(tx != rx))
            channel_bits += tx.size
            coded_bits += tx.size
            out = decoder.decode_advance(rx)
            if out is not None:
                decided.append(out)

        rx_tail = []
        if task.terminate:
            for tx in encoder.terminate():
                rx = bsc(tx, task.p, rng)
                channel_errors += int(np.count_nonzero(tx != rx))
                channel_bits += tx.size
                rx_tail.append(rx)
        decided.extend(decoder.flush(rx_tail))

        if len(decided) != task.frame_rectangles:
            raise InternalConsistencyError(
                f"decoder returned {len(decided)} of {task.frame_rectangles} rectangles"
            )
        received_info = np.stack(decided)[:, :, :info_cols]
        bit_errors += int(np.count_nonzero(received_info != sent))
        bits += sent.size

    return _FrameTally(bits, bit_errors, channel_bits, channel_errors, coded_bits, task.frames)


class SimulationWorkflow:
    """
    Runs BER points and sweeps for one configuration.

    Each point is simulated in rounds. Round j runs one task per stream s, drawing from
    the substream (point index, s, j), and the stopping rules are checked only after a
    whole round is merged in stream order. The numbers produced therefore do not depend
    on the number of workers.
    """

    def __init__(self, config: SimConfig, workers: int | None = None) -> None:
        """
        Initialize the workflow.

        Args:
            config: Simulation configuration
            workers: Worker processes; the configured default if None
        """
        self.config = config
        self.workers = workers or get_settings().workers

    def _tasks(self, p: float, index: int, round_no: int, frames: int) -> list[_FrameTask]:
        cfg = self.config
        return [
            _FrameTask(
                spec=cfg.spec,
                window=cfg.window,
                iterations=cfg.iterations,
                schedule=cfg.schedule,
                terminate=cfg.terminate,
                frame_rectangles=cfg.frame_rectangles,
                frames=frames,
                p=p,
                seed=cfg.seed,
                key=(index, stream, round_no),
            )
            for stream in range(cfg.streams)
        ]

    def _run(self, p: float, index: int, executor: Executor | None) -> SimPoint:
        cfg = self.config
        totals = np.zeros(6, dtype=np.int64)
        started = time.perf_counter()
        zero_error = False
        round_no = 0
        runner = executor.map if executor is not None else map

        if p == 0.0:
            # noiseless channel: one frame
            totals += _simulate_frames(self._tasks(p, index, 0, 1)[0])
            zero_error = True
        else:
            while True:
                tasks = self._tasks(p, index, round_no, cfg.frames_per_task)
                for tally in runner(_simulate_frames, tasks):
                    totals += tally
                round_no += 1
                bits, errors = int(totals[0]), int(totals[1])
                if errors >= cfg.min_bit_errors or bits >= cfg.max_bits:
                    break
                if errors == 0 and bits >= cfg.zero_error_bits:
                    zero_error = True
                    break

        elapsed = time.perf_counter() - started
        bits, errors, channel_bits, channel_errors, coded_bits, frames = (int(v) for v in totals)
        point = SimPoint(
            p=p,
            input_ber=channel_errors / channel_bits if channel_bits else 0.0,
            output_ber=errors / bits if bits else 0.0,
            bits=bits,
            bit_errors=errors,
            channel_bits=channel_bits,
            channel_errors=channel_errors,
            coded_bits=coded_bits,
            frames=frames,
            zero_error=zero_error,
            elapsed_s=elapsed,
        )
        logger.info(
            f"p={p:.3e}: BER {point.output_ber:.3e} ({errors}/{bits}), "
            f"{frames} frames, {point.bits_per_second:.3e} bit/s"
            + (" [zero-error]" if zero_error else "")
        )
        return point

    def run_point(self, p: float, index: int = 0) -> SimPoint:
        """
        Simulate one crossover probability.

        Args:
            p: Crossover probability in [0, 0.5]
            index: Point index selecting the RNG substreams

        Returns:
            The measured point
        """
        if self.workers <= 1:
            return self._run(p, index, None)
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            return self._run(p, index, executor)

    def sweep(self) -> SimResult:
        """
        Simulate every configured probability.

        Returns:
            All points, in configuration order, with the spec hash and label tuple
        """
        cfg = self.config
        result = SimResult(spec_hash=spec_hash(cfg.spec), seed=cfg.seed, label=cfg.label())
        logger.info(f"sweep {cfg.label()} over {len(cfg.probabilities)} points, seed {cfg.seed}")
        if self.workers <= 1:
            result.points = [self._run(p, i, None) for i, p in enumerate(cfg.probabilities)]
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                result.points = [
                    self._run(p, i, executor) for i, p in enumerate(cfg.probabilities)
                ]
        return result


def run_point(config: SimConfig, p: float, index: int = 0) -> SimPoint:
    return SimulationWorkflow(config).run_point(p, index)


def sweep(config: SimConfig) -> SimResult:
    return SimulationWorkflow(config).sweep()
