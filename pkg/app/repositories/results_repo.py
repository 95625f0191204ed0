"""Simulation result files: CSV with a JSON header line, and gnuplot columns."""

import csv
import io
import json
import logging
from pathlib import Path

from app.core.errors import InvalidArgumentError
from app.models.simulation import SimPoint, SimResult

logger = logging.getLogger(__name__)

LABEL_FIELDS = ("L", "M", "block_side", "C", "W", "I", "rate", "window_bits")
COLUMNS = (
    "p",
    "input_ber",
    "output_ber",
    "bits",
    "bit_errors",
    "channel_bits",
    "channel_errors",
    "coded_bits",
    "frames",
    "zero_error",
)


def _float(value: float) -> str:
    return f"{value:.9e}"


def format_csv(result: SimResult) -> str:
    """
    Render a sweep as CSV.

    The first line is ``# `` followed by a JSON object with the spec hash, seed and label
    tuple. Wall-clock measurements are left out so equal runs give equal files.
    """
    header = {
        "spec_sha256": result.spec_hash,
        "seed": result.seed,
        "label": dict(zip(LABEL_FIELDS, result.label, strict=True)),
    }
    buffer = io.StringIO()
    buffer.write("# " + json.dumps(header, sort_keys=True) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for point in result.points:
        writer.writerow(
            (
                _float(point.p),
                _float(point.input_ber),
                _float(point.output_ber),
                point.bits,
                point.bit_errors,
                point.channel_bits,
                point.channel_errors,
                point.coded_bits,
                point.frames,
                int(point.zero_error),
            )
        )
    return buffer.getvalue()


def parse_csv(text: str) -> SimResult:
    """
    Read a CSV written by :func:`format_csv`.

    Raises:
        InvalidArgumentError: If the header line or columns are missing
    """
    first, _, body = text.partition("\n")
    if not first.startswith("# "):
        raise InvalidArgumentError("result file lacks its JSON header line")
    try:
        header = json.loads(first[2:])
        label = tuple(header["label"][name] for name in LABEL_FIELDS)
        rows = list(csv.DictReader(io.StringIO(body)))
        points = [
            SimPoint(
                p=float(row["p"]),
                input_ber=float(row["input_ber"]),
                output_ber=float(row["output_ber"]),
                bits=int(row["bits"]),
                bit_errors=int(row["bit_errors"]),
                channel_bits=int(row["channel_bits"]),
                channel_errors=int(row["channel_errors"]),
                coded_bits=int(row["coded_bits"]),
                frames=int(row["frames"]),
                zero_error=row["zero_error"] == "1",
            )
            for row in rows
        ]
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InvalidArgumentError(f"malformed result file: {exc}") from exc
    return SimResult(
        spec_hash=header["spec_sha256"],
        seed=header["seed"],
        label=label,
        points=points,
    )


def format_plotdata(result: SimResult) -> str:
    """
    Gnuplot-ready columns ``p output_ber zero_error``.

    A zero-error point is plotted at 1/bits, the level the measurement rules out, and
    marked by its third column so it can be drawn dashed.
    """
    label = ",".join(str(v) for v in result.label)
    lines = [f"# ({label})", "# p output_ber zero_error"]
    for point in result.points:
        ber = point.output_ber
        if point.zero_error and point.bits > 0:
            ber = 1.0 / point.bits
        lines.append(f"{_float(point.p)} {_float(ber)} {int(point.zero_error)}")
    return "\n".join(lines) + "\n"


class ResultsRepository:
    """Stores sweep results."""

    def __init__(self, root: Path | None = None) -> None:
        """
        Initialize the repository.

        Args:
            root: Directory relative paths are resolved against (current directory if None)
        """
        self.root = root or Path.cwd()

    def _path(self, path: Path | str) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.root / path

    def save(self, path: Path | str, result: SimResult) -> Path:
        """
        Write a sweep as CSV.

        Args:
            path: Destination file
            result: Sweep to store

        Returns:
            The path written

        Raises:
            OSError: If the file cannot be written
        """
        target = self._path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(format_csv(result), encoding="utf-8")
        logger.info(f"wrote {len(result.points)} points to {target}")
        return target

    def load(self, path: Path | str) -> SimResult:
        return parse_csv(self._path(path).read_text(encoding="utf-8"))

    def save_plotdata(self, path: Path | str, result: SimResult) -> Path:
        target = self._path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(format_plotdata(result), encoding="utf-8")
        return target
