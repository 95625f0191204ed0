"""Text formats for difference triangle sets, their certificates and nets."""

import logging
from pathlib import Path

from app.core.errors import InvalidArgumentError
from app.models.dts import DifferenceTriangleSet, DtsCertificate
from app.models.net import NetSpec
from app.services import dts as dts_service

logger = logging.getLogger(__name__)


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((number, line))
    return lines


def _ints(line: str, number: int) -> list[int]:
    try:
        return [int(token) for token in line.split()]
    except ValueError as exc:
        raise InvalidArgumentError(f"line {number}: expected integers, got {line!r}") from exc


def parse_dts(text: str) -> DifferenceTriangleSet:
    """
    Parse and validate a DTS: one ruler per line, marks separated by spaces.

    Args:
        text: File contents; '#' starts a comment

    Returns:
        The validated DTS with its certificate

    Raises:
        InvalidArgumentError: On malformed lines or an empty file
        NotADtsError: If two differences collide
    """
    rulers = [tuple(_ints(line, number)) for number, line in _content_lines(text)]
    if not rulers:
        raise InvalidArgumentError("no rulers found")
    return dts_service.validate(rulers)


def format_dts(dts: DifferenceTriangleSet, comment: str | None = None) -> str:
    header = f"# ({dts.L},{dts.M})-DTS scope {dts.scope} sum-of-lengths {dts.sum_of_lengths}\n"
    if comment:
        header = f"# {comment}\n" + header
    return header + "".join(" ".join(map(str, r.marks)) + "\n" for r in dts.rulers)


def format_certificate(cert: DtsCertificate) -> str:
    """Key-value block: scope, slen, perfect, distances."""
    return (
        f"scope: {cert.scope}\n"
        f"slen: {cert.sum_of_lengths}\n"
        f"perfect: {'true' if cert.is_perfect else 'false'}\n"
        f"distances: {' '.join(map(str, cert.distance_set))}\n"
    )


def parse_certificate(text: str) -> DtsCertificate:
    """
    Read a certificate block written by :func:`format_certificate`.

    Raises:
        InvalidArgumentError: If a key is missing or malformed
    """
    fields: dict[str, str] = {}
    for number, line in _content_lines(text):
        key, sep, value = line.partition(":")
        if not sep:
            raise InvalidArgumentError(f"line {number}: expected 'key: value', got {line!r}")
        fields[key.strip()] = value.strip()
    try:
        return DtsCertificate(
            scope=int(fields["scope"]),
            sum_of_lengths=int(fields["slen"]),
            is_perfect=fields["perfect"] == "true",
            distance_set=tuple(_ints(fields["distances"], 0)),
        )
    except KeyError as exc:
        raise InvalidArgumentError(f"certificate is missing {exc.args[0]!r}") from exc


def parse_net(text: str) -> NetSpec:
    """
    Parse a net: a header line with m, then one matrix per line as ``a b c d``.

    Raises:
        InvalidArgumentError: On malformed lines or matrices the model rejects
    """
    lines = _content_lines(text)
    if not lines:
        raise InvalidArgumentError("empty net file")
    number, header = lines[0]
    values = _ints(header, number)
    if len(values) != 1:
        raise InvalidArgumentError(f"line {number}: header must hold only the modulus")
    matrices = []
    for number, line in lines[1:]:
        entries = _ints(line, number)
        if len(entries) != 4:
            raise InvalidArgumentError(f"line {number}: a matrix needs 4 entries")
        matrices.append(tuple(entries))
    if not matrices:
        raise InvalidArgumentError("net file holds no matrices")
    return NetSpec(block_side=values[0], matrices=tuple(matrices))  # type: ignore[arg-type]


def format_net(net: NetSpec) -> str:
    header = f"# ({net.M + 1},{net.block_side})-net, each line a b c d of [[a, b], [c, d]]\n"
    body = "".join(" ".join(map(str, matrix)) + "\n" for matrix in net.matrices)
    return f"{header}{net.block_side}\n{body}"


class DtsRepository:
    """Reads and writes DTS, certificate and net files."""

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

    def load_dts(self, path: Path | str) -> DifferenceTriangleSet:
        """
        Load and validate a DTS file.

        Args:
            path: DTS text file

        Returns:
            The certified DTS
        """
        return parse_dts(self._path(path).read_text(encoding="utf-8"))

    def save_dts(
        self,
        path: Path | str,
        dts: DifferenceTriangleSet,
        comment: str | None = None,
    ) -> Path:
        """
        Write a DTS and, if present, its certificate next to it (``<name>.cert``).

        Args:
            path: Destination file
            dts: DTS to store
            comment: Optional first comment line

        Returns:
            The path written
        """
        target = self._path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(format_dts(dts, comment), encoding="utf-8")
        if dts.certificate is not None:
            target.with_suffix(".cert").write_text(
                format_certificate(dts.certificate),
                encoding="utf-8",
            )
        logger.info(f"wrote ({dts.L},{dts.M})-DTS to {target}")
        return target

    def load_net(self, path: Path | str) -> NetSpec:
        return parse_net(self._path(path).read_text(encoding="utf-8"))

    def save_net(self, path: Path | str, net: NetSpec) -> Path:
        target = self._path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(format_net(net), encoding="utf-8")
        return target
