"""Tests for the DTS, spec, result and stream file formats."""

import io
import json
from pathlib import Path

import numpy as np
import pytest

from app.core.errors import InvalidArgumentError, NotADtsError
from app.models.code import HoscSpec
from app.models.dts import DifferenceTriangleSet
from app.models.simulation import SimPoint, SimResult
from app.repositories.dts_repo import (
    DtsRepository,
    parse_certificate,
    parse_dts,
    parse_net,
)
from app.repositories.results_repo import (
    COLUMNS,
    ResultsRepository,
    format_csv,
    format_plotdata,
    parse_csv,
)
from app.repositories.spec_repo import SpecRepository, spec_hash
from app.repositories.stream_repo import MAGIC, StreamRepository, packed_size
from app.services.net import example_involution_net


def _result() -> SimResult:
    points = [
        SimPoint(
            p=0.01,
            input_ber=0.0101,
            output_ber=2.5e-5,
            bits=4_000_000,
            bit_errors=100,
            channel_bits=7_200_000,
            channel_errors=72_720,
            coded_bits=7_000_000,
            frames=250,
            elapsed_s=3.2,
        ),
        SimPoint(
            p=0.001,
            input_ber=0.001,
            output_ber=0.0,
            bits=10**8,
            bit_errors=0,
            channel_bits=1_800_000_000,
            channel_errors=1_800_000,
            coded_bits=1_750_000_000,
            frames=6250,
            zero_error=True,
        ),
    ]
    return SimResult(
        spec_hash="ab" * 32,
        seed=11,
        label=(2, 2, 8, 1, 10, 3, 0.5625, 1280),
        points=points,
    )


def test_dts_text_with_comments() -> None:
    """Comments and blank lines are ignored and the result is certified."""
    dts = parse_dts("# example\n0 6 7   # first\n\n0 2 5\n")
    assert dts.as_tuples() == ((0, 6, 7), (0, 2, 5))
    assert dts.certificate is not None
    assert dts.certificate.distance_set == (1, 2, 3, 5, 6, 7)


def test_dts_text_errors() -> None:
    """Non-integers, empty files and colliding differences are rejected."""
    with pytest.raises(InvalidArgumentError, match="line 2"):
        parse_dts("0 1\n0 x\n")
    with pytest.raises(InvalidArgumentError):
        parse_dts("# nothing\n")
    with pytest.raises(NotADtsError):
        parse_dts("0 1 2\n")


def test_save_dts_writes_certificate(tmp_path: Path, l2m2_dts: DifferenceTriangleSet) -> None:
    """
    The certificate lands next to the DTS and reads back unchanged.

    Args:
        tmp_path: Temporary directory
        l2m2_dts: Validated DTS fixture
    """
    repo = DtsRepository(tmp_path)
    path = repo.save_dts("sets/example.dts", l2m2_dts, comment="hand made")
    assert path == tmp_path / "sets" / "example.dts"
    assert path.read_text().startswith("# hand made\n# (2,2)-DTS scope 7")

    cert_text = path.with_suffix(".cert").read_text()
    assert "perfect: false" in cert_text
    assert parse_certificate(cert_text) == l2m2_dts.certificate
    assert repo.load_dts(path) == l2m2_dts


def test_certificate_errors() -> None:
    """Missing keys and lines without a colon are reported."""
    with pytest.raises(InvalidArgumentError, match="slen"):
        parse_certificate("scope: 7\nperfect: true\ndistances: 1 2\n")
    with pytest.raises(InvalidArgumentError, match="line 1"):
        parse_certificate("scope 7\n")


def test_net_files(tmp_path: Path) -> None:
    """
    Nets survive a save and load; malformed files are rejected.

    Args:
        tmp_path: Temporary directory
    """
    repo = DtsRepository(tmp_path)
    net = example_involution_net(3, 7)
    assert repo.load_net(repo.save_net("inv.net", net)) == net

    with pytest.raises(InvalidArgumentError, match="modulus"):
        parse_net("7 1\n1 0 0 1\n")
    with pytest.raises(InvalidArgumentError, match="4 entries"):
        parse_net("7\n1 0 0 1\n0 1 1\n")
    with pytest.raises(InvalidArgumentError, match="no matrices"):
        parse_net("7\n")
    with pytest.raises(InvalidArgumentError):
        parse_net("7\n0 1 1 0\n")


def test_spec_document_round_trip(tmp_path: Path, l2m2_spec: HoscSpec) -> None:
    """
    A saved spec reloads to the same hash.

    Args:
        tmp_path: Temporary directory
        l2m2_spec: L=2, M=2 spec fixture
    """
    repo = SpecRepository(tmp_path)
    path = repo.save("code.json", l2m2_spec)
    document = json.loads(path.read_text())
    assert document["format"] == "hosc-spec/1"
    assert document["sha256"] == spec_hash(l2m2_spec)
    assert document["combined_ruler"] == [0, 1, 5, 11, 12, 14]

    loaded = repo.load(path)
    assert spec_hash(loaded) == spec_hash(l2m2_spec)
    assert loaded.combined_ruler == l2m2_spec.combined_ruler
    assert loaded.r == 7


def test_spec_hash_tracks_contents(l2m2_spec: HoscSpec, chained_spec: HoscSpec) -> None:
    """
    Different specs hash differently; the hash is hex SHA-256.

    Args:
        l2m2_spec: L=2, M=2 spec fixture
        chained_spec: Two-chain spec fixture
    """
    assert len(spec_hash(l2m2_spec)) == 64
    assert spec_hash(l2m2_spec) != spec_hash(chained_spec)


@pytest.mark.parametrize(
    ("key", "value"),
    [
        ("sha256", "0" * 64),
        ("combined_ruler", [0, 1, 5, 11, 12, 13]),
        ("format", "hosc-spec/0"),
        ("M", 3),
    ],
)
def test_tampered_spec_rejected(
    tmp_path: Path,
    l2m2_spec: HoscSpec,
    key: str,
    value: object,
) -> None:
    """
    A document whose stored or derived fields disagree with the rebuild is refused.

    Args:
        tmp_path: Temporary directory
        l2m2_spec: L=2, M=2 spec fixture
        key: Field to overwrite
        value: Replacement value
    """
    repo = SpecRepository(tmp_path)
    path = repo.save("code.json", l2m2_spec)
    document = json.loads(path.read_text())
    document[key] = value
    path.write_text(json.dumps(document))
    with pytest.raises(InvalidArgumentError):
        repo.load(path)


def test_spec_missing_key_and_bad_json(tmp_path: Path) -> None:
    """
    Missing keys and unparsable files raise InvalidArgumentError.

    Args:
        tmp_path: Temporary directory
    """
    repo = SpecRepository(tmp_path)
    (tmp_path / "partial.json").write_text(json.dumps({"format": "hosc-spec/1", "L": 2}))
    with pytest.raises(InvalidArgumentError, match="missing"):
        repo.load("partial.json")
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(InvalidArgumentError, match="not valid JSON"):
        repo.load("broken.json")


def test_results_csv_layout() -> None:
    """JSON header line, fixed columns, nine-digit floats and no wall time."""
    text = format_csv(_result())
    first, second, third = text.splitlines()[:3]
    header = json.loads(first[2:])
    assert first.startswith("# ")
    assert header["spec_sha256"] == "ab" * 32
    assert header["label"]["window_bits"] == 1280
    assert tuple(second.split(",")) == COLUMNS
    assert third.startswith("1.000000000e-02,1.010000000e-02,2.500000000e-05,4000000,100,")
    assert "3.2" not in text


def test_results_csv_parses_back(tmp_path: Path) -> None:
    """
    A stored sweep reloads with equal points apart from the wall time.

    Args:
        tmp_path: Temporary directory
    """
    repo = ResultsRepository(tmp_path)
    loaded = repo.load(repo.save("out/sweep.csv", _result()))
    assert loaded.label == _result().label
    assert loaded.seed == 11
    assert [p.model_copy(update={"elapsed_s": 0.0}) for p in _result().points] == loaded.points
    assert loaded.points[1].zero_error


def test_results_csv_errors() -> None:
    """Files without the header line or with broken rows are rejected."""
    with pytest.raises(InvalidArgumentError, match="header"):
        parse_csv("p,input_ber\n")
    body = format_csv(_result()).replace("4000000", "four million")
    with pytest.raises(InvalidArgumentError, match="malformed"):
        parse_csv(body)


def test_plotdata_zero_error_at_inverse_bits() -> None:
    """Zero-error points are plotted at 1/bits and flagged."""
    lines = format_plotdata(_result()).splitlines()
    assert lines[0] == "# (2,2,8,1,10,3,0.5625,1280)"
    assert lines[2] == "1.000000000e-02 2.500000000e-05 0"
    assert lines[3] == "1.000000000e-03 1.000000000e-08 1"


def test_stream_layout(rng: np.random.Generator) -> None:
    """
    24-byte header, then each rectangle padded to whole 64-bit words.

    Args:
        rng: Seeded generator
    """
    shape = (8, 48)
    repo = StreamRepository(shape)
    rects = [rng.integers(0, 2, size=shape, dtype=np.uint8) for _ in range(3)]
    tail = [np.zeros(shape, dtype=np.uint8)]
    handle = io.BytesIO()
    assert repo.write(handle, rects, tail) == 4

    data = handle.getvalue()
    assert data[:8] == MAGIC
    assert int.from_bytes(data[16:20], "little") == 1
    assert len(data) == 24 + 4 * packed_size(shape)

    handle.seek(0)
    read_rects, read_tail = repo.read(handle)
    assert all(np.array_equal(a, b) for a, b in zip(read_rects, rects, strict=True))
    assert len(read_tail) == 1
    assert not read_tail[0].any()


def test_stream_bit_order() -> None:
    """Bits are row-major and LSB first; a 3x3 rectangle fills one zero-padded word."""
    rect = np.zeros((3, 3), dtype=np.uint8)
    rect[0, 0] = rect[1, 0] = 1
    handle = io.BytesIO()
    StreamRepository((3, 3)).write(handle, [rect])
    assert packed_size((3, 3)) == 8
    assert handle.getvalue()[24:] == bytes([0b00001001, 0, 0, 0, 0, 0, 0, 0])


def test_stream_errors(tmp_path: Path) -> None:
    """
    Bad magic, foreign shapes, truncation and oversize rectangles are reported.

    Args:
        tmp_path: Temporary directory
    """
    repo = StreamRepository((4, 4))
    path = repo.save(tmp_path / "s.bin", [np.ones((4, 4), dtype=np.uint8)] * 2)
    assert len(repo.load(path)[0]) == 2
    data = path.read_bytes()

    with pytest.raises(InvalidArgumentError, match="not a rectangle stream"):
        repo.read(io.BytesIO(b"XXXXXXXX" + data[8:]))
    with pytest.raises(InvalidArgumentError, match="expected"):
        StreamRepository((4, 5)).read(io.BytesIO(data))
    with pytest.raises(InvalidArgumentError, match="inside a rectangle"):
        repo.read(io.BytesIO(data[:-3]))
    with pytest.raises(InvalidArgumentError, match="shorter than its header"):
        repo.read(io.BytesIO(data[:10]))
    with pytest.raises(InvalidArgumentError):
        repo.write(io.BytesIO(), [np.zeros((4, 5), dtype=np.uint8)])
